#include "polycode/can_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "polycode/fft.hpp"

namespace polycode {

void CanConfig::validate() const {
    if (M < 1) throw std::invalid_argument("CAN: M must be >= 1");
    if (L < M) throw std::invalid_argument("CAN: L must be >= M");
    if (!(tolerance > 0.0)) throw std::invalid_argument("CAN: tolerance must be > 0");
    if (!gamma.empty()) {
        if (gamma.size() != L)
            throw std::invalid_argument("WeCAN: gamma needs L = " + std::to_string(L) + " entries");
        if (!(gamma[0] > 0.0)) throw std::invalid_argument("WeCAN: gamma_0 must be > 0");
    }
}

double can_criterion(std::span<const PolyphaseCode> codes, std::span<const double> gamma) {
    if (codes.empty()) throw std::invalid_argument("CAN criterion: empty set");
    const std::size_t L = codes.front().size();
    if (!gamma.empty() && gamma.size() != L)
        throw std::invalid_argument("CAN criterion: gamma length differs from L");
    auto g2 = [&](std::size_t n) { return gamma.empty() ? 1.0 : gamma[n] * gamma[n]; };
    std::vector<CVector> x;
    for (const auto& c : codes) {
        if (c.size() != L) throw std::invalid_argument("CAN criterion: codes differ in length");
        x.push_back(c.samples());
    }
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            const auto p = cross_correlate(x[i], x[k]);
            const auto z = static_cast<std::ptrdiff_t>(p.zero_lag_index);
            for (std::ptrdiff_t n = -z; n <= z; ++n) {
                cplx r = p.at_lag(n);
                if (n == 0 && i == k) r -= static_cast<double>(L);
                total += g2(static_cast<std::size_t>(std::abs(n))) * std::norm(r);
            }
        }
    return total;
}

namespace {

constexpr double kMaxRelax = 16.0;

Eigen::MatrixXd toeplitz(std::span<const double> gamma) {
    const auto L = static_cast<Eigen::Index>(gamma.size());
    Eigen::MatrixXd G(L, L);
    for (Eigen::Index i = 0; i < L; ++i)
        for (Eigen::Index j = 0; j < L; ++j) G(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
    return G;
}

// Polar factor of Y (rows or columns orthonormal, whichever is shorter).
Eigen::MatrixXcd polar_factor(const Eigen::MatrixXcd& Y) {
    const bool wide = Y.rows() <= Y.cols();
    const Eigen::MatrixXcd gram = wide ? Eigen::MatrixXcd(Y * Y.adjoint()) : Eigen::MatrixXcd(Y.adjoint() * Y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram);
    const Eigen::VectorXd ev = es.eigenvalues();
    const double cutoff = 1e-14 * std::max(ev.maxCoeff(), 0.0);
    Eigen::VectorXd inv_sqrt(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) inv_sqrt(i) = ev(i) > cutoff ? 1.0 / std::sqrt(ev(i)) : 0.0;
    const Eigen::MatrixXcd root =
        es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
    return wide ? Eigen::MatrixXcd(root * Y) : Eigen::MatrixXcd(Y * root);
}

}  // namespace

std::vector<double> banded_gamma(std::size_t L, std::size_t P) {
    if (L < 1 || P < 1) throw std::invalid_argument("banded_gamma: L and P must be >= 1");
    std::vector<double> gamma(L, 0.0);
    for (std::size_t n = 1; n < std::min(P, L); ++n) gamma[n] = 1.0;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(toeplitz(gamma), Eigen::EigenvaluesOnly).eigenvalues();
    // Shift by the most negative eigenvalue, with a little headroom against rounding.
    gamma[0] = std::max(1.0, -ev.minCoeff() * (1.0 + 1e-9));
    return gamma;
}

CanResult wecan_design(const CanConfig& cfg) {
    cfg.validate();
    const std::size_t M = cfg.M, L = cfg.L, F = 2 * L;
    const std::vector<double> gamma = cfg.gamma.empty() ? std::vector<double>(L, 1.0) : cfg.gamma;

    // Weight vectors c_k from the eigendecomposition of Gamma.
    std::vector<std::vector<double>> c;
    {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(toeplitz(gamma));
        const Eigen::VectorXd ev = es.eigenvalues();
        const double scale = ev.cwiseAbs().maxCoeff();
        if (ev.minCoeff() < -1e-10 * scale) {
            std::ostringstream msg;
            msg << "WeCAN: weight matrix is not positive semidefinite (smallest eigenvalue "
                << std::setprecision(6) << ev.minCoeff() << ")";
            throw std::invalid_argument(msg.str());
        }
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            if (ev(k) <= 1e-12 * scale) continue;
            std::vector<double> col(L);
            for (std::size_t l = 0; l < L; ++l)
                col[l] = std::sqrt(ev(k)) * es.eigenvectors()(static_cast<Eigen::Index>(l), k);
            c.push_back(std::move(col));
        }
    }
    const std::size_t K = c.size();

    CanResult res;
    for (std::size_t m = 0; m < M; ++m) {
        auto code = random_unimodular(L, cfg.seed * 1000003ULL + m);
        code.label = (cfg.gamma.empty() ? "can-" : "wecan-") + std::to_string(m + 1);
        res.codes.push_back(std::move(code));
    }
    double current = can_criterion(res.codes, gamma);
    res.criterion_trace.push_back(current);

    std::vector<std::vector<CVector>> spec(M, std::vector<CVector>(K));
    double relax = 1.0;
    Eigen::MatrixXcd Y(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(K));
    for (std::size_t cycle = 0; cycle < cfg.max_cycles; ++cycle) {
        for (std::size_t m = 0; m < M; ++m) {
            const CVector x = res.codes[m].samples();
            CVector xc(L);
            for (std::size_t k = 0; k < K; ++k) {
                for (std::size_t l = 0; l < L; ++l) xc[l] = x[l] * c[k][l];
                spec[m][k] = fft::forward(xc, F);
            }
        }
        for (std::size_t p = 0; p < F; ++p) {
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t k = 0; k < K; ++k)
                    Y(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k)) = spec[m][k][p];
            const Eigen::MatrixXcd U = polar_factor(Y);
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t k = 0; k < K; ++k)
                    spec[m][k][p] = U(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(k));
        }
        std::vector<std::vector<double>> target(M, std::vector<double>(L));
        for (std::size_t m = 0; m < M; ++m) {
            CVector acc(L, cplx{0.0, 0.0});
            for (std::size_t k = 0; k < K; ++k) {
                const CVector w = fft::inverse(spec[m][k]);
                for (std::size_t l = 0; l < L; ++l) acc[l] += c[k][l] * w[l];
            }
            for (std::size_t l = 0; l < L; ++l)
                target[m][l] = std::abs(acc[l]) > 0.0 ? std::arg(acc[l]) : res.codes[m].phases[l];
        }

        // Over-relaxed update: try `relax` times the cyclic move, halving until
        // the criterion does not increase. The factor grows while full steps pass.
        double frac = relax, moved = 0.0;
        bool accepted = false;
        std::vector<PolyphaseCode> trial = res.codes;
        double value = current;
        for (int h = 0; h < 30; ++h, frac *= 0.5) {
            moved = 0.0;
            for (std::size_t m = 0; m < M; ++m)
                for (std::size_t l = 0; l < L; ++l) {
                    const double d = std::remainder(target[m][l] - res.codes[m].phases[l], kTwoPi);
                    trial[m].phases[l] = wrap_phase(res.codes[m].phases[l] + frac * d);
                    moved = std::max(moved, std::abs(frac * d));
                }
            value = can_criterion(trial, gamma);
            if (value <= current) {
                accepted = true;
                break;
            }
        }
        relax = frac == relax ? std::min(2.0 * relax, kMaxRelax) : std::max(1.0, frac);
        if (!accepted) {
            res.warning = "stopped: no criterion decrease along the cyclic update";
            break;
        }
        res.codes = std::move(trial);
        current = value;
        res.criterion_trace.push_back(current);
        res.cycles = cycle + 1;
        if (moved < cfg.tolerance) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged && res.warning.empty())
        res.warning = "max_cycles reached before the phase movement fell below tolerance";
    return res;
}

CanResult can_design(const CanConfig& cfg) {
    CanConfig plain = cfg;
    plain.gamma.clear();
    return wecan_design(plain);
}

MatchedReport evaluate_set_matched(std::span<const PolyphaseCode> codes,
                                   std::size_t mainlobe_width) {
    if (codes.empty()) throw std::invalid_argument("evaluate_set_matched: empty set");
    check_mainlobe_width(mainlobe_width);
    MatchedReport rep;
    std::vector<CVector> x;
    for (const auto& c : codes) x.push_back(c.samples());
    for (std::size_t i = 0; i < codes.size(); ++i) {
        const double ref = std::abs(cross_correlate(x[i], x[i]).zero_lag());
        for (std::size_t k = 0; k < codes.size(); ++k) {
            MatchedReport::Entry e;
            e.filter_index = i;
            e.code_index = k;
            e.profile = cross_correlate(x[k], x[i]);
            e.profile.normalization = ref;
            if (i == k) {
                e.isl = isl(e.profile, mainlobe_width);
                e.psl_dbc = psl_dbc(e.profile, mainlobe_width);
            } else {
                e.isl = e.profile.energy();
                e.psl_dbc = peak_dbc(e.profile);
            }
            rep.entries.push_back(std::move(e));
        }
    }
    return rep;
}

void write_report_csv(const MatchedReport& report, std::ostream& out) {
    out << "pair,isl,psl_dbc\n" << std::setprecision(17);
    for (const auto& e : report.entries)
        out << e.filter_index + 1 << '-' << e.code_index + 1 << ',' << e.isl << ',' << e.psl_dbc << '\n';
}

}  // namespace polycode
