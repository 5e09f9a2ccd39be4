#include "polycode/filter_design.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polycode {

std::size_t CodeFilterSet::code_length() const {
    return codes.empty() ? 0 : codes.front().size();
}

std::size_t CodeFilterSet::filter_length() const {
    return filters.empty() ? 0 : filters.front().size();
}

void CodeFilterSet::validate() const {
    if (codes.empty()) throw std::invalid_argument("code/filter set is empty");
    if (filters.size() != codes.size())
        throw std::invalid_argument("code/filter set has " + std::to_string(codes.size()) +
                                    " codes but " + std::to_string(filters.size()) + " filters");
    check_mainlobe_width(mainlobe_width);
    for (const auto& c : codes) {
        if (c.size() == 0 || c.size() != code_length())
            throw std::invalid_argument("code/filter set: codes must share one nonzero length");
    }
    for (const auto& f : filters) {
        if (f.size() != filter_length())
            throw std::invalid_argument("code/filter set: filters must share one length");
    }
    if (filter_length() < code_length())
        throw std::invalid_argument("code/filter set: filters shorter than codes");
}

cplx zero_lag_response(const PolyphaseCode& code, const MismatchedFilter& filter) {
    if (filter.size() < code.size())
        throw std::invalid_argument("zero_lag_response: filter shorter than code");
    const std::size_t off = centered_offset(code.size(), filter.size());
    cplx acc{0.0, 0.0};
    for (std::size_t l = 0; l < code.size(); ++l)
        acc += std::polar(1.0, code.phases[l]) * std::conj(filter.coefficients[off + l]);
    return acc;
}

double quadratic_form(const Eigen::MatrixXcd& gram, std::span<const cplx> h) {
    Eigen::Map<const Eigen::VectorXcd> v(h.data(), static_cast<Eigen::Index>(h.size()));
    return (v.adjoint() * gram * v)(0, 0).real();
}

namespace {

void check_design_inputs(std::span<const PolyphaseCode> codes, std::size_t filter_length,
                         std::size_t mainlobe_width) {
    check_mainlobe_width(mainlobe_width);
    if (codes.empty()) throw std::invalid_argument("filter design: no codes given");
    const std::size_t L = codes.front().size();
    if (L == 0) throw std::invalid_argument("filter design: empty code");
    for (const auto& c : codes)
        if (c.size() != L) throw std::invalid_argument("filter design: codes differ in length");
    if (filter_length < L) throw std::invalid_argument("filter design: filter shorter than code");
    if (mainlobe_width > 2 * filter_length - 1)
        throw std::invalid_argument("filter design: mainlobe wider than the lag axis");
}

// Adds sum over all lags of X[:,m] X[:,m]^H, which is the Hermitian Toeplitz
// matrix G(j, j') = rho(j - j') with rho(d) = sum_l a_{l+d} conj(a_l).
void add_full_gram(Eigen::MatrixXcd& gram, const CVector& a) {
    const auto L = static_cast<std::ptrdiff_t>(a.size());
    const auto N = static_cast<std::ptrdiff_t>(gram.rows());
    std::vector<cplx> rho(static_cast<std::size_t>(L), cplx{0.0, 0.0});
    for (std::ptrdiff_t d = 0; d < L; ++d)
        for (std::ptrdiff_t l = 0; l + d < L; ++l)
            rho[static_cast<std::size_t>(d)] +=
                a[static_cast<std::size_t>(l + d)] * std::conj(a[static_cast<std::size_t>(l)]);
    for (std::ptrdiff_t j = 0; j < N; ++j) {
        for (std::ptrdiff_t d = 0; d < L && j + d < N; ++d) {
            gram(j + d, j) += rho[static_cast<std::size_t>(d)];
            if (d != 0) gram(j, j + d) += std::conj(rho[static_cast<std::size_t>(d)]);
        }
    }
}

// Removes the mainlobe_width columns X[:,m], |m| <= width/2.
void remove_mainlobe(Eigen::MatrixXcd& gram, const CVector& a, std::size_t mainlobe_width) {
    const auto N = static_cast<std::ptrdiff_t>(gram.rows());
    const auto L = static_cast<std::ptrdiff_t>(a.size());
    const auto off = static_cast<std::ptrdiff_t>(centered_offset(a.size(), gram.rows()));
    const auto half = static_cast<std::ptrdiff_t>(mainlobe_width / 2);
    for (std::ptrdiff_t m = -half; m <= half; ++m) {
        // Column m holds a_l at row off + l + m.
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -(off + m));
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(L, N - off - m);
        for (std::ptrdiff_t l = lo; l < hi; ++l)
            for (std::ptrdiff_t k = lo; k < hi; ++k)
                gram(off + m + l, off + m + k) -=
                    a[static_cast<std::size_t>(l)] * std::conj(a[static_cast<std::size_t>(k)]);
    }
}

MismatchedFilter solve_constrained(const Eigen::MatrixXcd& gram, const PolyphaseCode& code) {
    const auto N = gram.rows();
    const std::size_t off = centered_offset(code.size(), static_cast<std::size_t>(N));
    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(N);
    for (std::size_t l = 0; l < code.size(); ++l)
        x(static_cast<Eigen::Index>(off + l)) = std::polar(1.0, code.phases[l]);

    double loading = 0.0;
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
        // An all-mainlobe window leaves G = 0; fall back to the code energy as scale.
        double scale = gram.trace().real() / static_cast<double>(N);
        if (!(scale > 0.0)) scale = x.squaredNorm() / static_cast<double>(N);
        const double base = 1e-10 * scale;
        for (loading = base; loading > 0.0 && loading < 1e300; loading *= 10.0) {
            Eigen::MatrixXcd loaded = gram;
            loaded.diagonal().array() += loading;
            llt.compute(loaded);
            if (llt.info() == Eigen::Success) break;
        }
        if (llt.info() != Eigen::Success)
            throw DegenerateInput("min-ISL filter: Gram matrix could not be factorized");
    }
    const Eigen::VectorXcd y = llt.solve(x);
    const double s = x.dot(y).real();  // x^H G^{-1} x
    if (!(s > 0.0) || !std::isfinite(s))
        throw DegenerateInput("min-ISL filter: degenerate normalization");
    const double L = static_cast<double>(code.size());
    const Eigen::VectorXcd h = (L / s) * y;

    MismatchedFilter f;
    f.coefficients.assign(h.data(), h.data() + N);
    f.designed_for = code.label;
    f.label = "filter-" + code.label;
    f.regularization_used = loading;
    f.achieved_error = quadratic_form(gram, f.coefficients);
    return f;
}

}  // namespace

Eigen::MatrixXcd sidelobe_gram(std::span<const PolyphaseCode> codes, std::size_t target,
                               std::size_t filter_length, std::size_t mainlobe_width,
                               CrossTermMainlobe cross) {
    check_design_inputs(codes, filter_length, mainlobe_width);
    if (target >= codes.size()) throw std::invalid_argument("sidelobe_gram: target out of range");
    const auto N = static_cast<Eigen::Index>(filter_length);
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(N, N);
    for (std::size_t k = 0; k < codes.size(); ++k) {
        const CVector a = codes[k].samples();
        add_full_gram(gram, a);
        if (k == target || cross == CrossTermMainlobe::kDelete)
            remove_mainlobe(gram, a, mainlobe_width);
    }
    return gram;
}

MismatchedFilter matched_filter(const PolyphaseCode& code) {
    MismatchedFilter f;
    f.coefficients = code.samples();
    f.designed_for = code.label;
    f.label = "matched-" + code.label;
    return f;
}

MismatchedFilter min_isl_filter(const PolyphaseCode& code, std::size_t filter_length,
                                std::size_t mainlobe_width) {
    return joint_min_isl_filter(std::span<const PolyphaseCode>(&code, 1), 0, filter_length,
                                mainlobe_width);
}

MismatchedFilter joint_min_isl_filter(std::span<const PolyphaseCode> codes, std::size_t target,
                                      std::size_t filter_length, std::size_t mainlobe_width,
                                      CrossTermMainlobe cross) {
    const auto gram = sidelobe_gram(codes, target, filter_length, mainlobe_width, cross);
    return solve_constrained(gram, codes[target]);
}

void balance_pairs(CodeFilterSet& set) {
    if (set.codes.size() < 2) return;
    const cplx reference = zero_lag_response(set.codes[0], set.filters[0]);
    for (std::size_t i = 1; i < set.codes.size(); ++i) {
        const cplx current = zero_lag_response(set.codes[i], set.filters[i]);
        if (std::abs(current) == 0.0) continue;
        // Scaling h by s scales the response by conj(s).
        const cplx s = std::conj(reference / current);
        for (auto& c : set.filters[i].coefficients) c *= s;
        set.filters[i].achieved_error *= std::norm(s);
    }
}

CodeFilterSet design_filter_set(std::span<const PolyphaseCode> codes, std::size_t filter_length,
                                std::size_t mainlobe_width, CrossTermMainlobe cross) {
    check_design_inputs(codes, filter_length, mainlobe_width);
    CodeFilterSet set;
    set.codes.assign(codes.begin(), codes.end());
    set.mainlobe_width = mainlobe_width;
    for (std::size_t i = 0; i < codes.size(); ++i)
        set.filters.push_back(
            joint_min_isl_filter(codes, i, filter_length, mainlobe_width, cross));
    balance_pairs(set);
    set.joint_error = joint_error(set, cross);
    return set;
}

double joint_error(const CodeFilterSet& set, CrossTermMainlobe cross) {
    set.validate();
    double total = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const CVector& h = set.filters[i].coefficients;
        for (std::size_t k = 0; k < set.size(); ++k) {
            const auto profile = cross_correlate(set.codes[k].samples(), h);
            if (k == i || cross == CrossTermMainlobe::kDelete)
                total += isl(profile, set.mainlobe_width);
            else
                total += profile.energy();
        }
    }
    return total;
}

}  // namespace polycode
