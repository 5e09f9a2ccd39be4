#include "polycode/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "polycode/correlation.hpp"

namespace polycode {

ErrorFunctionConfig ErrorFunctionConfig::uniform(std::size_t filter_length,
                                                 std::size_t mainlobe_width, int p) {
    check_mainlobe_width(mainlobe_width);
    ErrorFunctionConfig cfg;
    cfg.p = p;
    cfg.mainlobe_width = mainlobe_width;
    const std::size_t n = 2 * filter_length - 1;
    cfg.weights.assign(n, 1.0);
    const std::size_t zero = filter_length - 1, half = mainlobe_width / 2;
    for (std::size_t i = zero - std::min(zero, half); i <= std::min(n - 1, zero + half); ++i)
        cfg.weights[i] = 0.0;
    return cfg;
}

ErrorFunctionConfig ErrorFunctionConfig::resolved(std::size_t filter_length) const {
    if (p < 1) throw std::invalid_argument("error function: p must be a positive integer");
    if (weights.empty()) return uniform(filter_length, mainlobe_width, p);
    check_mainlobe_width(mainlobe_width);
    if (weights.size() != 2 * filter_length - 1)
        throw std::invalid_argument("error function: expected " +
                                    std::to_string(2 * filter_length - 1) + " weights, got " +
                                    std::to_string(weights.size()));
    const std::size_t zero = filter_length - 1, half = mainlobe_width / 2;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!(weights[i] >= 0.0) || !std::isfinite(weights[i]))
            throw std::invalid_argument("error function: weights must be finite and nonnegative");
        const std::size_t d = i > zero ? i - zero : zero - i;
        if (d <= half && weights[i] != 0.0)
            throw std::invalid_argument("error function: weights inside the mainlobe must be 0");
    }
    return *this;
}

void OptimizerConfig::validate() const {
    if (starts < 1) throw std::invalid_argument("optimizer: starts must be >= 1");
    if (!(tolerance > 0.0)) throw std::invalid_argument("optimizer: tolerance must be > 0");
    if (!(step > 0.0)) throw std::invalid_argument("optimizer: step must be > 0");
    if (!(armijo_c > 0.0 && armijo_c < 1.0))
        throw std::invalid_argument("optimizer: armijo_c must lie in (0, 1)");
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

// sum_m w_m |c_m|^(2p); with `grad` set, adds scale * d/d alpha into it.
double error_terms(const CVector& a, const CVector& b, std::span<const double> weights, int p,
                   double scale, double* grad) {
    const auto profile = cross_correlate(a, b);
    const std::size_t n = profile.values.size();
    if (weights.size() != n) throw std::invalid_argument("error function: weight length mismatch");
    std::vector<cplx> bc(n);
    double eps = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mag2 = std::norm(profile.values[i]);
        const double beta = weights[i] * ipow(mag2, p - 1);
        eps += beta * mag2;
        bc[i] = beta * profile.values[i];
    }
    if (grad == nullptr) return eps;

    const auto N = static_cast<std::ptrdiff_t>(profile.zero_lag_index + 1);
    const auto off = static_cast<std::ptrdiff_t>(centered_offset(a.size(), static_cast<std::size_t>(N)));
    const auto boff = static_cast<std::ptrdiff_t>(centered_offset(b.size(), static_cast<std::size_t>(N)));
    const auto zero = static_cast<std::ptrdiff_t>(profile.zero_lag_index);
    for (std::size_t j = 0; j < a.size(); ++j) {
        // Padded b index of sample j at lag m is pos + m.
        const std::ptrdiff_t pos = off + static_cast<std::ptrdiff_t>(j) - boff;
        const std::ptrdiff_t m_lo = -pos, m_hi = static_cast<std::ptrdiff_t>(b.size()) - 1 - pos;
        cplx acc{0.0, 0.0};
        for (std::ptrdiff_t m = m_lo; m <= m_hi; ++m)
            acc += bc[static_cast<std::size_t>(zero + m)] * b[static_cast<std::size_t>(pos + m)];
        grad[j] += scale * 2.0 * p * (std::conj(a[j]) * acc).imag();
    }
    return eps;
}

std::vector<double> unit_weights(std::size_t filter_length) {
    return std::vector<double>(2 * filter_length - 1, 1.0);
}

}  // namespace

double weighted_error(const PolyphaseCode& code, const MismatchedFilter& filter,
                      const ErrorFunctionConfig& cfg) {
    const auto c = cfg.resolved(filter.size());
    return error_terms(code.samples(), filter.coefficients, c.weights, c.p, 1.0, nullptr);
}

std::vector<double> phase_gradient(const PolyphaseCode& code, const MismatchedFilter& filter,
                                   const ErrorFunctionConfig& cfg) {
    const auto c = cfg.resolved(filter.size());
    std::vector<double> g(code.size(), 0.0);
    error_terms(code.samples(), filter.coefficients, c.weights, c.p, 1.0, g.data());
    return g;
}

JointObjective normalized_joint_objective(std::span<const PolyphaseCode> codes,
                                          std::span<const MismatchedFilter> filters,
                                          const ErrorFunctionConfig& cfg, bool with_gradient) {
    if (codes.empty() || codes.size() != filters.size())
        throw std::invalid_argument("joint objective: need one filter per code");
    const std::size_t M = codes.size(), Nf = filters.front().size();
    const auto c = cfg.resolved(Nf);
    const auto ones = unit_weights(Nf);
    std::vector<CVector> samples;
    for (const auto& code : codes) samples.push_back(code.samples());
    const double L = static_cast<double>(codes.front().size());

    JointObjective out;
    if (with_gradient) out.gradient.assign(M, std::vector<double>(codes.front().size(), 0.0));
    std::vector<double> auto_grad, zero_grad, cross_grad;
    std::vector<double> zero_weight(2 * Nf - 1, 0.0);
    zero_weight[Nf - 1] = 1.0;
    for (std::size_t i = 0; i < M; ++i) {
        const CVector& h = filters[i].coefficients;
        if (h.size() != Nf) throw std::invalid_argument("joint objective: filter lengths differ");
        auto_grad.assign(samples[i].size(), 0.0);
        zero_grad.assign(samples[i].size(), 0.0);
        double E = error_terms(samples[i], h, c.weights, c.p, 1.0,
                               with_gradient ? auto_grad.data() : nullptr);
        const double c0 = error_terms(samples[i], h, zero_weight, 1, 1.0,
                                      with_gradient ? zero_grad.data() : nullptr);
        if (!(c0 > 0.0)) {
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        const double sp = ipow(L * L / c0, c.p);
        std::vector<std::vector<double>> cross(M);
        for (std::size_t k = 0; k < M; ++k) {
            if (k == i) continue;
            if (with_gradient) cross[k].assign(samples[k].size(), 0.0);
            E += error_terms(samples[k], h, ones, c.p, 1.0,
                             with_gradient ? cross[k].data() : nullptr);
        }
        out.value += sp * E;
        if (!with_gradient) continue;
        // d(s^p)/d alpha = -p s^p / |c0|^2 * d|c0|^2/d alpha
        const double zscale = -c.p * sp * E / c0;
        for (std::size_t j = 0; j < auto_grad.size(); ++j)
            out.gradient[i][j] += sp * auto_grad[j] + zscale * zero_grad[j];
        for (std::size_t k = 0; k < M; ++k)
            for (std::size_t j = 0; j < cross[k].size(); ++j) out.gradient[k][j] += sp * cross[k][j];
    }
    return out;
}

DesignResult local_search(std::span<const PolyphaseCode> initial, std::size_t filter_length,
                          const ErrorFunctionConfig& cfg, const OptimizerConfig& opt) {
    opt.validate();
    const auto c = cfg.resolved(filter_length);
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<PolyphaseCode> codes(initial.begin(), initial.end());
    const std::size_t M = codes.size();

    DesignResult result;
    StartRecord& rec = result.starts.emplace_back();

    CodeFilterSet set = design_filter_set(codes, filter_length, c.mainlobe_width);
    JointObjective obj = normalized_joint_objective(set.codes, set.filters, c);
    auto finish = [&]() {
        rec.final_error = obj.value;
        result.set = std::move(set);
        result.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
    };
    auto fail = [&](const std::string& why) {
        rec.failed = true;
        rec.failure = why;
        return finish();
    };
    if (!std::isfinite(obj.value)) return fail("non-finite initial error");
    rec.error_trace.push_back(obj.value);

    // Curvature pairs (s, y) for the limited-memory direction, oldest first.
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> prev_grad, last_move;
    double bb_step = 0.0;
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        std::vector<double> g;
        for (const auto& gi : obj.gradient) g.insert(g.end(), gi.begin(), gi.end());
        double gmax = 0.0;
        for (double v : g) gmax = std::max(gmax, std::abs(v));
        if (gmax == 0.0) break;

        if (!prev_grad.empty()) {
            std::vector<double> y(g.size());
            double sy = 0.0, ss = 0.0;
            for (std::size_t n = 0; n < g.size(); ++n) {
                y[n] = g[n] - prev_grad[n];
                sy += last_move[n] * y[n];
                ss += last_move[n] * last_move[n];
            }
            bb_step = sy > 0.0 ? ss / sy : 0.0;
            if (opt.lbfgs_memory > 0 && sy > 1e-12 * ss) {
                s_hist.push_back(last_move);
                y_hist.push_back(std::move(y));
                if (s_hist.size() > opt.lbfgs_memory) {
                    s_hist.erase(s_hist.begin());
                    y_hist.erase(y_hist.begin());
                }
            }
        }

        // Search direction d and trial step t.
        std::vector<double> d(g.size());
        double t = 1.0;
        if (!s_hist.empty()) {
            std::vector<double> q = g, alpha(s_hist.size()), rho(s_hist.size());
            for (std::size_t k = s_hist.size(); k-- > 0;) {
                rho[k] = 1.0 / dot(s_hist[k], y_hist[k]);
                alpha[k] = rho[k] * dot(s_hist[k], q);
                for (std::size_t n = 0; n < q.size(); ++n) q[n] -= alpha[k] * y_hist[k][n];
            }
            const double gamma = dot(s_hist.back(), y_hist.back()) / dot(y_hist.back(), y_hist.back());
            for (double& v : q) v *= gamma;
            for (std::size_t k = 0; k < s_hist.size(); ++k) {
                const double b = rho[k] * dot(y_hist[k], q);
                for (std::size_t n = 0; n < q.size(); ++n) q[n] += (alpha[k] - b) * s_hist[k][n];
            }
            for (std::size_t n = 0; n < q.size(); ++n) d[n] = -q[n];
            if (dot(d, g) >= 0.0) {  // not a descent direction: restart from the gradient
                s_hist.clear();
                y_hist.clear();
                for (std::size_t n = 0; n < g.size(); ++n) d[n] = -g[n];
                t = opt.step / gmax;
            }
        } else {
            for (std::size_t n = 0; n < g.size(); ++n) d[n] = -g[n];
            t = bb_step > 0.0 ? bb_step : opt.step / gmax;
        }
        double dmax = 0.0;
        for (double v : d) dmax = std::max(dmax, std::abs(v));
        t = std::min(t, 0.5 * kPi / dmax);
        const double slope = dot(d, g);  // < 0

        bool accepted = false;
        CodeFilterSet trial_set;
        JointObjective trial_obj;
        std::vector<PolyphaseCode> trial = codes;
        for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
            std::size_t n = 0;
            for (std::size_t i = 0; i < M; ++i)
                for (std::size_t j = 0; j < codes[i].size(); ++j, ++n)
                    trial[i].phases[j] = wrap_phase(codes[i].phases[j] + t * d[n]);
            trial_set = design_filter_set(trial, filter_length, c.mainlobe_width);
            trial_obj = normalized_joint_objective(trial_set.codes, trial_set.filters, c);
            if (!std::isfinite(trial_obj.value)) return fail("non-finite error in line search");
            accepted = trial_obj.value <= obj.value + opt.armijo_c * t * slope;
            if (accepted) break;
        }
        if (!accepted) break;

        last_move.assign(d.size(), 0.0);
        for (std::size_t n = 0; n < d.size(); ++n) last_move[n] = t * d[n];
        prev_grad = std::move(g);
        const double drop = obj.value - trial_obj.value;
        codes = std::move(trial);
        set = std::move(trial_set);
        obj = std::move(trial_obj);
        rec.error_trace.push_back(obj.value);
        rec.iterations = it + 1;
        if (drop < opt.tolerance * obj.value) break;
    }
    return finish();
}

std::vector<std::vector<double>> latin_hypercube(std::size_t count, std::size_t dim,
                                                 std::mt19937_64& rng) {
    std::vector<std::vector<double>> pts(count, std::vector<double>(dim));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<std::size_t> perm(count);
    for (std::size_t d = 0; d < dim; ++d) {
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < count; ++i)
            pts[i][d] = kTwoPi * (static_cast<double>(perm[i]) + u(rng)) / static_cast<double>(count);
    }
    return pts;
}

namespace {

constexpr std::size_t kBlock = 8;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b)};
    return std::mt19937_64(seq);
}

std::vector<PolyphaseCode> split(const std::vector<double>& flat, std::size_t M, std::size_t L,
                                 const std::string& tag) {
    std::vector<PolyphaseCode> codes(M);
    for (std::size_t i = 0; i < M; ++i) {
        codes[i].phases.assign(flat.begin() + static_cast<std::ptrdiff_t>(i * L),
                               flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * L));
        codes[i].label = tag + "-" + std::to_string(i + 1);
    }
    return codes;
}

template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t threads, Fn&& fn) {
    if (begin >= end) return;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, end - begin);
    std::atomic<std::size_t> next{begin};
    auto worker = [&]() {
        for (std::size_t i = next++; i < end; i = next++) fn(i);
    };
    if (threads == 1) {
        worker();
        return;
    }
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

bool better(const DesignResult& a, const DesignResult& b) {
    return a.starts.front().final_error < b.starts.front().final_error;
}

}  // namespace

std::vector<PolyphaseCode> scatter_start(std::size_t M, std::size_t L, std::uint64_t seed,
                                         std::size_t index) {
    auto rng = stream(seed, index / kBlock, 0x5ca7);
    const auto block = latin_hypercube(kBlock, M * L, rng);
    return split(block[index % kBlock], M, L, "scatter-" + std::to_string(index));
}

DesignResult global_search(std::size_t M, std::size_t L, std::size_t filter_length,
                           const ErrorFunctionConfig& cfg, const OptimizerConfig& opt) {
    opt.validate();
    if (M < 1 || L < 1) throw std::invalid_argument("global search: M and L must be >= 1");
    const auto c = cfg.resolved(filter_length);
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n_lhs = opt.starts < 4 ? opt.starts : opt.starts - opt.starts / 4;

    std::vector<DesignResult> runs(opt.starts);
    auto run = [&](std::size_t index, const std::vector<PolyphaseCode>& init) {
        try {
            runs[index] = local_search(init, filter_length, c, opt);
        } catch (const std::exception& e) {
            runs[index] = DesignResult{};
            runs[index].starts.emplace_back();
            runs[index].starts.front().failed = true;
            runs[index].starts.front().failure = e.what();
        }
        runs[index].starts.front().index = index;
    };

    parallel_for(0, n_lhs, opt.threads,
                 [&](std::size_t i) { run(i, scatter_start(M, L, opt.seed, i)); });

    auto best_of = [&](std::size_t end) -> const DesignResult* {
        const DesignResult* best = nullptr;
        for (std::size_t i = 0; i < end; ++i) {
            const auto& r = runs[i];
            if (r.starts.front().failed) continue;
            if (best == nullptr || better(r, *best)) best = &r;
        }
        return best;
    };

    const DesignResult* incumbent = best_of(n_lhs);
    parallel_for(n_lhs, opt.starts, opt.threads, [&](std::size_t i) {
        if (incumbent == nullptr) {
            run(i, scatter_start(M, L, opt.seed, i));
            return;
        }
        auto rng = stream(opt.seed, i, 0xbe57);
        std::normal_distribution<double> noise(0.0, 0.5);
        auto init = incumbent->set.codes;
        for (std::size_t k = 0; k < init.size(); ++k) {
            for (double& p : init[k].phases) p = wrap_phase(p + noise(rng));
            init[k].label = "perturb-" + std::to_string(i) + "-" + std::to_string(k + 1);
        }
        run(i, init);
    });

    const DesignResult* best = best_of(opt.starts);
    if (best == nullptr) {
        std::ostringstream msg;
        msg << "global search: all " << opt.starts << " starts failed";
        for (const auto& r : runs)
            msg << "; start " << r.starts.front().index << ": " << r.starts.front().failure;
        throw std::runtime_error(msg.str());
    }

    DesignResult out;
    out.best_start = best->starts.front().index;
    out.set = best->set;
    for (std::size_t i = 0; i < out.set.size(); ++i) {
        out.set.codes[i].label = "C" + std::to_string(i + 1);
        out.set.filters[i].label = "P" + std::to_string(i + 1);
        out.set.filters[i].designed_for = out.set.codes[i].label;
    }
    for (auto& r : runs) out.starts.push_back(std::move(r.starts.front()));
    out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace polycode
