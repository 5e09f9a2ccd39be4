#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "polycode/filter_design.hpp"
#include "polycode/waveforms.hpp"

namespace polycode {

/// Sidelobe error eps = sum_m w_m |c_m|^(2p) over the full lag axis of a
/// code/filter correlation. With symmetric weights this equals twice the
/// one-sided sum.
struct ErrorFunctionConfig {
    int p = 1;
    std::vector<double> weights;  // 2*filter_length - 1 entries; empty = uniform
    std::size_t mainlobe_width = 5;

    // Unit weights outside the mainlobe, zero inside.
    static ErrorFunctionConfig uniform(std::size_t filter_length, std::size_t mainlobe_width,
                                       int p = 1);
    // Fills empty weights and checks length, sign and the zero mainlobe.
    ErrorFunctionConfig resolved(std::size_t filter_length) const;
};

struct OptimizerConfig {
    std::size_t starts = 16;
    std::size_t max_iterations = 500;
    double step = 0.1;  // largest phase change (rad) of the first trial step
    double armijo_c = 1e-4;
    double tolerance = 1e-8;
    std::uint64_t seed = 1;
    std::size_t threads = 0;  // 0 = hardware concurrency
    // Curvature pairs kept for the limited-memory quasi-Newton direction;
    // 0 gives plain steepest descent with Barzilai-Borwein steps.
    std::size_t lbfgs_memory = 8;

    void validate() const;
};

struct StartRecord {
    std::size_t index = 0;
    std::vector<double> error_trace;  // objective after every accepted step, [0] = initial
    std::size_t iterations = 0;
    bool failed = false;
    std::string failure;
    double final_error = 0.0;
};

struct DesignResult {
    CodeFilterSet set;
    std::vector<StartRecord> starts;
    std::size_t best_start = 0;
    double wall_time_s = 0.0;
};

double weighted_error(const PolyphaseCode& code, const MismatchedFilter& filter,
                      const ErrorFunctionConfig& cfg);

/// d eps / d alpha_j for the phases of `code`:
///   2p * Im( conj(a_j) * sum_m beta_m c_m b_{j+m} ),  beta_m = w_m |c_m|^(2(p-1)).
std::vector<double> phase_gradient(const PolyphaseCode& code, const MismatchedFilter& filter,
                                   const ErrorFunctionConfig& cfg);

/// Filter-normalized joint objective
///   R = sum_i s_i^p [ eps_w(a_i, h_i) + sum_{k != i} eps_1(a_k, h_i) ],
///   s_i = L^2 / |c^{ii}_0|^2,
/// with its gradient in every code's phases. The cross terms use unit
/// weights on every lag. R is invariant to filter scaling; at p = 1 and the
/// joint min-ISL filters it equals joint_error and its gradient is the
/// gradient of the optimal-filter error.
struct JointObjective {
    double value = 0.0;
    std::vector<std::vector<double>> gradient;
};
JointObjective normalized_joint_objective(std::span<const PolyphaseCode> codes,
                                          std::span<const MismatchedFilter> filters,
                                          const ErrorFunctionConfig& cfg, bool with_gradient = true);

/// Alternates (a) joint min-ISL filters for the current codes and (b) one
/// limited-memory quasi-Newton step on every phase. The Armijo backtracking
/// test uses R at the filters redesigned for each trial point, so the
/// accepted sequence of the optimal-filter error never increases. Stops on
/// |dR| < tolerance * R, a failed line search or max_iterations.
DesignResult local_search(std::span<const PolyphaseCode> initial, std::size_t filter_length,
                          const ErrorFunctionConfig& cfg, const OptimizerConfig& opt);

// Latin hypercube over [0, 2pi)^dim: `count` points, one per stratum per axis.
std::vector<std::vector<double>> latin_hypercube(std::size_t count, std::size_t dim,
                                                 std::mt19937_64& rng);

// Starting phase sets used by global_search for start `index` < n_lhs.
std::vector<PolyphaseCode> scatter_start(std::size_t M, std::size_t L, std::uint64_t seed,
                                         std::size_t index);

/// Multistart search. The first starts - starts/4 starts (all of them when
/// starts < 4) come from Latin-hypercube blocks of 8 points; the rest perturb
/// the best of those by N(0, 0.5 rad) per phase. Every start is a pure
/// function of (seed, index), so the result does not depend on threads.
DesignResult global_search(std::size_t M, std::size_t L, std::size_t filter_length,
                           const ErrorFunctionConfig& cfg, const OptimizerConfig& opt);

}  // namespace polycode
