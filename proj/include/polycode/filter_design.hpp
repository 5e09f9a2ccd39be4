#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "polycode/correlation.hpp"
#include "polycode/waveforms.hpp"

namespace polycode {

/// Compression filter. For a code a, the compressed response is
/// cross_correlate(a, coefficients); min-ISL designs pin its zero lag to L.
struct MismatchedFilter {
    CVector coefficients;
    std::string label;
    std::string designed_for;
    double achieved_error = 0.0;
    double regularization_used = 0.0;

    std::size_t size() const { return coefficients.size(); }
};

/// M code/filter pairs; filter i is designed for code i.
struct CodeFilterSet {
    std::vector<PolyphaseCode> codes;
    std::vector<MismatchedFilter> filters;
    std::size_t mainlobe_width = 5;
    double joint_error = 0.0;

    std::size_t size() const { return codes.size(); }
    std::size_t code_length() const;
    std::size_t filter_length() const;

    // Checks M >= 1, equal code lengths, equal filter lengths, one filter per
    // code and filter_length >= code length. Throws std::invalid_argument.
    void validate() const;
};

// Whether cross-correlation terms also get their mainlobe window deleted.
// The default keeps every cross lag, since a cross response is unwanted at
// all delays.
enum class CrossTermMainlobe { kKeep, kDelete };

// Sum over codes of a_l * conj(h_l) at zero lag (centred alignment).
cplx zero_lag_response(const PolyphaseCode& code, const MismatchedFilter& filter);

// h^H G h.
double quadratic_form(const Eigen::MatrixXcd& gram, std::span<const cplx> h);

// Hermitian matrix G such that h^H G h is the sidelobe energy targeted by the
// filter for `codes[target]`: auto term with the mainlobe removed plus the
// cross terms of every other code.
Eigen::MatrixXcd sidelobe_gram(std::span<const PolyphaseCode> codes, std::size_t target,
                               std::size_t filter_length, std::size_t mainlobe_width,
                               CrossTermMainlobe cross = CrossTermMainlobe::kKeep);

MismatchedFilter matched_filter(const PolyphaseCode& code);

/// Minimum-ISL mismatched filter
///   h = L * G^{-1} x / (x^H G^{-1} x)
/// where x is the padded code and G the mainlobe-deleted Gram matrix. The
/// zero-lag response equals L and achieved_error = h^H G h. If the Cholesky
/// factorization fails, G is diagonally loaded with 1e-10 * trace / N (grown
/// tenfold until it factors) and the load is reported in regularization_used.
MismatchedFilter min_isl_filter(const PolyphaseCode& code, std::size_t filter_length,
                                std::size_t mainlobe_width);

MismatchedFilter joint_min_isl_filter(std::span<const PolyphaseCode> codes, std::size_t target,
                                      std::size_t filter_length, std::size_t mainlobe_width,
                                      CrossTermMainlobe cross = CrossTermMainlobe::kKeep);

// Designs every filter of the set, balances the pairs and fills joint_error.
CodeFilterSet design_filter_set(std::span<const PolyphaseCode> codes, std::size_t filter_length,
                                std::size_t mainlobe_width,
                                CrossTermMainlobe cross = CrossTermMainlobe::kKeep);

// Rescales filters 2..M so every pair's zero-lag response equals pair 1's.
void balance_pairs(CodeFilterSet& set);

// Sum over filters of auto sidelobe energy (mainlobe deleted) plus the
// energy at every lag of each other code through that filter.
double joint_error(const CodeFilterSet& set, CrossTermMainlobe cross = CrossTermMainlobe::kKeep);

}  // namespace polycode
