#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "polycode/correlation.hpp"
#include "polycode/waveforms.hpp"

namespace polycode {

struct CanConfig {
    std::size_t M = 2;
    std::size_t L = 256;
    std::vector<double> gamma;  // gamma_0 .. gamma_{L-1}; empty = all ones (CAN)
    std::size_t max_cycles = 2000;
    double tolerance = 1e-6;    // rad, largest per-element phase movement
    std::uint64_t seed = 1;

    void validate() const;
};

struct CanResult {
    std::vector<PolyphaseCode> codes;
    std::vector<double> criterion_trace;  // [0] = initial, then one entry per cycle
    std::size_t cycles = 0;
    bool converged = false;  // false: max_cycles hit or no further decrease possible
    std::string warning;
};

/// gamma_0^2 ||R_0 - L I||^2 + 2 sum_{n>=1} gamma_n^2 ||R_n||^2, where R_n
/// holds the matched correlations of every code pair at lag n. With empty
/// gamma this is the unweighted criterion.
double can_criterion(std::span<const PolyphaseCode> codes, std::span<const double> gamma = {});

// Unit weights on lags 1..P-1, zero beyond; gamma_0 is the smallest value >= 1
// that keeps the Toeplitz weight matrix positive semidefinite.
std::vector<double> banded_gamma(std::size_t L, std::size_t P);

/// Cyclic spectral algorithm: with Gamma = sum_k c_k c_k^T (eigenvectors
/// scaled by sqrt(lambda_k)), each cycle takes the polar factor of the M x K
/// matrix of 2L-point spectra of x_m * c_k at every frequency, transforms
/// back and projects onto unimodular sequences. A cycle that would raise
/// the criterion is pulled back toward the previous iterate by phase
/// interpolation; if that fails the run stops with a warning.
CanResult wecan_design(const CanConfig& cfg);

// gamma = 1 (rank-one weight matrix, c = ones).
CanResult can_design(const CanConfig& cfg);

struct MatchedReport {
    struct Entry {
        std::size_t filter_index;  // matched filter of code i ...
        std::size_t code_index;    // ... applied to code k
        CorrelationProfile profile;
        double isl = 0.0;          // autos: outside the mainlobe; cross: all lags
        double psl_dbc = 0.0;      // relative to the auto mainlobe L
    };
    std::vector<Entry> entries;
};

// All M^2 matched-filter correlations with sidelobe figures.
MatchedReport evaluate_set_matched(std::span<const PolyphaseCode> codes,
                                   std::size_t mainlobe_width = 1);

// CSV with header "pair,isl,psl_dbc"; pair is "<filter>-<code>", 1-based.
void write_report_csv(const MatchedReport& report, std::ostream& out);

}  // namespace polycode
