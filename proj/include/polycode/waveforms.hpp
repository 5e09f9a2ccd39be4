#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "polycode/types.hpp"

namespace polycode {

/// Unimodular sequence a_l = exp(j * phases[l]).
///
/// Phases are the canonical storage, so |a_l| = 1 holds by construction and
/// optimizers can move freely in phase space without a modulus constraint.
struct PolyphaseCode {
    std::vector<double> phases;
    std::string label;

    std::size_t size() const { return phases.size(); }
    CVector samples() const;

    static PolyphaseCode from_samples(const CVector& samples, std::string label);
};

/// Sampled linear-FM pulse.
struct ChirpWaveform {
    CVector samples;
    double bandwidth_hz = 0.0;
    double pulse_width_s = 0.0;
    double sample_rate_hz = 0.0;

    PolyphaseCode to_code(std::string label = "chirp") const;
};

// Phases i.i.d. uniform on [0, 2*pi); identical output for identical seed.
PolyphaseCode random_unimodular(std::size_t length, std::uint64_t seed);

// Sylvester construction: M_2 = [[1,1],[1,-1]], M_L = [[M, M], [M, -M]].
std::vector<std::vector<int>> hadamard_matrix(std::size_t order);
PolyphaseCode hadamard_code(std::size_t order, std::size_t row);

// Sub-pulse phase increments n*pi*l^2/L, l = 0..L-1.
std::vector<double> chu_increments(std::size_t length, int n);

// Chu sequence exp(j*pi*n*l^2/L) (even L) or exp(j*pi*n*l*(l+1)/L) (odd L).
// Zero periodic autocorrelation off lag 0 when gcd(n, L) = 1.
PolyphaseCode chu_code(std::size_t length, int n);

// Cumulative switching phases psi_l = psi_{l-1} - phi_l with psi_0 = 0.
std::vector<double> chu_switching_phases(std::size_t length, int n);

// Centered LFM: exp(j*pi*(B/T)*t^2), t on [-T/2, T/2], L = round(T * fs).
ChirpWaveform chirp(double bandwidth_hz, double pulse_width_s, double sample_rate_hz);

}  // namespace polycode
