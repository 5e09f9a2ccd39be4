#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "polycode/types.hpp"
#include "polycode/waveforms.hpp"

namespace polycode {

/// Complex correlation sequence over lags -(N-1) .. N-1.
///
/// `values[zero_lag_index + m]` holds c_m = sum_i a_i * conj(b_{i+m}) where
/// both operands have been zero-padded to the common span N. `normalization`
/// is the reference magnitude for the dBc view; it defaults to |c_0|.
struct CorrelationProfile {
    CVector values;
    std::size_t zero_lag_index = 0;
    double normalization = 0.0;

    std::size_t span() const { return zero_lag_index + 1; }
    std::ptrdiff_t lag_at(std::size_t index) const {
        return static_cast<std::ptrdiff_t>(index) - static_cast<std::ptrdiff_t>(zero_lag_index);
    }
    cplx at_lag(std::ptrdiff_t m) const;
    cplx zero_lag() const { return values[zero_lag_index]; }

    // 20*log10(|c_m| / normalization), floored at kDbFloor.
    std::vector<double> dbc() const;
    double energy() const;
};

// Offset of a length-`length` sequence centred inside a window of `span`
// samples. Shorter operands are always placed with this offset.
std::size_t centered_offset(std::size_t length, std::size_t span);

// Zero-pads `x` to `span` samples at the centred offset.
CVector center_pad(std::span<const cplx> x, std::size_t span);

// Aperiodic cross-correlation. Spans up to kDirectCorrelationLimit use the
// direct loop, longer ones the zero-padded FFT.
inline constexpr std::size_t kDirectCorrelationLimit = 64;
CorrelationProfile cross_correlate(std::span<const cplx> a, std::span<const cplx> b);
CorrelationProfile cross_correlate_direct(std::span<const cplx> a, std::span<const cplx> b);
CorrelationProfile cross_correlate_fft(std::span<const cplx> a, std::span<const cplx> b);

// Periodic (circular) autocorrelation r_k = sum_l a_l conj(a_{(l+k) mod L}).
CVector periodic_autocorrelation(std::span<const cplx> a);

// Sidelobe energy outside the centred mainlobe window of `mainlobe_width`
// lags. Throws std::invalid_argument for an even width.
double isl(const CorrelationProfile& profile, std::size_t mainlobe_width);

// Peak sidelobe outside the mainlobe, in dB relative to the normalization.
// Returns -infinity when every sidelobe is exactly zero.
double psl_dbc(const CorrelationProfile& profile, std::size_t mainlobe_width);

// Peak over every lag (cross-correlation has no mainlobe), dB re normalization.
double peak_dbc(const CorrelationProfile& profile);

/// Transmit convolution matrix of a code for a given filter length.
///
/// `full` is filter_length x (2*filter_length - 1) with full(j, m) equal to
/// the centred, padded code sample at j - m, so that conj(h)^T * full
/// reproduces cross_correlate(code, h). `sidelobe` drops the mainlobe_width
/// columns centred on zero lag.
struct ConvolutionMatrices {
    Eigen::MatrixXcd full;
    Eigen::MatrixXcd sidelobe;
    std::size_t mainlobe_width = 1;
    std::vector<std::ptrdiff_t> sidelobe_lags;
};

ConvolutionMatrices convolution_matrices(const PolyphaseCode& code, std::size_t filter_length,
                                         std::size_t mainlobe_width);

void check_mainlobe_width(std::size_t mainlobe_width);

// CSV with header "lag,re,im,magnitude_dbc".
void write_profile_csv(const CorrelationProfile& profile, std::ostream& out);
CorrelationProfile read_profile_csv(std::istream& in);

}  // namespace polycode
