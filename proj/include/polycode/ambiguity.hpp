#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "polycode/filter_design.hpp"

namespace polycode {

enum class SurfaceKind { kAuto, kCross };

/// |chi(tau, f_d)| = |sum_n a(n) e^{j 2 pi f_d n / fs} conj(b(n + tau))| on a
/// delay x Doppler grid. Rows are Doppler bins, columns delays.
struct AmbiguitySurface {
    std::vector<std::vector<double>> magnitude;  // [doppler][delay]
    std::vector<std::ptrdiff_t> delays;
    std::vector<double> dopplers_hz;
    double sample_rate_hz = 0.0;
    double normalization = 0.0;  // magnitude mapped to 0 dBc
    SurfaceKind kind = SurfaceKind::kAuto;
    std::string code_label;
    std::string filter_label;

    std::vector<double> dbc_row(std::size_t doppler_index) const;  // floored at kDbFloor
};

// 0 .. 2000 Hz in 25 Hz steps.
std::vector<double> default_doppler_grid();

/// Modulate-then-correlate evaluation, one row per Doppler value (rows run
/// on up to `threads` workers, 0 = hardware concurrency). `normalization`
/// <= 0 selects |chi(0, 0)| of this code/filter pair.
AmbiguitySurface ambiguity(const PolyphaseCode& code, const MismatchedFilter& filter,
                           const std::vector<double>& dopplers_hz, double sample_rate_hz,
                           double normalization = 0.0, std::size_t threads = 0);

/// For a pair set: {auto 1, auto 2, cross 1, cross 2}. Cross surface i is the
/// other code through filter i, normalized to the auto mainlobe of pair i.
std::array<AmbiguitySurface, 4> auto_and_cross_surfaces(const CodeFilterSet& set,
                                                        const std::vector<double>& dopplers_hz,
                                                        double sample_rate_hz,
                                                        std::size_t threads = 0);

// dBc values of the f_d = 0 row; std::invalid_argument if 0 Hz is not on the grid.
std::vector<double> zero_doppler_cut(const AmbiguitySurface& surface);

// Long format with header "delay,doppler_hz,dbc".
void write_surface_csv(const AmbiguitySurface& surface, std::ostream& out);
// Reads the long format back; magnitudes are restored relative to a unit normalization.
AmbiguitySurface read_surface_csv(std::istream& in);

// Long-format cut with header "delay,dbc".
void write_cut_csv(const AmbiguitySurface& surface, std::ostream& out);

}  // namespace polycode
