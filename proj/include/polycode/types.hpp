#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace polycode {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSpeedOfLight = 299792458.0;

// Floor applied when converting magnitudes to dB so that exact zeros stay finite.
inline constexpr double kDbFloor = -300.0;

// Raised when an input is well-formed but numerically meaningless
// (zero mainlobe, empty spectrum, ...).
class DegenerateInput : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double to_db20(double magnitude_ratio);
double to_db10(double power_ratio);

// Wraps an angle into [0, 2*pi).
double wrap_phase(double radians);

}  // namespace polycode
