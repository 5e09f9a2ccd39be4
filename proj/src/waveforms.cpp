#include "polycode/waveforms.hpp"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace polycode {

CVector PolyphaseCode::samples() const {
    CVector out(phases.size());
    for (std::size_t l = 0; l < phases.size(); ++l) out[l] = std::polar(1.0, phases[l]);
    return out;
}

PolyphaseCode PolyphaseCode::from_samples(const CVector& samples, std::string label) {
    PolyphaseCode code;
    code.label = std::move(label);
    code.phases.reserve(samples.size());
    for (const auto& s : samples) code.phases.push_back(wrap_phase(std::arg(s)));
    return code;
}

PolyphaseCode ChirpWaveform::to_code(std::string label) const {
    return PolyphaseCode::from_samples(samples, std::move(label));
}

PolyphaseCode random_unimodular(std::size_t length, std::uint64_t seed) {
    if (length == 0) throw std::invalid_argument("random_unimodular: length must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
    PolyphaseCode code;
    code.label = "random-" + std::to_string(seed);
    code.phases.resize(length);
    for (auto& p : code.phases) p = uniform(rng);
    return code;
}

std::vector<std::vector<int>> hadamard_matrix(std::size_t order) {
    if (order < 1 || (order & (order - 1)) != 0)
        throw std::invalid_argument("hadamard_matrix: order must be a power of two, got " +
                                    std::to_string(order));
    std::vector<std::vector<int>> m{{1}};
    for (std::size_t n = 1; n < order; n *= 2) {
        std::vector<std::vector<int>> next(2 * n, std::vector<int>(2 * n));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                next[i][j] = m[i][j];
                next[i][j + n] = m[i][j];
                next[i + n][j] = m[i][j];
                next[i + n][j + n] = -m[i][j];
            }
        }
        m = std::move(next);
    }
    return m;
}

PolyphaseCode hadamard_code(std::size_t order, std::size_t row) {
    auto m = hadamard_matrix(order);
    if (row >= order)
        throw std::invalid_argument("hadamard_code: row " + std::to_string(row) +
                                    " out of range for order " + std::to_string(order));
    PolyphaseCode code;
    code.label = "hadamard-" + std::to_string(order) + "-" + std::to_string(row);
    code.phases.reserve(order);
    for (int v : m[row]) code.phases.push_back(v > 0 ? 0.0 : kPi);
    return code;
}

std::vector<double> chu_increments(std::size_t length, int n) {
    if (length == 0) throw std::invalid_argument("chu_increments: length must be >= 1");
    std::vector<double> phi(length);
    const double L = static_cast<double>(length);
    for (std::size_t l = 0; l < length; ++l) {
        const double ld = static_cast<double>(l);
        phi[l] = static_cast<double>(n) * kPi * ld * ld / L;
    }
    return phi;
}

PolyphaseCode chu_code(std::size_t length, int n) {
    if (length == 0) throw std::invalid_argument("chu_code: length must be >= 1");
    PolyphaseCode code;
    code.label = "chu-" + std::to_string(length) + "-" + std::to_string(n);
    code.phases.resize(length);
    // Reduce the quadratic index modulo 2L before scaling to keep the phase
    // accurate for long codes.
    const auto L2 = static_cast<long long>(2 * length);
    for (std::size_t l = 0; l < length; ++l) {
        const auto li = static_cast<long long>(l);
        long long q = (length % 2 == 0) ? (li * li) % L2 : (li * (li + 1)) % L2;
        q = (q * (static_cast<long long>(n) % L2 + L2)) % L2;
        code.phases[l] = wrap_phase(kPi * static_cast<double>(q) / static_cast<double>(length));
    }
    return code;
}

std::vector<double> chu_switching_phases(std::size_t length, int n) {
    auto phi = chu_increments(length, n);
    std::vector<double> psi(length, 0.0);
    double acc = 0.0;
    for (std::size_t l = 0; l < length; ++l) {
        acc -= phi[l];
        psi[l] = acc;
    }
    return psi;
}

ChirpWaveform chirp(double bandwidth_hz, double pulse_width_s, double sample_rate_hz) {
    if (!(bandwidth_hz > 0.0) || !(pulse_width_s > 0.0) || !(sample_rate_hz > 0.0))
        throw std::invalid_argument("chirp: bandwidth, pulse width and sample rate must be positive");
    if (bandwidth_hz * pulse_width_s < 1.0)
        throw std::invalid_argument("chirp: time-bandwidth product must be >= 1");
    if (sample_rate_hz < bandwidth_hz)
        throw std::invalid_argument("chirp: sample rate must be >= bandwidth");
    const auto length = static_cast<std::size_t>(std::llround(pulse_width_s * sample_rate_hz));
    if (length == 0) throw std::invalid_argument("chirp: pulse shorter than one sample");

    ChirpWaveform w;
    w.bandwidth_hz = bandwidth_hz;
    w.pulse_width_s = pulse_width_s;
    w.sample_rate_hz = sample_rate_hz;
    w.samples.resize(length);
    const double rate = bandwidth_hz / pulse_width_s;
    const double centre = 0.5 * static_cast<double>(length - 1);
    for (std::size_t l = 0; l < length; ++l) {
        const double t = (static_cast<double>(l) - centre) / sample_rate_hz;
        w.samples[l] = std::polar(1.0, kPi * rate * t * t);
    }
    return w;
}

}  // namespace polycode
