#include "polycode/echo_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "polycode/correlation.hpp"
#include "polycode/fft.hpp"

namespace polycode {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

void check_pair(const CodeFilterSet& set) {
    set.validate();
    if (set.size() != 2)
        throw std::invalid_argument("two-trip simulation needs a pair of codes (M = 2)");
}

// Periodic von Hann taper.
std::vector<double> taper(std::size_t K, SpectrumWindow window) {
    std::vector<double> w(K, 1.0);
    if (window == SpectrumWindow::kVonHann)
        for (std::size_t k = 0; k < K; ++k)
            w[k] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(k) / static_cast<double>(K));
    return w;
}

}  // namespace

std::size_t RadarParams::samples_per_pri() const {
    return static_cast<std::size_t>(std::llround(pri_s * sample_rate_hz));
}

void RadarParams::validate() const {
    if (!(frequency_hz > 0.0) || !(pri_s > 0.0) || !(sample_rate_hz > 0.0) || !(pulse_width_s > 0.0))
        throw std::invalid_argument("radar: frequency, pri, sample rate and pulse width must be > 0");
    if (!(pri_s > pulse_width_s)) throw std::invalid_argument("radar: pri must exceed the pulse width");
}

void ImpairmentConfig::validate() const {
    if (!(phase_jitter_deg >= 0.0) || !std::isfinite(phase_jitter_deg))
        throw std::invalid_argument("impairments: phase jitter must be finite and >= 0");
    if (std::isnan(snr_db)) throw std::invalid_argument("impairments: snr is NaN");
    if (!std::isfinite(system_phase_rad)) throw std::invalid_argument("impairments: system phase must be finite");
}

CVector gaussian_echo_series(std::size_t K, double velocity_mps, double spectral_width_mps,
                             double power_db, const RadarParams& radar, std::uint64_t seed) {
    radar.validate();
    if (K < 2) throw std::invalid_argument("echo series: need at least 2 pulses");
    if (!(spectral_width_mps > 0.0))
        throw std::invalid_argument("echo series: spectral width must be > 0");
    if (std::abs(velocity_mps) > radar.nyquist_velocity_mps())
        throw std::invalid_argument("echo series: velocity beyond the Nyquist interval");

    const double lambda = radar.wavelength_m(), prf = 1.0 / radar.pri_s;
    const double fd = 2.0 * velocity_mps / lambda, sf = 2.0 * spectral_width_mps / lambda;
    std::vector<double> S(K, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double f = prf * static_cast<double>(k) / static_cast<double>(K);
        for (int alias = -3; alias <= 3; ++alias) {
            const double d = (f - fd - alias * prf) / sf;
            S[k] += std::exp(-0.5 * d * d);
        }
        total += S[k];
    }
    if (!(total > 0.0)) {  // narrower than a bin: all power in the nearest one
        const double pos = std::fmod(std::fmod(fd / prf, 1.0) + 1.0, 1.0) * static_cast<double>(K);
        S.assign(K, 0.0);
        S[static_cast<std::size_t>(std::llround(pos)) % K] = 1.0;
        total = 1.0;
    }

    const double P = std::pow(10.0, power_db / 10.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CVector bins(K);
    for (std::size_t k = 0; k < K; ++k) bins[k] = std::sqrt(P * S[k] / total) * cplx{g(rng), g(rng)};
    CVector x = fft::inverse(bins);
    for (auto& v : x) v *= static_cast<double>(K);
    return x;
}

namespace {

// Per-sample jitter phasors (empty when there is no rotation) and AWGN (empty
// when noise is off), drawn in a fixed order from one stream.
struct ImpairmentDraws {
    CVector phasor;
    CVector noise;
};

ImpairmentDraws impairment_draws(std::size_t n, const ImpairmentConfig& imp, std::uint64_t seed,
                                 double reference_power) {
    ImpairmentDraws d;
    std::mt19937_64 rng(seed);
    if (imp.phase_jitter_deg > 0.0 || imp.system_phase_rad != 0.0) {
        std::normal_distribution<double> phi(0.0, imp.phase_jitter_deg * kPi / 180.0);
        d.phasor.resize(n);
        for (auto& v : d.phasor) {
            const double jitter = imp.phase_jitter_deg > 0.0 ? phi(rng) : 0.0;
            v = std::polar(1.0, jitter + imp.system_phase_rad);
        }
    }
    if (std::isfinite(imp.snr_db) && n > 0) {
        std::normal_distribution<double> w(0.0, std::sqrt(0.5 * reference_power * std::pow(10.0, -imp.snr_db / 10.0)));
        d.noise.resize(n);
        for (auto& v : d.noise) v = cplx{w(rng), w(rng)};
    }
    return d;
}

void rotate(CVector& x, const ImpairmentDraws& d) {
    if (!d.phasor.empty())
        for (std::size_t i = 0; i < x.size(); ++i) x[i] *= d.phasor[i];
}

void add_noise(CVector& x, const ImpairmentDraws& d) {
    if (!d.noise.empty())
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += d.noise[i];
}

double mean_power(const CVector& x) {
    double p = 0.0;
    for (const auto& v : x) p += std::norm(v);
    return x.empty() ? 0.0 : p / static_cast<double>(x.size());
}

CVector flatten(const PulseTrain& t) {
    CVector flat;
    for (const auto& p : t.pulses) flat.insert(flat.end(), p.begin(), p.end());
    return flat;
}

void unflatten(const CVector& flat, PulseTrain& t) {
    std::size_t n = 0;
    for (auto& p : t.pulses)
        for (auto& v : p) v = flat[n++];
}

}  // namespace

CVector apply_impairments(const CVector& series, const ImpairmentConfig& imp, std::uint64_t seed) {
    imp.validate();
    const auto d = impairment_draws(series.size(), imp, seed, mean_power(series));
    CVector out = series;
    rotate(out, d);
    add_noise(out, d);
    return out;
}

TrainComponents build_two_trip_components(const std::vector<TripEcho>& trips, const CodeFilterSet& set,
                                          const RadarParams& radar, const ImpairmentConfig& imp,
                                          std::size_t K, std::size_t gates, std::uint64_t seed) {
    check_pair(set);
    radar.validate();
    imp.validate();
    if (trips.empty()) throw std::invalid_argument("two-trip train: no echoes given");
    if (K < 2) throw std::invalid_argument("two-trip train: need at least 2 pulses");
    const std::size_t L = set.code_length(), window = gates + L - 1;
    if (gates == 0 || window > radar.samples_per_pri())
        throw std::invalid_argument("two-trip train: " + std::to_string(gates) +
                                    " gates do not fit the PRI window of " +
                                    std::to_string(radar.samples_per_pri()) + " samples");
    for (const auto& t : trips) {
        if (t.trip != 1 && t.trip != 2) throw std::invalid_argument("two-trip train: trip must be 1 or 2");
        if (t.gate_count == 0 || t.first_gate + t.gate_count > gates)
            throw std::invalid_argument("two-trip train: echo gate span exceeds the receive window");
    }

    const CVector codes[2] = {set.codes[0].samples(), set.codes[1].samples()};
    PulseTrain empty;
    empty.gates = gates;
    empty.pulses.assign(K, CVector(window, cplx{0.0, 0.0}));
    for (std::size_t k = 0; k < K; ++k) empty.code_schedule.push_back(k % 2);

    TrainComponents out;
    out.observed = empty;
    out.noise = empty;
    for (std::size_t e = 0; e < trips.size(); ++e) {
        const auto& t = trips[e];
        PulseTrain echo = empty;
        for (std::size_t g = t.first_gate; g < t.first_gate + t.gate_count; ++g) {
            const auto s = gaussian_echo_series(K, t.velocity_mps, t.spectral_width_mps, t.power_db,
                                                radar, stream(seed, e + 1, g)());
            for (std::size_t k = 0; k < K; ++k) {
                // Range fold: the trip-2 echo was launched with the previous pulse's code.
                const CVector& a = codes[t.trip == 1 ? k % 2 : (k + 1) % 2];
                for (std::size_t l = 0; l < L; ++l) echo.pulses[k][g + l] += s[k] * a[l];
            }
        }
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < window; ++n) out.observed.pulses[k][n] += echo.pulses[k][n];
        out.echoes.push_back(std::move(echo));
    }

    // Impairments act on the summed return; the same draws are applied to
    // each echo so that observed = sum(echoes) + noise.
    CVector flat = flatten(out.observed);
    const auto d = impairment_draws(flat.size(), imp, stream(seed, 0, 0x1A4E)(), mean_power(flat));
    rotate(flat, d);
    add_noise(flat, d);
    unflatten(flat, out.observed);
    for (auto& echo : out.echoes) {
        CVector f = flatten(echo);
        rotate(f, d);
        unflatten(f, echo);
    }
    if (!d.noise.empty()) unflatten(d.noise, out.noise);
    return out;
}

PulseTrain build_two_trip_train(const std::vector<TripEcho>& trips, const CodeFilterSet& set,
                                const RadarParams& radar, const ImpairmentConfig& imp,
                                std::size_t K, std::size_t gates, std::uint64_t seed) {
    return build_two_trip_components(trips, set, radar, imp, K, gates, seed).observed;
}

PulseTrain compress(const PulseTrain& train, const CodeFilterSet& set, int target_trip) {
    check_pair(set);
    if (target_trip != 1 && target_trip != 2)
        throw std::invalid_argument("compress: target trip must be 1 or 2");
    if (train.code_schedule.size() != train.pulses.size())
        throw std::invalid_argument("compress: schedule does not match the pulses");
    const std::size_t L = set.code_length(), Nf = set.filter_length();
    const std::size_t off = centered_offset(L, Nf);

    PulseTrain out;
    out.gates = train.gates;
    out.code_schedule = train.code_schedule;
    std::vector<CVector> H(2);
    std::size_t n_fft = 0;
    if (!train.pulses.empty()) {
        n_fft = fft::good_size(train.pulses.front().size() + Nf - 1);
        for (std::size_t i = 0; i < 2; ++i) H[i] = fft::forward(set.filters[i].coefficients, n_fft);
    }
    for (std::size_t k = 0; k < train.pulses.size(); ++k) {
        const std::size_t f = target_trip == 1 ? train.code_schedule[k] : 1 - train.code_schedule[k];
        CVector R = fft::forward(train.pulses[k], n_fft);
        for (std::size_t i = 0; i < n_fft; ++i) R[i] *= std::conj(H[f][i]);
        const CVector corr = fft::inverse(R);  // corr[d] = sum_j r(j + d) conj(h(j))
        CVector y(train.gates);
        for (std::size_t g = 0; g < train.gates; ++g) {
            const auto d = static_cast<std::ptrdiff_t>(g) - static_cast<std::ptrdiff_t>(off);
            y[g] = corr[static_cast<std::size_t>((d + static_cast<std::ptrdiff_t>(n_fft)) %
                                                 static_cast<std::ptrdiff_t>(n_fft))];
        }
        out.pulses.push_back(std::move(y));
    }
    return out;
}

std::vector<double> DopplerSpectrum::power_db() const {
    std::vector<double> out(power.size());
    for (std::size_t i = 0; i < power.size(); ++i) out[i] = to_db10(power[i]);
    return out;
}

DopplerSpectrum doppler_spectrum(const PulseTrain& train, std::size_t gate, SpectrumWindow window,
                                 const RadarParams& radar) {
    const std::size_t K = train.pulses.size();
    if (K < 8) throw std::invalid_argument("doppler spectrum: need at least 8 pulses");
    if (gate >= train.pulses.front().size()) throw std::invalid_argument("doppler spectrum: gate out of range");
    const auto w = taper(K, window);
    CVector x(K);
    double ww = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        x[k] = w[k] * train.pulses[k][gate];
        ww += w[k] * w[k];
    }
    const CVector X = fft::forward(x, K);
    DopplerSpectrum s;
    const double prf = 1.0 / radar.pri_s, lambda = radar.wavelength_m();
    for (std::size_t i = 0; i < K; ++i) {
        const std::size_t k = (i + K - K / 2) % K;  // fftshift
        const double f = (static_cast<double>(i) - static_cast<double>(K / 2)) * prf / static_cast<double>(K);
        s.velocity_mps.push_back(f * lambda / 2.0);
        s.power.push_back(std::norm(X[k]) / ww);
    }
    return s;
}

double pulse_pair_velocity(const PulseTrain& train, std::size_t gate, const RadarParams& radar) {
    if (train.pulses.size() < 2) throw std::invalid_argument("pulse pair: need at least 2 pulses");
    cplx r1{0.0, 0.0};
    for (std::size_t k = 1; k < train.pulses.size(); ++k)
        r1 += train.pulses[k].at(gate) * std::conj(train.pulses[k - 1].at(gate));
    return radar.wavelength_m() * std::arg(r1) / (4.0 * kPi * radar.pri_s);
}

SuppressionScenario SuppressionScenario::two_trip_default() {
    SuppressionScenario sc;
    sc.trips = {TripEcho{1, 60, 80, 0.0, 5.0, 1.0}, TripEcho{2, 60, 80, 0.0, -5.0, 1.0}};
    sc.impairments.snr_db = 60.0;
    return sc;
}

namespace {

DopplerSpectrum averaged_spectrum(const PulseTrain& train, const TripEcho& echo,
                                  SpectrumWindow window, const RadarParams& radar) {
    DopplerSpectrum avg;
    for (std::size_t g = echo.first_gate; g < echo.first_gate + echo.gate_count; ++g) {
        const auto s = doppler_spectrum(train, g, window, radar);
        if (avg.power.empty()) {
            avg = s;
        } else {
            for (std::size_t i = 0; i < s.power.size(); ++i) avg.power[i] += s.power[i];
        }
    }
    for (auto& p : avg.power) p /= static_cast<double>(echo.gate_count);
    return avg;
}

double window_peak(const DopplerSpectrum& s, const TripEcho& echo, const RadarParams& radar) {
    const double span = 2.0 * radar.nyquist_velocity_mps();
    const double bin = span / static_cast<double>(s.power.size());
    const double half = std::max(3.0 * echo.spectral_width_mps, bin);
    double peak = 0.0;
    for (std::size_t i = 0; i < s.power.size(); ++i) {
        const double d = std::remainder(s.velocity_mps[i] - echo.velocity_mps, span);
        if (std::abs(d) <= half) peak = std::max(peak, s.power[i]);
    }
    return peak;
}

}  // namespace

SuppressionRun suppression_run(const SuppressionScenario& sc, const CodeFilterSet& set,
                               std::uint64_t seed) {
    const auto it = std::find_if(sc.trips.begin(), sc.trips.end(), [](const TripEcho& t) { return t.trip == 2; });
    if (it == sc.trips.end()) throw std::invalid_argument("suppression: scenario has no trip-2 echo");
    const auto parts = build_two_trip_components(sc.trips, set, sc.radar, sc.impairments, sc.pulses, sc.gates, seed);

    // What trip-1 processing leaves of the trip-2 echoes (plus the receiver noise).
    PulseTrain residual = parts.noise;
    for (std::size_t e = 0; e < sc.trips.size(); ++e) {
        if (sc.trips[e].trip != 2) continue;
        for (std::size_t k = 0; k < residual.pulses.size(); ++k)
            for (std::size_t n = 0; n < residual.pulses[k].size(); ++n)
                residual.pulses[k][n] += parts.echoes[e].pulses[k][n];
    }

    SuppressionRun run;
    run.seed = seed;
    run.trip1_compressed = averaged_spectrum(compress(parts.observed, set, 1), *it, sc.window, sc.radar);
    run.trip2_compressed = averaged_spectrum(compress(parts.observed, set, 2), *it, sc.window, sc.radar);
    run.trip2_residual = averaged_spectrum(compress(residual, set, 1), *it, sc.window, sc.radar);
    const double recovered = window_peak(run.trip2_compressed, *it, sc.radar);
    const double left = window_peak(run.trip2_residual, *it, sc.radar);
    const double observed = window_peak(run.trip1_compressed, *it, sc.radar);
    if (!(left > 0.0) || !(recovered > 0.0) || !(observed > 0.0))
        throw DegenerateInput("suppression: empty trip-2 velocity window");
    run.suppression_db = to_db10(recovered / left);
    run.observed_suppression_db = to_db10(recovered / observed);
    return run;
}

SuppressionSummary suppression_db(const SuppressionScenario& sc, const CodeFilterSet& set,
                                  std::uint64_t first_seed, std::size_t seeds) {
    if (seeds == 0) throw std::invalid_argument("suppression: need at least one seed");
    SuppressionSummary out;
    for (std::size_t s = 0; s < seeds; ++s) {
        out.runs.push_back(suppression_run(sc, set, first_seed + s));
        out.mean_db += out.runs.back().suppression_db;
        out.mean_observed_db += out.runs.back().observed_suppression_db;
    }
    out.mean_db /= static_cast<double>(seeds);
    out.mean_observed_db /= static_cast<double>(seeds);
    return out;
}

double single_target_cross_psl_db(const CodeFilterSet& set, const ImpairmentConfig& imp,
                                  std::size_t pulses, std::uint64_t first_seed, std::size_t seeds) {
    check_pair(set);
    if (pulses == 0 || seeds == 0) throw std::invalid_argument("cross PSL study: need pulses and seeds");
    const std::size_t L = set.code_length(), Nf = set.filter_length();
    const std::size_t gates = 2 * Nf, target = Nf;
    const CVector codes[2] = {set.codes[0].samples(), set.codes[1].samples()};
    double acc = 0.0;
    for (std::size_t s = 0; s < seeds; ++s) {
        PulseTrain train;
        train.gates = gates;
        for (std::size_t k = 0; k < pulses; ++k) {
            CVector r(gates + L - 1, cplx{0.0, 0.0});
            for (std::size_t l = 0; l < L; ++l) r[target + l] = codes[k % 2][l];
            train.pulses.push_back(apply_impairments(r, imp, stream(first_seed + s, k, 0x9517)()));
            train.code_schedule.push_back(k % 2);
        }
        const auto matched = compress(train, set, 1), wrong = compress(train, set, 2);
        for (std::size_t k = 0; k < pulses; ++k) {
            double peak = 0.0;
            for (const auto& v : wrong.pulses[k]) peak = std::max(peak, std::norm(v));
            acc += peak / std::norm(matched.pulses[k][target]);
        }
    }
    return to_db10(acc / static_cast<double>(pulses * seeds));
}

}  // namespace polycode
