#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "polycode/filter_design.hpp"

namespace polycode {

struct RadarParams {
    double frequency_hz = 13.91e9;
    double pri_s = 500e-6;
    double sample_rate_hz = 2e6;
    double pulse_width_s = 20e-6;

    double wavelength_m() const { return kSpeedOfLight / frequency_hz; }
    double unambiguous_range_m() const { return kSpeedOfLight * pri_s / 2.0; }
    double nyquist_velocity_mps() const { return wavelength_m() / (4.0 * pri_s); }
    std::size_t samples_per_pri() const;
    void validate() const;  // positive values, pri > pulse_width
};

// Weather echo occupying gates [first_gate, first_gate + gate_count) of the
// receive window; `trip` 2 folds in from the previous pulse.
struct TripEcho {
    int trip = 1;
    std::size_t first_gate = 0;
    std::size_t gate_count = 1;
    double power_db = 0.0;           // per gate, re unit power
    double velocity_mps = 0.0;
    double spectral_width_mps = 1.0;
};

struct ImpairmentConfig {
    double phase_jitter_deg = 0.0;   // RMS, white per sample
    double snr_db = std::numeric_limits<double>::infinity();  // re mean signal power; inf = off
    double system_phase_rad = 0.0;

    void validate() const;
};

/// Slow-time samples by fast-time samples, with the code index used on each pulse.
struct PulseTrain {
    std::vector<CVector> pulses;
    std::vector<std::size_t> code_schedule;
    std::size_t gates = 0;

    std::size_t size() const { return pulses.size(); }
};

/// K slow-time samples with a Gaussian Doppler spectrum centred on
/// 2 v / lambda with standard deviation 2 sigma_v / lambda (aliased into the
/// PRF), synthesized in the frequency domain from complex white Gaussian
/// bins. Mean power is 10^(power_db / 10).
CVector gaussian_echo_series(std::size_t K, double velocity_mps, double spectral_width_mps,
                             double power_db, const RadarParams& radar, std::uint64_t seed);

// Multiplies every sample by exp(j (phi + system_phase)), phi white Gaussian,
// then adds complex AWGN at snr_db below the mean input power.
CVector apply_impairments(const CVector& series, const ImpairmentConfig& imp, std::uint64_t seed);

/// Pulse k carries code k mod 2; a trip-2 echo received on pulse k was
/// launched with the previous pulse's code. Each gate's slow-time series comes
/// from gaussian_echo_series; impairments are applied to the summed return.
/// The receive window spans gates + L - 1 samples.
PulseTrain build_two_trip_train(const std::vector<TripEcho>& trips, const CodeFilterSet& set,
                                const RadarParams& radar, const ImpairmentConfig& imp,
                                std::size_t K, std::size_t gates, std::uint64_t seed);

// The same realization split by source: observed = sum(echoes) + noise, with
// echoes[e] carrying the jitter and system phase of the summed return.
struct TrainComponents {
    PulseTrain observed;
    std::vector<PulseTrain> echoes;  // one per TripEcho, in order
    PulseTrain noise;
};
TrainComponents build_two_trip_components(const std::vector<TripEcho>& trips, const CodeFilterSet& set,
                                          const RadarParams& radar, const ImpairmentConfig& imp,
                                          std::size_t K, std::size_t gates, std::uint64_t seed);

/// Fast-time compression to `gates` outputs. Trip 1 uses filter k mod 2 on
/// pulse k, trip 2 the other one.
PulseTrain compress(const PulseTrain& train, const CodeFilterSet& set, int target_trip);

enum class SpectrumWindow { kNone, kVonHann };

struct DopplerSpectrum {
    std::vector<double> velocity_mps;  // ascending, fftshifted
    std::vector<double> power;         // linear periodogram, window-normalized
    std::vector<double> power_db() const;
};

DopplerSpectrum doppler_spectrum(const PulseTrain& train, std::size_t gate, SpectrumWindow window,
                                 const RadarParams& radar);

// Pulse-pair mean velocity of one gate.
double pulse_pair_velocity(const PulseTrain& train, std::size_t gate, const RadarParams& radar);

struct SuppressionScenario {
    RadarParams radar;
    std::vector<TripEcho> trips;
    ImpairmentConfig impairments;
    std::size_t pulses = 128;
    std::size_t gates = 200;
    SpectrumWindow window = SpectrumWindow::kVonHann;

    // Equal-power trips at +5 / -5 m/s over the same apparent gates, SNR 60 dB.
    static SuppressionScenario two_trip_default();
};

struct SuppressionRun {
    std::uint64_t seed = 0;
    double suppression_db = 0.0;
    double observed_suppression_db = 0.0;
    DopplerSpectrum trip1_compressed;  // observed return, averaged over the trip-2 gates
    DopplerSpectrum trip2_compressed;
    DopplerSpectrum trip2_residual;    // trip-2 echoes plus noise alone, trip-1 compression
};

/// Peak power in the trip-2 velocity window (v2 +- max(3 sigma_v, one bin))
/// of the gate-averaged spectrum under trip-2 compression, over the peak in
/// the same window of the trip-2 residual: the trip-2 echoes (and receiver
/// noise) of the same realization under trip-1 compression, in dB.
/// observed_suppression_db uses the full observed return under trip-1
/// compression instead, so it also counts trip-1 energy that the alternating
/// filter schedule moves into the trip-2 window.
SuppressionRun suppression_run(const SuppressionScenario& sc, const CodeFilterSet& set,
                               std::uint64_t seed);

struct SuppressionSummary {
    std::vector<SuppressionRun> runs;
    double mean_db = 0.0;           // mean of the per-seed dB values
    double mean_observed_db = 0.0;
};

SuppressionSummary suppression_db(const SuppressionScenario& sc, const CodeFilterSet& set,
                                  std::uint64_t first_seed, std::size_t seeds);

/// Single point target on the code of pulse k, compressed with both filters:
/// returns the peak of the wrong-filter output relative to the matched
/// mainlobe, power-averaged over pulses and seeds, in dB.
double single_target_cross_psl_db(const CodeFilterSet& set, const ImpairmentConfig& imp,
                                  std::size_t pulses, std::uint64_t first_seed, std::size_t seeds);

}  // namespace polycode
