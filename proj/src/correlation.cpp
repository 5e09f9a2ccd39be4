#include "polycode/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "polycode/fft.hpp"

namespace polycode {

cplx CorrelationProfile::at_lag(std::ptrdiff_t m) const {
    const auto idx = static_cast<std::ptrdiff_t>(zero_lag_index) + m;
    if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(values.size())) return {0.0, 0.0};
    return values[static_cast<std::size_t>(idx)];
}

std::vector<double> CorrelationProfile::dbc() const {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = normalization > 0.0 ? to_db20(std::abs(values[i]) / normalization) : kDbFloor;
    return out;
}

double CorrelationProfile::energy() const {
    double e = 0.0;
    for (const auto& v : values) e += std::norm(v);
    return e;
}

std::size_t centered_offset(std::size_t length, std::size_t span) {
    return span > length ? (span - length) / 2 : 0;
}

CVector center_pad(std::span<const cplx> x, std::size_t span) {
    CVector out(span, cplx{0.0, 0.0});
    const std::size_t off = centered_offset(x.size(), span);
    std::copy(x.begin(), x.end(), out.begin() + static_cast<std::ptrdiff_t>(off));
    return out;
}

namespace {

void check_operands(std::span<const cplx> a, std::span<const cplx> b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("cross_correlate: operands must be nonempty");
}

CorrelationProfile make_profile(CVector values, std::size_t span) {
    CorrelationProfile p;
    p.values = std::move(values);
    p.zero_lag_index = span - 1;
    p.normalization = std::abs(p.values[p.zero_lag_index]);
    return p;
}

}  // namespace

CorrelationProfile cross_correlate_direct(std::span<const cplx> a, std::span<const cplx> b) {
    check_operands(a, b);
    const std::size_t n = std::max(a.size(), b.size());
    const CVector x = center_pad(a, n);
    const CVector y = center_pad(b, n);
    CVector c(2 * n - 1, cplx{0.0, 0.0});
    const auto N = static_cast<std::ptrdiff_t>(n);
    for (std::ptrdiff_t m = -(N - 1); m <= N - 1; ++m) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -m);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(N, N - m);
        cplx acc{0.0, 0.0};
        for (std::ptrdiff_t i = lo; i < hi; ++i)
            acc += x[static_cast<std::size_t>(i)] * std::conj(y[static_cast<std::size_t>(i + m)]);
        c[static_cast<std::size_t>(m + N - 1)] = acc;
    }
    return make_profile(std::move(c), n);
}

CorrelationProfile cross_correlate_fft(std::span<const cplx> a, std::span<const cplx> b) {
    check_operands(a, b);
    const std::size_t n = std::max(a.size(), b.size());
    const std::size_t nfft = fft::good_size(2 * n - 1);
    const CVector x = center_pad(a, n);
    const CVector y = center_pad(b, n);
    CVector X = fft::forward(x, nfft);
    const CVector Y = fft::forward(y, nfft);
    // conj(c_m) = sum_i conj(x_i) y_{i+m} is the circular correlation IFFT(conj(X) Y).
    for (std::size_t k = 0; k < nfft; ++k) X[k] = std::conj(X[k]) * Y[k];
    const CVector r = fft::inverse(X);
    CVector c(2 * n - 1);
    for (std::size_t k = 0; k < 2 * n - 1; ++k) {
        const std::ptrdiff_t m = static_cast<std::ptrdiff_t>(k) - static_cast<std::ptrdiff_t>(n - 1);
        const std::size_t idx = m >= 0 ? static_cast<std::size_t>(m)
                                       : nfft - static_cast<std::size_t>(-m);
        c[k] = std::conj(r[idx]);
    }
    return make_profile(std::move(c), n);
}

CorrelationProfile cross_correlate(std::span<const cplx> a, std::span<const cplx> b) {
    const std::size_t n = std::max(a.size(), b.size());
    return n > kDirectCorrelationLimit ? cross_correlate_fft(a, b) : cross_correlate_direct(a, b);
}

CVector periodic_autocorrelation(std::span<const cplx> a) {
    const std::size_t n = a.size();
    CVector r(n, cplx{0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l) r[k] += a[l] * std::conj(a[(l + k) % n]);
    return r;
}

void check_mainlobe_width(std::size_t mainlobe_width) {
    if (mainlobe_width == 0 || mainlobe_width % 2 == 0)
        throw std::invalid_argument("mainlobe width must be odd and >= 1, got " +
                                    std::to_string(mainlobe_width));
}

double isl(const CorrelationProfile& profile, std::size_t mainlobe_width) {
    check_mainlobe_width(mainlobe_width);
    const auto half = static_cast<std::ptrdiff_t>(mainlobe_width / 2);
    double e = 0.0;
    for (std::size_t i = 0; i < profile.values.size(); ++i)
        if (std::abs(profile.lag_at(i)) > half) e += std::norm(profile.values[i]);
    return e;
}

double psl_dbc(const CorrelationProfile& profile, std::size_t mainlobe_width) {
    check_mainlobe_width(mainlobe_width);
    if (!(profile.normalization > 0.0))
        throw DegenerateInput("psl_dbc: mainlobe magnitude is zero");
    const auto half = static_cast<std::ptrdiff_t>(mainlobe_width / 2);
    double peak = 0.0;
    for (std::size_t i = 0; i < profile.values.size(); ++i)
        if (std::abs(profile.lag_at(i)) > half) peak = std::max(peak, std::abs(profile.values[i]));
    if (peak == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / profile.normalization);
}

double peak_dbc(const CorrelationProfile& profile) {
    if (!(profile.normalization > 0.0))
        throw DegenerateInput("peak_dbc: reference magnitude is zero");
    double peak = 0.0;
    for (const auto& v : profile.values) peak = std::max(peak, std::abs(v));
    if (peak == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(peak / profile.normalization);
}

ConvolutionMatrices convolution_matrices(const PolyphaseCode& code, std::size_t filter_length,
                                         std::size_t mainlobe_width) {
    check_mainlobe_width(mainlobe_width);
    if (code.size() == 0) throw std::invalid_argument("convolution_matrices: empty code");
    if (filter_length < code.size())
        throw std::invalid_argument("convolution_matrices: filter shorter than code");
    const std::size_t n = filter_length;
    const std::size_t lags = 2 * n - 1;
    if (mainlobe_width > lags)
        throw std::invalid_argument("convolution_matrices: mainlobe wider than the lag axis");

    const CVector x = center_pad(code.samples(), n);
    const auto N = static_cast<std::ptrdiff_t>(n);
    ConvolutionMatrices out;
    out.mainlobe_width = mainlobe_width;
    out.full = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(lags));
    for (std::ptrdiff_t m = -(N - 1); m <= N - 1; ++m) {
        for (std::ptrdiff_t j = 0; j < N; ++j) {
            const std::ptrdiff_t src = j - m;
            if (src >= 0 && src < N) out.full(j, m + N - 1) = x[static_cast<std::size_t>(src)];
        }
    }
    const auto half = static_cast<std::ptrdiff_t>(mainlobe_width / 2);
    out.sidelobe.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(lags - mainlobe_width));
    Eigen::Index col = 0;
    for (std::ptrdiff_t m = -(N - 1); m <= N - 1; ++m) {
        if (std::abs(m) <= half) continue;
        out.sidelobe.col(col++) = out.full.col(m + N - 1);
        out.sidelobe_lags.push_back(m);
    }
    return out;
}

void write_profile_csv(const CorrelationProfile& profile, std::ostream& out) {
    out << "lag,re,im,magnitude_dbc\n";
    const auto db = profile.dbc();
    out.precision(17);
    for (std::size_t i = 0; i < profile.values.size(); ++i)
        out << profile.lag_at(i) << ',' << profile.values[i].real() << ','
            << profile.values[i].imag() << ',' << db[i] << '\n';
}

CorrelationProfile read_profile_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("lag,re,im", 0) != 0)
        throw std::runtime_error("read_profile_csv: missing header");
    CVector values;
    std::ptrdiff_t first_lag = 0;
    bool first = true;
    double peak_mag = 0.0;
    double peak_db = 0.0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string lag, re, im, db;
        std::getline(ss, lag, ',');
        std::getline(ss, re, ',');
        std::getline(ss, im, ',');
        std::getline(ss, db, ',');
        const double mag = std::abs(cplx{std::stod(re), std::stod(im)});
        if (mag > peak_mag) {
            peak_mag = mag;
            peak_db = std::stod(db);
        }
        if (first) {
            first_lag = std::stoll(lag);
            first = false;
        }
        values.emplace_back(std::stod(re), std::stod(im));
    }
    if (values.empty() || first_lag > 0)
        throw std::runtime_error("read_profile_csv: no zero lag in file");
    CorrelationProfile p;
    p.values = std::move(values);
    p.zero_lag_index = static_cast<std::size_t>(-first_lag);
    // The dBc column carries the reference level; recover it from the largest sample.
    p.normalization = peak_mag > 0.0 ? peak_mag / std::pow(10.0, peak_db / 20.0) : 0.0;
    return p;
}

}  // namespace polycode
