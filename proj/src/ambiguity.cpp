#include "polycode/ambiguity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "polycode/correlation.hpp"

namespace polycode {

std::vector<double> AmbiguitySurface::dbc_row(std::size_t doppler_index) const {
    const auto& row = magnitude.at(doppler_index);
    std::vector<double> out(row.size());
    for (std::size_t i = 0; i < row.size(); ++i)
        out[i] = normalization > 0.0 ? to_db20(row[i] / normalization) : kDbFloor;
    return out;
}

std::vector<double> default_doppler_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 80; ++k) grid.push_back(25.0 * k);
    return grid;
}

AmbiguitySurface ambiguity(const PolyphaseCode& code, const MismatchedFilter& filter,
                           const std::vector<double>& dopplers_hz, double sample_rate_hz,
                           double normalization, std::size_t threads) {
    if (dopplers_hz.empty()) throw std::invalid_argument("ambiguity: empty Doppler grid");
    if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("ambiguity: sample rate must be > 0");
    if (code.size() == 0 || filter.size() == 0)
        throw std::invalid_argument("ambiguity: empty code or filter");

    AmbiguitySurface s;
    s.dopplers_hz = dopplers_hz;
    s.sample_rate_hz = sample_rate_hz;
    s.code_label = code.label;
    s.filter_label = filter.label.empty() ? filter.designed_for : filter.label;
    s.magnitude.resize(dopplers_hz.size());

    const CVector a = code.samples();
    auto row = [&](std::size_t d) {
        CVector mod(a.size());
        const double w = kTwoPi * dopplers_hz[d] / sample_rate_hz;
        for (std::size_t n = 0; n < a.size(); ++n)
            mod[n] = a[n] * std::polar(1.0, w * static_cast<double>(n));
        const auto p = cross_correlate(mod, filter.coefficients);
        auto& out = s.magnitude[d];
        out.resize(p.values.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(p.values[i]);
        if (d == 0) {
            s.delays.resize(p.values.size());
            for (std::size_t i = 0; i < out.size(); ++i) s.delays[i] = p.lag_at(i);
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, dopplers_hz.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t d = next++; d < dopplers_hz.size(); d = next++) row(d);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    if (normalization > 0.0) {
        s.normalization = normalization;
    } else {
        const auto p = cross_correlate(a, filter.coefficients);
        s.normalization = std::abs(p.zero_lag());
        if (!(s.normalization > 0.0))
            throw DegenerateInput("ambiguity: zero mainlobe, cannot normalize");
    }
    return s;
}

std::array<AmbiguitySurface, 4> auto_and_cross_surfaces(const CodeFilterSet& set,
                                                        const std::vector<double>& dopplers_hz,
                                                        double sample_rate_hz,
                                                        std::size_t threads) {
    if (set.size() != 2)
        throw std::invalid_argument("auto/cross surfaces are defined for pairs (M = 2), got M = " +
                                    std::to_string(set.size()));
    set.validate();
    std::array<AmbiguitySurface, 4> out;
    for (std::size_t i = 0; i < 2; ++i) {
        out[i] = ambiguity(set.codes[i], set.filters[i], dopplers_hz, sample_rate_hz, 0.0, threads);
        out[i].kind = SurfaceKind::kAuto;
        out[2 + i] = ambiguity(set.codes[1 - i], set.filters[i], dopplers_hz, sample_rate_hz,
                               out[i].normalization, threads);
        out[2 + i].kind = SurfaceKind::kCross;
    }
    return out;
}

std::vector<double> zero_doppler_cut(const AmbiguitySurface& surface) {
    for (std::size_t d = 0; d < surface.dopplers_hz.size(); ++d)
        if (surface.dopplers_hz[d] == 0.0) return surface.dbc_row(d);
    throw std::invalid_argument("zero_doppler_cut: Doppler grid does not contain 0 Hz");
}

void write_surface_csv(const AmbiguitySurface& surface, std::ostream& out) {
    out << "delay,doppler_hz,dbc\n" << std::setprecision(17);
    for (std::size_t d = 0; d < surface.dopplers_hz.size(); ++d) {
        const auto row = surface.dbc_row(d);
        for (std::size_t i = 0; i < row.size(); ++i)
            out << surface.delays[i] << ',' << surface.dopplers_hz[d] << ',' << row[i] << '\n';
    }
}

AmbiguitySurface read_surface_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("delay,doppler_hz,dbc", 0) != 0)
        throw std::runtime_error("read_surface_csv: missing header");
    std::map<double, std::vector<std::pair<std::ptrdiff_t, double>>> rows;
    std::vector<double> order;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        const double f = std::stod(b);
        if (!rows.count(f)) order.push_back(f);
        rows[f].emplace_back(std::stoll(a), std::stod(c));
    }
    AmbiguitySurface s;
    s.normalization = 1.0;
    for (double f : order) {
        const auto& r = rows[f];
        s.dopplers_hz.push_back(f);
        if (s.delays.empty())
            for (const auto& [tau, db] : r) s.delays.push_back(tau);
        std::vector<double> mag;
        for (const auto& [tau, db] : r) mag.push_back(db <= kDbFloor ? 0.0 : std::pow(10.0, db / 20.0));
        s.magnitude.push_back(std::move(mag));
    }
    return s;
}

void write_cut_csv(const AmbiguitySurface& surface, std::ostream& out) {
    const auto cut = zero_doppler_cut(surface);
    out << "delay,dbc\n" << std::setprecision(17);
    for (std::size_t i = 0; i < cut.size(); ++i) out << surface.delays[i] << ',' << cut[i] << '\n';
}

}  // namespace polycode
