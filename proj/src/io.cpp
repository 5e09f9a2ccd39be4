#include "polycode/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <set>

namespace polycode {

namespace {

// Typed access to one JSON object; every error names the full field path.
class Fields {
public:
    Fields(const Json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
        if (!j_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }

    std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

    const Json& raw(const std::string& key) {
        used_.insert(key);
        if (!j_.contains(key)) throw ConfigError(path(key), "missing");
        return j_.at(key);
    }

    std::size_t count(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
        if (!has(key) && fallback) return used_.insert(key), *fallback;
        return as_count(raw(key), path(key));
    }

    double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
        if (!has(key) && fallback) return used_.insert(key), *fallback;
        const Json& v = raw(key);
        if (!v.is_number() || !std::isfinite(v.get<double>()))
            throw ConfigError(path(key), "must be a finite number");
        return v.get<double>();
    }

    std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
        if (!has(key) && fallback) return used_.insert(key), *fallback;
        const Json& v = raw(key);
        if (!v.is_string()) throw ConfigError(path(key), "must be a string");
        return v.get<std::string>();
    }

    const Json& array(const std::string& key) {
        const Json& v = raw(key);
        if (!v.is_array()) throw ConfigError(path(key), "must be an array");
        return v;
    }

    void reject_unknown() const {
        for (const auto& item : j_.items())
            if (!used_.count(item.key())) throw ConfigError(path(item.key()), "unknown field");
    }

    static std::size_t as_count(const Json& v, const std::string& where) {
        if (v.is_number_unsigned()) return v.get<std::size_t>();
        if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
        throw ConfigError(where, "must be a non-negative integer");
    }

    static std::vector<double> numbers(const Json& v, const std::string& where) {
        if (!v.is_array()) throw ConfigError(where, "must be an array");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number() || !std::isfinite(v[i].get<double>()))
                throw ConfigError(where + "[" + std::to_string(i) + "]", "must be a finite number");
            out.push_back(v[i].get<double>());
        }
        return out;
    }

private:
    const Json& j_;
    std::string prefix_;
    std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
    return p.is_absolute() ? p : base / p;
}

}  // namespace

Json to_json(const PolyphaseCode& code) {
    return Json{{"label", code.label}, {"length", code.size()}, {"phases_radians", code.phases}};
}

PolyphaseCode code_from_json(const Json& j) {
    Fields f(j, "code");
    PolyphaseCode code;
    code.label = f.text("label", "");
    code.phases = Fields::numbers(f.array("phases_radians"), f.path("phases_radians"));
    if (f.count("length") != code.phases.size())
        throw ConfigError(f.path("length"), "does not match phases_radians");
    if (code.phases.empty()) throw ConfigError(f.path("phases_radians"), "must not be empty");
    return code;
}

Json to_json(const MismatchedFilter& filter) {
    std::vector<double> re, im;
    for (const auto& c : filter.coefficients) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    return Json{{"label", filter.label},
                {"length", filter.size()},
                {"re", re},
                {"im", im},
                {"achieved_error", filter.achieved_error},
                {"regularization_used", filter.regularization_used}};
}

MismatchedFilter filter_from_json(const Json& j) {
    Fields f(j, "filter");
    MismatchedFilter filter;
    filter.label = f.text("label", "");
    const auto re = Fields::numbers(f.array("re"), f.path("re"));
    const auto im = Fields::numbers(f.array("im"), f.path("im"));
    if (re.size() != im.size()) throw ConfigError(f.path("im"), "length differs from re");
    if (f.count("length") != re.size()) throw ConfigError(f.path("length"), "does not match re/im");
    if (re.empty()) throw ConfigError(f.path("re"), "must not be empty");
    for (std::size_t i = 0; i < re.size(); ++i) filter.coefficients.emplace_back(re[i], im[i]);
    filter.achieved_error = f.number("achieved_error", 0.0);
    filter.regularization_used = f.number("regularization_used", 0.0);
    return filter;
}

Json to_json(const CodeFilterSet& set) {
    Json codes = Json::array(), filters = Json::array();
    for (const auto& c : set.codes) codes.push_back(to_json(c));
    for (const auto& h : set.filters) filters.push_back(to_json(h));
    return Json{{"mainlobe_width", set.mainlobe_width},
                {"joint_error", set.joint_error},
                {"codes", codes},
                {"filters", filters}};
}

CodeFilterSet set_from_json(const Json& j) {
    Fields f(j, "set");
    CodeFilterSet set;
    set.mainlobe_width = f.count("mainlobe_width", 5);
    set.joint_error = f.number("joint_error", 0.0);
    if (!f.has("filters")) throw ConfigError("set.filters", "missing: a set needs one filter per code");
    for (const auto& c : f.array("codes")) set.codes.push_back(code_from_json(c));
    for (const auto& h : f.array("filters")) set.filters.push_back(filter_from_json(h));
    if (set.codes.empty()) throw ConfigError("set.codes", "must not be empty");
    if (set.filters.size() != set.codes.size())
        throw ConfigError("set.filters", "expected " + std::to_string(set.codes.size()) + " filters, got " +
                                             std::to_string(set.filters.size()));
    for (std::size_t i = 0; i < set.size(); ++i) set.filters[i].designed_for = set.codes[i].label;
    try {
        set.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("set", e.what());
    }
    return set;
}

Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
    }
}

void write_json_file(const Json& j, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_trace_csv(const DesignResult& result, std::ostream& out) {
    out << "start,iteration,error\n";
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const auto& s : result.starts) {
        if (s.failed) continue;
        for (std::size_t i = 0; i < s.error_trace.size(); ++i)
            out << s.index << ',' << i << ',' << s.error_trace[i] << '\n';
    }
}

void DesignConfig::validate() const {
    if (M < 1) throw ConfigError("M", "must be >= 1");
    if (L < 2) throw ConfigError("L", "must be >= 2");
    if (filter_length < L) throw ConfigError("filter_length", "must be >= L");
    if (mainlobe_width % 2 == 0) throw ConfigError("mainlobe_width", "must be odd");
    if (mainlobe_width >= 2 * filter_length - 1)
        throw ConfigError("mainlobe_width", "must leave sidelobes in the lag range");
    if (p < 1) throw ConfigError("p", "must be >= 1");
    if (starts < 1) throw ConfigError("starts", "must be >= 1");
    if (max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
    if (!(tolerance >= 0.0)) throw ConfigError("tolerance", "must be >= 0");
}

ErrorFunctionConfig DesignConfig::error_config() const {
    return ErrorFunctionConfig::uniform(filter_length, mainlobe_width, p);
}

OptimizerConfig DesignConfig::optimizer_config(std::size_t threads) const {
    OptimizerConfig opt;
    opt.starts = starts;
    opt.max_iterations = max_iterations;
    opt.tolerance = tolerance;
    opt.seed = seed;
    opt.threads = threads;
    return opt;
}

DesignConfig design_config_from_json(const Json& j) {
    Fields f(j, "");
    DesignConfig c;
    c.M = f.count("M", c.M);
    c.L = f.count("L", c.L);
    c.filter_length = f.count("filter_length", c.filter_length);
    c.mainlobe_width = f.count("mainlobe_width", c.mainlobe_width);
    const std::size_t p = f.count("p", 1);
    if (p > 64) throw ConfigError("p", "must be <= 64");
    c.p = static_cast<int>(p);
    c.starts = f.count("starts", c.starts);
    c.seed = f.count("seed", c.seed);
    c.max_iterations = f.count("max_iterations", c.max_iterations);
    c.tolerance = f.number("tolerance", c.tolerance);
    f.reject_unknown();
    c.validate();
    return c;
}

Json to_json(const DesignConfig& c) {
    return Json{{"M", c.M},         {"L", c.L},           {"filter_length", c.filter_length},
                {"mainlobe_width", c.mainlobe_width}, {"p", c.p}, {"starts", c.starts},
                {"seed", c.seed},   {"max_iterations", c.max_iterations}, {"tolerance", c.tolerance}};
}

CanConfig CanRunConfig::can_config() const {
    CanConfig c;
    c.M = M;
    c.L = L;
    c.max_cycles = max_cycles;
    c.tolerance = tolerance;
    c.seed = seed;
    if (band > 0) c.gamma = banded_gamma(L, band);
    return c;
}

CanRunConfig can_config_from_json(const Json& j) {
    Fields f(j, "");
    CanRunConfig c;
    c.M = f.count("M", c.M);
    c.L = f.count("L", c.L);
    c.band = f.count("band", c.band);
    c.max_cycles = f.count("max_cycles", c.max_cycles);
    c.tolerance = f.number("tolerance", c.tolerance);
    c.seed = f.count("seed", c.seed);
    f.reject_unknown();
    if (c.M < 1) throw ConfigError("M", "must be >= 1");
    if (c.L < 2) throw ConfigError("L", "must be >= 2");
    if (c.band == 1 || c.band > c.L) throw ConfigError("band", "must be 0 (plain CAN) or in 2..L");
    if (c.max_cycles < 1) throw ConfigError("max_cycles", "must be >= 1");
    if (!(c.tolerance >= 0.0)) throw ConfigError("tolerance", "must be >= 0");
    return c;
}

std::vector<double> EvalConfig::doppler_grid() const {
    std::vector<double> grid;
    const auto n = static_cast<std::size_t>(std::floor(doppler_max_hz / doppler_step_hz + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * doppler_step_hz);
    return grid;
}

EvalConfig eval_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    Fields f(j, "");
    EvalConfig c;
    const std::string mode = f.text("mode", "corr");
    if (mode == "corr") c.mode = EvalMode::kCorrelation;
    else if (mode == "ambiguity") c.mode = EvalMode::kAmbiguity;
    else throw ConfigError("mode", "must be \"corr\" or \"ambiguity\"");
    int sources = 0;
    if (f.has("set")) {
        c.set = resolve(f.text("set"), base_dir);
        ++sources;
    }
    if (f.has("chirp")) {
        Fields g(f.raw("chirp"), "chirp");
        ChirpSource s;
        s.bandwidth_mhz = g.number("bandwidth_mhz", s.bandwidth_mhz);
        s.pulse_width_us = g.number("pulse_width_us", s.pulse_width_us);
        s.filter_length = g.count("filter_length", s.filter_length);
        s.mainlobe_width = g.count("mainlobe_width", s.mainlobe_width);
        g.reject_unknown();
        if (!(s.bandwidth_mhz > 0.0)) throw ConfigError("chirp.bandwidth_mhz", "must be > 0");
        if (!(s.pulse_width_us > 0.0)) throw ConfigError("chirp.pulse_width_us", "must be > 0");
        if (s.mainlobe_width % 2 == 0) throw ConfigError("chirp.mainlobe_width", "must be odd");
        c.chirp = s;
        ++sources;
    }
    if (f.has("hadamard")) {
        Fields g(f.raw("hadamard"), "hadamard");
        HadamardSource s;
        s.order = g.count("order", s.order);
        if (g.has("rows")) {
            s.rows.clear();
            const Json& rows = g.array("rows");
            for (std::size_t i = 0; i < rows.size(); ++i)
                s.rows.push_back(Fields::as_count(rows[i], "hadamard.rows[" + std::to_string(i) + "]"));
        }
        g.reject_unknown();
        if (s.order < 2 || (s.order & (s.order - 1)) != 0)
            throw ConfigError("hadamard.order", "must be a power of two >= 2");
        if (s.rows.size() < 2) throw ConfigError("hadamard.rows", "needs at least two rows");
        for (auto r : s.rows)
            if (r >= s.order) throw ConfigError("hadamard.rows", "row index beyond the order");
        c.hadamard = s;
        ++sources;
    }
    if (sources != 1) throw ConfigError("set", "exactly one of set, chirp, hadamard is required");
    c.mainlobe_width = f.count("mainlobe_width", c.mainlobe_width);
    if (c.mainlobe_width % 2 == 0) throw ConfigError("mainlobe_width", "must be odd");
    c.sample_rate_mhz = f.number("sample_rate_mhz", c.sample_rate_mhz);
    c.doppler_max_hz = f.number("doppler_max_hz", c.doppler_max_hz);
    c.doppler_step_hz = f.number("doppler_step_hz", c.doppler_step_hz);
    f.reject_unknown();
    if (!(c.sample_rate_mhz > 0.0)) throw ConfigError("sample_rate_mhz", "must be > 0");
    if (!(c.doppler_max_hz >= 0.0)) throw ConfigError("doppler_max_hz", "must be >= 0");
    if (!(c.doppler_step_hz > 0.0)) throw ConfigError("doppler_step_hz", "must be > 0");
    if (c.chirp && c.sample_rate_mhz < c.chirp->bandwidth_mhz)
        throw ConfigError("sample_rate_mhz", "must be >= chirp.bandwidth_mhz");
    return c;
}

SimulateConfig simulate_config_from_json(const Json& j, const std::filesystem::path& base_dir) {
    Fields f(j, "");
    SimulateConfig c;
    c.scenario = SuppressionScenario::two_trip_default();
    c.set = resolve(f.text("set"), base_dir);
    if (f.has("radar")) {
        Fields r(f.raw("radar"), "radar");
        RadarParams& p = c.scenario.radar;
        p.frequency_hz = r.number("frequency_ghz", p.frequency_hz / 1e9) * 1e9;
        p.pri_s = r.number("pri_us", p.pri_s * 1e6) * 1e-6;
        p.sample_rate_hz = r.number("sample_rate_mhz", p.sample_rate_hz / 1e6) * 1e6;
        p.pulse_width_s = r.number("pulse_width_us", p.pulse_width_s * 1e6) * 1e-6;
        r.reject_unknown();
        try {
            p.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError("radar", e.what());
        }
    }
    if (f.has("trips")) {
        c.scenario.trips.clear();
        const Json& trips = f.array("trips");
        for (std::size_t i = 0; i < trips.size(); ++i) {
            Fields t(trips[i], "trips[" + std::to_string(i) + "]");
            TripEcho e;
            const std::size_t trip = t.count("trip");
            if (trip != 1 && trip != 2) throw ConfigError(t.path("trip"), "must be 1 or 2");
            e.trip = static_cast<int>(trip);
            e.first_gate = t.count("first_gate");
            e.gate_count = t.count("gate_count");
            e.power_db = t.number("power_db", 0.0);
            e.velocity_mps = t.number("velocity_mps");
            e.spectral_width_mps = t.number("spectral_width_mps", e.spectral_width_mps);
            t.reject_unknown();
            if (e.gate_count < 1) throw ConfigError(t.path("gate_count"), "must be >= 1");
            if (!(e.spectral_width_mps > 0.0)) throw ConfigError(t.path("spectral_width_mps"), "must be > 0");
            if (std::abs(e.velocity_mps) > c.scenario.radar.nyquist_velocity_mps())
                throw ConfigError(t.path("velocity_mps"), "beyond the Nyquist velocity");
            c.scenario.trips.push_back(e);
        }
    }
    c.scenario.pulses = f.count("pulses", c.scenario.pulses);
    c.scenario.gates = f.count("gates", c.scenario.gates);
    const std::string window = f.text("window", "vonhann");
    if (window == "vonhann") c.scenario.window = SpectrumWindow::kVonHann;
    else if (window == "none") c.scenario.window = SpectrumWindow::kNone;
    else throw ConfigError("window", "must be \"vonhann\" or \"none\"");
    ImpairmentConfig& imp = c.scenario.impairments;
    imp.phase_jitter_deg = f.number("phase_jitter_deg", imp.phase_jitter_deg);
    if (f.has("snr_db")) imp.snr_db = f.number("snr_db");
    else if (j.contains("snr_db") && f.raw("snr_db").is_null())  // null = noise off
        imp.snr_db = std::numeric_limits<double>::infinity();
    imp.system_phase_rad = f.number("system_phase_rad", imp.system_phase_rad);
    c.seed = f.count("seed", c.seed);
    c.seeds = f.count("seeds", c.seeds);
    if (f.has("jitter_sweep_deg")) c.jitter_sweep_deg = Fields::numbers(f.raw("jitter_sweep_deg"), "jitter_sweep_deg");
    c.jitter_pulses = f.count("jitter_pulses", c.jitter_pulses);
    f.reject_unknown();

    if (c.scenario.pulses < 8) throw ConfigError("pulses", "must be >= 8");
    if (c.scenario.gates < 1) throw ConfigError("gates", "must be >= 1");
    if (c.seeds < 1) throw ConfigError("seeds", "must be >= 1");
    if (c.jitter_pulses < 1) throw ConfigError("jitter_pulses", "must be >= 1");
    if (!(imp.phase_jitter_deg >= 0.0)) throw ConfigError("phase_jitter_deg", "must be >= 0");
    for (double v : c.jitter_sweep_deg)
        if (v < 0.0) throw ConfigError("jitter_sweep_deg", "values must be >= 0");
    for (std::size_t i = 0; i < c.scenario.trips.size(); ++i) {
        const auto& e = c.scenario.trips[i];
        if (e.first_gate + e.gate_count > c.scenario.gates)
            throw ConfigError("trips[" + std::to_string(i) + "].gate_count", "span exceeds gates");
    }
    bool has_trip2 = false;
    for (const auto& e : c.scenario.trips) has_trip2 |= e.trip == 2;
    if (!has_trip2) throw ConfigError("trips", "needs a trip-2 echo");
    return c;
}

}  // namespace polycode
