// polycode: design, evaluate and simulate orthogonal polyphase code/filter sets.
//
//   polycode design        --config design.json    --out-dir run/
//   polycode eval          --config eval.json      --out-dir run/
//   polycode simulate      --config simulate.json  --out-dir run/
//   polycode baseline-can  --config can.json       --out-dir run/
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "polycode/ambiguity.hpp"
#include "polycode/can_baseline.hpp"
#include "polycode/correlation.hpp"
#include "polycode/echo_sim.hpp"
#include "polycode/filter_design.hpp"
#include "polycode/io.hpp"
#include "polycode/optimizer.hpp"
#include "polycode/waveforms.hpp"

#ifndef POLYCODE_VERSION
#define POLYCODE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace polycode;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Options {
    std::string config;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
};

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return hex.str();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Collects artifacts and writes manifest.json last.
class Run {
public:
    Run(std::string command, const Options& opt)
        : command_(std::move(command)), opt_(opt), out_(opt.out_dir), start_(std::chrono::steady_clock::now()) {
        config_bytes_ = slurp(opt.config);
        try {
            config_ = Json::parse(config_bytes_);
        } catch (const Json::parse_error& e) {
            throw ConfigError(opt.config, std::string("invalid JSON: ") + e.what());
        }
    }

    const Json& config() const { return config_; }
    fs::path config_dir() const { return fs::absolute(opt_.config).parent_path(); }

    void prepare_out_dir() { fs::create_directories(out_); }

    fs::path artifact(const std::string& name) {
        outputs_.push_back(name);
        return out_ / name;
    }

    void write_json(const std::string& name, const Json& j) { write_json_file(j, artifact(name)); }

    template <class Writer>
    void write_text(const std::string& name, Writer&& writer) {
        std::ofstream out(artifact(name));
        if (!out) throw std::runtime_error("cannot write " + (out_ / name).string());
        writer(out);
        if (!out) throw std::runtime_error("write failed: " + (out_ / name).string());
    }

    void finish(std::uint64_t seed) {
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        Json m{{"command", command_},
               {"config_path", opt_.config},
               {"config_sha256", sha256_hex(config_bytes_)},
               {"seed", seed},
               {"threads", opt_.threads},
               {"tool_version", POLYCODE_VERSION},
               {"outputs", outputs_},
               {"wall_time_s", wall}};
        write_json_file(m, out_ / "manifest.json");
    }

private:
    std::string command_;
    Options opt_;
    fs::path out_;
    std::chrono::steady_clock::time_point start_;
    std::string config_bytes_;
    Json config_;
    std::vector<std::string> outputs_;
};

Json pair_summary(const CodeFilterSet& set, std::size_t width) {
    Json entries = Json::array();
    double worst_auto = kDbFloor, worst_cross = kDbFloor;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const double main = std::abs(zero_lag_response(set.codes[i], set.filters[i]));
        for (std::size_t k = 0; k < set.size(); ++k) {
            auto p = cross_correlate(set.codes[k].samples(), set.filters[i].coefficients);
            p.normalization = main;
            const bool is_auto = i == k;
            const double psl = is_auto ? psl_dbc(p, width) : peak_dbc(p);
            (is_auto ? worst_auto : worst_cross) = std::max(is_auto ? worst_auto : worst_cross, psl);
            entries.push_back(Json{{"filter", i + 1},
                                   {"code", k + 1},
                                   {"kind", is_auto ? "auto" : "cross"},
                                   {"isl", is_auto ? isl(p, width) : p.energy()},
                                   {"psl_dbc", psl}});
        }
    }
    Json out{{"mainlobe_width", width}, {"entries", entries}, {"auto_psl_dbc", worst_auto}};
    if (set.size() > 1) {
        out["cross_peak_dbc"] = worst_cross;
        out["pair_psl_dbc"] = std::max(worst_auto, worst_cross);
    }
    return out;
}

int cmd_design(const Options& opt) {
    Run run("design", opt);
    auto cfg = design_config_from_json(run.config());
    if (opt.seed) cfg.seed = *opt.seed;
    run.prepare_out_dir();

    const auto result = global_search(cfg.M, cfg.L, cfg.filter_length, cfg.error_config(),
                                      cfg.optimizer_config(opt.threads));
    run.write_json("set.json", to_json(result.set));
    run.write_text("trace.csv", [&](std::ostream& o) { write_trace_csv(result, o); });
    Json starts = Json::array();
    for (const auto& s : result.starts) {
        Json e{{"index", s.index}, {"iterations", s.iterations}, {"failed", s.failed}};
        if (s.failed) e["failure"] = s.failure;
        else e["final_error"] = s.final_error;
        starts.push_back(e);
    }
    Json summary{{"config", to_json(cfg)},
                 {"best_start", result.best_start},
                 {"joint_error", result.set.joint_error},
                 {"joint_error_db_re_L2", to_db10(result.set.joint_error / double(cfg.L * cfg.L))},
                 {"wall_time_s", result.wall_time_s},
                 {"starts", starts},
                 {"sidelobes", pair_summary(result.set, cfg.mainlobe_width)}};
    run.write_json("design_summary.json", summary);
    run.finish(cfg.seed);

    const auto& sl = summary["sidelobes"];
    std::cout << "design: best start " << result.best_start << ", joint error " << result.set.joint_error
              << ", auto PSL " << sl["auto_psl_dbc"].get<double>() << " dBc";
    if (sl.contains("cross_peak_dbc")) std::cout << ", cross peak " << sl["cross_peak_dbc"].get<double>() << " dBc";
    std::cout << "\n";
    return 0;
}

struct NamedSet {
    std::string prefix;
    CodeFilterSet set;
};

std::vector<NamedSet> eval_sets(const EvalConfig& cfg) {
    std::vector<NamedSet> out;
    if (cfg.set) {
        auto set = set_from_json(read_json_file(*cfg.set));
        out.push_back({"", std::move(set)});
    } else if (cfg.chirp) {
        const auto& c = *cfg.chirp;
        const auto code = chirp(c.bandwidth_mhz * 1e6, c.pulse_width_us * 1e-6, cfg.sample_rate_mhz * 1e6).to_code();
        if (c.filter_length < code.size()) throw ConfigError("chirp.filter_length", "shorter than the chirp");
        CodeFilterSet matched{{code}, {matched_filter(code)}, c.mainlobe_width, 0.0};
        CodeFilterSet mismatched{{code}, {min_isl_filter(code, c.filter_length, c.mainlobe_width)},
                                 c.mainlobe_width, 0.0};
        out.push_back({"matched_", std::move(matched)});
        out.push_back({"mismatched_", std::move(mismatched)});
    } else {
        CodeFilterSet set;
        set.mainlobe_width = cfg.mainlobe_width;
        for (auto r : cfg.hadamard->rows) {
            set.codes.push_back(hadamard_code(cfg.hadamard->order, r));
            set.filters.push_back(matched_filter(set.codes.back()));
        }
        out.push_back({"", std::move(set)});
    }
    return out;
}

int cmd_eval(const Options& opt) {
    Run run("eval", opt);
    const auto cfg = eval_config_from_json(run.config(), run.config_dir());
    const auto sets = eval_sets(cfg);
    run.prepare_out_dir();

    Json summary{{"mode", cfg.mode == EvalMode::kCorrelation ? "corr" : "ambiguity"}, {"sets", Json::array()}};
    for (const auto& [prefix, set] : sets) {
        const std::size_t width = cfg.set ? set.mainlobe_width : cfg.chirp ? cfg.chirp->mainlobe_width : cfg.mainlobe_width;
        Json entry = pair_summary(set, width);
        entry["name"] = prefix.empty() ? "set" : prefix.substr(0, prefix.size() - 1);
        for (std::size_t i = 0; i < set.size(); ++i) {
            const double main = std::abs(zero_lag_response(set.codes[i], set.filters[i]));
            for (std::size_t k = 0; k < set.size(); ++k) {
                const std::string tag = "f" + std::to_string(i + 1) + "_c" + std::to_string(k + 1);
                if (cfg.mode == EvalMode::kCorrelation) {
                    auto p = cross_correlate(set.codes[k].samples(), set.filters[i].coefficients);
                    p.normalization = main;
                    run.write_text(prefix + "profile_" + tag + ".csv", [&](std::ostream& o) { write_profile_csv(p, o); });
                } else {
                    auto s = ambiguity(set.codes[k], set.filters[i], cfg.doppler_grid(), cfg.sample_rate_mhz * 1e6,
                                       main, opt.threads);
                    s.kind = i == k ? SurfaceKind::kAuto : SurfaceKind::kCross;
                    run.write_text(prefix + "surface_" + tag + ".csv", [&](std::ostream& o) { write_surface_csv(s, o); });
                    run.write_text(prefix + "cut_" + tag + ".csv", [&](std::ostream& o) { write_cut_csv(s, o); });
                    entry["surfaces"].push_back(Json{{"file", prefix + "surface_" + tag + ".csv"},
                                                     {"kind", i == k ? "auto" : "cross"},
                                                     {"filter", i + 1},
                                                     {"code", k + 1},
                                                     {"sample_rate_hz", s.sample_rate_hz},
                                                     {"normalization", s.normalization},
                                                     {"delay_min", s.delays.front()},
                                                     {"delay_max", s.delays.back()},
                                                     {"doppler_min_hz", s.dopplers_hz.front()},
                                                     {"doppler_max_hz", s.dopplers_hz.back()},
                                                     {"doppler_count", s.dopplers_hz.size()}});
                }
            }
        }
        summary["sets"].push_back(entry);
    }
    run.write_json("summary.json", summary);
    run.finish(opt.seed.value_or(0));

    for (const auto& s : summary["sets"]) {
        std::cout << "eval " << s["name"].get<std::string>() << ": auto PSL " << s["auto_psl_dbc"].get<double>() << " dBc";
        if (s.contains("cross_peak_dbc")) std::cout << ", cross peak " << s["cross_peak_dbc"].get<double>() << " dBc";
        std::cout << "\n";
    }
    return 0;
}

int cmd_simulate(const Options& opt) {
    Run run("simulate", opt);
    auto cfg = simulate_config_from_json(run.config(), run.config_dir());
    if (opt.seed) cfg.seed = *opt.seed;
    const auto set = set_from_json(read_json_file(cfg.set));
    if (set.size() != 2) throw ConfigError("set", "simulation needs a two-code set");
    if (cfg.scenario.gates + set.code_length() - 1 > cfg.scenario.radar.samples_per_pri())
        throw ConfigError("gates", "receive window exceeds the PRI");
    run.prepare_out_dir();

    const auto& sc = cfg.scenario;
    const auto summary = suppression_db(sc, set, cfg.seed, cfg.seeds);

    // Per-gate spectra of the first seed, both compressions.
    const auto train = build_two_trip_train(sc.trips, set, sc.radar, sc.impairments, sc.pulses, sc.gates, cfg.seed);
    const auto c1 = compress(train, set, 1), c2 = compress(train, set, 2);
    run.write_text("spectra_per_gate.csv", [&](std::ostream& o) {
        o << "gate,velocity_mps,trip1_db,trip2_db\n";
        o.precision(10);
        for (std::size_t g = 0; g < sc.gates; ++g) {
            const auto s1 = doppler_spectrum(c1, g, sc.window, sc.radar), s2 = doppler_spectrum(c2, g, sc.window, sc.radar);
            const auto d1 = s1.power_db(), d2 = s2.power_db();
            for (std::size_t i = 0; i < d1.size(); ++i)
                o << g << ',' << s1.velocity_mps[i] << ',' << d1[i] << ',' << d2[i] << '\n';
        }
    });
    run.write_text("spectra_trip2_gates.csv", [&](std::ostream& o) {
        const auto& r = summary.runs.front();
        const auto d1 = r.trip1_compressed.power_db(), d2 = r.trip2_compressed.power_db();
        const auto dr = r.trip2_residual.power_db();
        o << "velocity_mps,trip1_db,trip2_db,trip2_residual_db\n";
        o.precision(10);
        for (std::size_t i = 0; i < d1.size(); ++i)
            o << r.trip1_compressed.velocity_mps[i] << ',' << d1[i] << ',' << d2[i] << ',' << dr[i] << '\n';
    });

    Json report{{"seeds", Json::array()},
                {"mean_suppression_db", summary.mean_db},
                {"mean_observed_suppression_db", summary.mean_observed_db}};
    for (const auto& r : summary.runs)
        report["seeds"].push_back(Json{{"seed", r.seed},
                                       {"suppression_db", r.suppression_db},
                                       {"observed_suppression_db", r.observed_suppression_db}});
    if (!cfg.jitter_sweep_deg.empty()) {
        Json sweep = Json::array();
        for (double deg : cfg.jitter_sweep_deg) {
            ImpairmentConfig imp;
            imp.phase_jitter_deg = deg;
            sweep.push_back(Json{{"phase_jitter_deg", deg},
                                 {"cross_psl_db", single_target_cross_psl_db(set, imp, cfg.jitter_pulses, cfg.seed, cfg.seeds)}});
        }
        report["jitter_sweep"] = sweep;
        report["jitter_degradation_db"] =
            sweep.back()["cross_psl_db"].get<double>() - sweep.front()["cross_psl_db"].get<double>();
    }
    run.write_json("suppression.json", report);
    run.finish(cfg.seed);
    std::cout << "simulate: mean suppression " << summary.mean_db << " dB (observed spectrum "
              << summary.mean_observed_db << " dB) over " << cfg.seeds << " seeds\n";
    return 0;
}

int cmd_baseline_can(const Options& opt) {
    Run run("baseline-can", opt);
    auto cfg = can_config_from_json(run.config());
    if (opt.seed) cfg.seed = *opt.seed;
    run.prepare_out_dir();

    const auto ccfg = cfg.can_config();
    const auto result = cfg.band > 0 ? wecan_design(ccfg) : can_design(ccfg);
    Json codes = Json::array();
    for (const auto& c : result.codes) codes.push_back(to_json(c));
    run.write_json("codes.json", Json{{"codes", codes}});
    run.write_text("criterion_trace.csv", [&](std::ostream& o) {
        o << "cycle,criterion\n";
        o.precision(17);
        for (std::size_t i = 0; i < result.criterion_trace.size(); ++i) o << i << ',' << result.criterion_trace[i] << '\n';
    });
    run.write_text("report.csv", [&](std::ostream& o) { write_report_csv(evaluate_set_matched(result.codes), o); });
    run.write_json("can_summary.json", Json{{"algorithm", cfg.band > 0 ? "wecan" : "can"},
                                            {"band", cfg.band},
                                            {"cycles", result.cycles},
                                            {"converged", result.converged},
                                            {"warning", result.warning},
                                            {"final_criterion", result.criterion_trace.back()}});
    run.finish(cfg.seed);
    std::cout << "baseline-can: " << result.cycles << " cycles, criterion " << result.criterion_trace.back()
              << (result.converged ? "" : " (not converged)") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Orthogonal polyphase code and mismatched filter design"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opt.config, "JSON configuration file")->required();
        sub->add_option("--out-dir", opt.out_dir, "Directory for output files")->capture_default_str();
        sub->add_option("--seed", seed, "Overrides the configured seed");
        sub->add_option("--threads", opt.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
        return sub;
    };
    auto* design = add_common(app.add_subcommand("design", "Jointly optimize codes and filters"));
    auto* eval = add_common(app.add_subcommand("eval", "Correlation or ambiguity evaluation of a set"));
    auto* simulate = add_common(app.add_subcommand("simulate", "Second-trip suppression simulation"));
    auto* can = add_common(app.add_subcommand("baseline-can", "CAN / WeCAN matched-filter baseline"));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    for (auto* sub : {design, eval, simulate, can})
        if (sub->parsed() && sub->count("--seed") > 0) opt.seed = seed;

    try {
        if (design->parsed()) return cmd_design(opt);
        if (eval->parsed()) return cmd_eval(opt);
        if (simulate->parsed()) return cmd_simulate(opt);
        return cmd_baseline_can(opt);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}
