#pragma once

#include "ggiwt/config.hpp"
#include "ggiwt/experiment.hpp"

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ggiwt::cli {

/// Raised for problems with the user's configuration or flags (exit 1).
class ConfigError : public Error {
public:
    using Error::Error;
};

inline constexpr const char* kOutDirEnv = "GGIWT_OUT_DIR";
inline constexpr const char* kDefaultOutDir = "results";

/// Flag values as given on the command line; unset fields fall back to the
/// config file, then to the defaults.
struct RunFlags {
    std::optional<int> scenario;
    std::optional<std::string> filters;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config_path;
    unsigned threads = 0;
};

/// Everything that determines a run's outputs.
struct RunManifest {
    std::string filters = "all";
    int runs = 100;
    std::uint64_t seed = 42;
    std::string out = kDefaultOutDir;
    ExperimentConfig config = default_config(1);
};

[[nodiscard]] inline FilterSelection parse_filters(const std::string& s) {
    if (s == "all") return {};
    if (s == "baseline") return {true, false, false};
    if (s == "trajectory") return {false, true, false};
    if (s == "trajectory-no-smoothing") return {false, false, true};
    throw ConfigError("unknown filter selection '" + s +
                      "' (expected baseline | trajectory | trajectory-no-smoothing | all)");
}

/// Shortest text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

[[nodiscard]] inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config file '" + path + "': " + e.what());
    }
}

[[nodiscard]] inline ExperimentConfig parse_config(nlohmann::json j) {
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config value: ") + e.what());
    }
}

/// Resolves flags, config file and environment into a manifest. Precedence:
/// flags, then the file (including the "run" section of an echoed
/// manifest), then defaults. The output directory falls back to the
/// environment variable before the default.
[[nodiscard]] inline RunManifest resolve_manifest(const RunFlags& flags) {
    nlohmann::json j = nlohmann::json::object();
    if (flags.config_path) j = read_json_file(*flags.config_path);
    if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

    RunManifest m;
    try {
        if (j.contains("run")) {
            const auto& r = j["run"];
            m.filters = r.value("filters", m.filters);
            m.runs = r.value("runs", m.runs);
            m.seed = r.value("seed", m.seed);
            m.out = r.value("out", m.out);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid run section: ") + e.what());
    }
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') m.out = env;
    if (flags.scenario) j["scenario"]["id"] = *flags.scenario;
    if (flags.filters) m.filters = *flags.filters;
    if (flags.runs) m.runs = *flags.runs;
    if (flags.seed) m.seed = *flags.seed;
    if (flags.out) m.out = *flags.out;

    m.config = parse_config(j);
    std::vector<std::string> problems = validate(m.config);
    if (m.runs < 1) problems.emplace_back("runs must be at least 1");
    try {
        (void)parse_filters(m.filters);
    } catch (const ConfigError& e) {
        problems.emplace_back(e.what());
    }
    if (!problems.empty()) {
        std::string msg;
        for (const auto& p : problems) msg += (msg.empty() ? "" : "\n") + p;
        throw ConfigError(msg);
    }
    return m;
}

[[nodiscard]] inline nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j = to_json(m.config);
    j["run"] = {{"filters", m.filters}, {"runs", m.runs}, {"seed", m.seed}, {"out", m.out}};
    return j;
}

// ---- result files ----

inline void write_metrics_csv(std::ostream& os, const MonteCarloResult& mc) {
    os << "scan,filter,total_rms,c_l,c_m,c_f,c_t\n";
    for (const auto& name : mc.filters) {
        const auto& r = mc.aggregate.at(name);
        for (std::size_t k = 0; k < r.size(); ++k) {
            os << k << ',' << name << ',' << format_double(r.total[k]) << ',' << format_double(r.c_l[k]) << ','
               << format_double(r.c_m[k]) << ',' << format_double(r.c_f[k]) << ',' << format_double(r.c_t[k]) << '\n';
        }
    }
}

inline void write_cardinality_csv(std::ostream& os, const MonteCarloResult& mc) {
    os << "scan,filter,mean_card,true_card\n";
    for (const auto& name : mc.filters) {
        const auto& r = mc.aggregate.at(name);
        for (std::size_t k = 0; k < r.size(); ++k) {
            os << k << ',' << name << ',' << format_double(r.est_card[k]) << ',' << format_double(r.true_card[k])
               << '\n';
        }
    }
}

/// One line per trajectory extracted at the final scan of the first run.
inline void write_trajectories_jsonl(std::ostream& os, const MonteCarloResult& mc) {
    for (const auto& name : mc.filters) {
        const auto it = mc.final_estimates.find(name);
        if (it == mc.final_estimates.end()) continue;
        for (const auto& t : it->second) {
            nlohmann::json states = nlohmann::json::array();
            nlohmann::json extents = nlohmann::json::array();
            for (const auto& s : t.states) states.push_back(std::vector<double>(s.data(), s.data() + s.size()));
            for (const auto& x : t.extents) extents.push_back({x(0, 0), x(0, 1), x(1, 0), x(1, 1)});
            nlohmann::json line = {{"filter", name},   {"birth_time", t.birth_time}, {"label", t.label},
                                   {"rate", t.rate},   {"smoothed", t.smoothed},     {"states", states},
                                   {"extents", extents}};
            os << line.dump() << '\n';
        }
    }
}

/// Reads metrics.csv back into per-filter reports (cardinality fields left
/// empty).
[[nodiscard]] inline std::map<std::string, MetricReport> read_metrics_csv(std::istream& is) {
    std::map<std::string, MetricReport> out;
    std::string line;
    if (!std::getline(is, line) || line != "scan,filter,total_rms,c_l,c_m,c_f,c_t")
        throw Error("metrics.csv: unexpected header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 7) throw Error("metrics.csv: expected 7 fields in '" + line + "'");
        auto& r = out[f[1]];
        if (std::stoul(f[0]) != r.size()) throw Error("metrics.csv: scans out of order for " + f[1]);
        r.total.push_back(std::strtod(f[2].c_str(), nullptr));
        r.c_l.push_back(std::strtod(f[3].c_str(), nullptr));
        r.c_m.push_back(std::strtod(f[4].c_str(), nullptr));
        r.c_f.push_back(std::strtod(f[5].c_str(), nullptr));
        r.c_t.push_back(std::strtod(f[6].c_str(), nullptr));
    }
    return out;
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << content;
    if (!f) throw Error("write failed for " + p.string());
}

}  // namespace detail

/// Executes a resolved manifest and writes every output file.
inline void execute(const RunManifest& m, unsigned threads = 0) {
    const auto mc = monte_carlo(m.config, parse_filters(m.filters), m.runs, m.seed, threads);
    const std::filesystem::path dir(m.out);
    std::filesystem::create_directories(dir);
    std::ostringstream metrics, card, traj;
    write_metrics_csv(metrics, mc);
    write_cardinality_csv(card, mc);
    write_trajectories_jsonl(traj, mc);
    detail::write_file(dir / "metrics.csv", metrics.str());
    detail::write_file(dir / "cardinality.csv", card.str());
    detail::write_file(dir / "trajectories.jsonl", traj.str());
    detail::write_file(dir / "manifest.json", manifest_to_json(m).dump(2) + "\n");
}

/// `run`: 0 on success, 1 on configuration errors, 2 on runtime failures.
[[nodiscard]] inline int cmd_run(const RunFlags& flags, std::ostream& out, std::ostream& err) {
    RunManifest m;
    try {
        m = resolve_manifest(flags);
    } catch (const ConfigError& e) {
        err << "config error:\n" << e.what() << '\n';
        return 1;
    }
    try {
        execute(m, flags.threads);
    } catch (const std::exception& e) {
        err << "run failed: " << e.what() << '\n';
        return 2;
    }
    out << "wrote results for " << m.runs << " run(s) of scenario " << m.config.scenario.id << " to " << m.out
        << '\n';
    return 0;
}

/// `validate`: prints the effective configuration; 1 with every violation
/// listed when invalid.
[[nodiscard]] inline int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    ExperimentConfig cfg;
    try {
        cfg = parse_config(read_json_file(path));
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return 1;
    }
    out << to_json(cfg).dump(2) << '\n';
    const auto problems = validate(cfg);
    for (const auto& p : problems) err << "invalid: " << p << '\n';
    return problems.empty() ? 0 : 1;
}

}  // namespace ggiwt::cli
