#pragma once

#include "ggiwt/metrics.hpp"
#include "ggiwt/models.hpp"
#include "ggiwt/phd_update.hpp"
#include "ggiwt/sim.hpp"

#include <json.hpp>

#include <numbers>
#include <string>
#include <vector>

namespace ggiwt {

/// Everything needed to reproduce one experiment.
struct ExperimentConfig {
    ScenarioConfig scenario;
    MotionConfig motion;
    MeasModel meas;
    FilterConfig filter;
    MetricConfig metric;
};

[[nodiscard]] inline GGIWParams default_birth_template() {
    GGIWParams b;
    b.rate = {20.0, 2.0};
    b.kin.mean << 0.0, 0.0, 5.0, 0.0, 0.0;
    Vec5 var;
    var << 4.0, 4.0, 4.0, 0.3 * 0.3, 0.05 * 0.05;
    b.kin.cov = var.asDiagonal();
    b.ext.dof = 20.0;
    b.ext.scale = (b.ext.dof - InverseWishartParams::kMinDof) * 9.0 * Mat2::Identity();
    return b;
}

/// Shipped defaults: the published parameter table plus the values chosen
/// here for birth, clustering and the metric.
[[nodiscard]] inline ExperimentConfig default_config(int scenario_id = 1) {
    constexpr double deg = std::numbers::pi / 180.0;
    ExperimentConfig c;
    c.scenario.id = scenario_id;
    c.motion.Ts = 1.0;
    c.motion.eta = 2.0;
    c.motion.sigma_v = 0.2;
    c.motion.sigma_omega = 0.2 * deg;
    c.motion.n_e = 120.0;
    c.meas.sigma_r = 1.0;
    c.meas.sigma_phi = 0.01 * deg;
    c.meas.rho = 0.75;
    c.filter.clutter_rate = 100.0;
    c.filter.clutter_density = 1.0 / c.scenario.area();
    c.filter.p_detect = 0.99;
    c.filter.p_survival = 0.99;
    c.filter.birth_weight = 0.03;
    c.filter.extract_threshold = 0.5;
    c.filter.prune_T = 1e-3;
    c.filter.merge_U = 5.0;
    c.filter.cap_M = 50;
    c.filter.birth_template = default_birth_template();
    c.motion.tau_ext = tau_ext_from_ne(c.motion.n_e, c.filter.birth_template.ext.dof, c.motion.Ts);
    c.filter.eps_grid = default_eps_grid(c.filter, c.meas.sigma_r);
    return c;
}

// ---- JSON ----

namespace detail {

using nlohmann::json;

inline json to_json_mat(const MatX& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
        rows.push_back(r);
    }
    return rows;
}

template <int R, int C>
Eigen::Matrix<double, R, C> from_json_mat(const json& j, const char* what) {
    Eigen::Matrix<double, R, C> m;
    if (!j.is_array() || j.size() != R) throw Error(std::string(what) + ": expected " + std::to_string(R) + " rows");
    for (int i = 0; i < R; ++i) {
        if (!j[i].is_array() || j[i].size() != C)
            throw Error(std::string(what) + ": expected " + std::to_string(C) + " columns");
        for (int k = 0; k < C; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline json ggiw_to_json(const GGIWParams& g) {
    return {{"alpha", g.rate.alpha},
            {"beta", g.rate.beta},
            {"mean", std::vector<double>(g.kin.mean.data(), g.kin.mean.data() + 5)},
            {"cov", to_json_mat(g.kin.cov)},
            {"dof", g.ext.dof},
            {"scale", to_json_mat(g.ext.scale)}};
}

inline void ggiw_from_json(const json& j, GGIWParams& g) {
    if (j.contains("alpha")) g.rate.alpha = j["alpha"].get<double>();
    if (j.contains("beta")) g.rate.beta = j["beta"].get<double>();
    if (j.contains("mean")) {
        const auto v = j["mean"].get<std::vector<double>>();
        if (v.size() != 5) throw Error("birth mean must have 5 entries");
        for (int i = 0; i < 5; ++i) g.kin.mean(i) = v[static_cast<std::size_t>(i)];
    }
    if (j.contains("cov")) g.kin.cov = from_json_mat<5, 5>(j["cov"], "birth cov");
    if (j.contains("dof")) g.ext.dof = j["dof"].get<double>();
    if (j.contains("scale")) g.ext.scale = from_json_mat<2, 2>(j["scale"], "birth scale");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j[key].get<T>();
}

}  // namespace detail

[[nodiscard]] inline nlohmann::json to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    json persistent = json::array();
    for (const auto& [w, g] : c.filter.persistent_birth) {
        json e = detail::ggiw_to_json(g);
        e["weight"] = w;
        persistent.push_back(e);
    }
    return {
        {"scenario",
         {{"id", c.scenario.id},
          {"x_min", c.scenario.x_min},
          {"x_max", c.scenario.x_max},
          {"y_min", c.scenario.y_min},
          {"y_max", c.scenario.y_max},
          {"num_scans", c.scenario.num_scans},
          {"clutter_rate", c.scenario.clutter_rate},
          {"object_rate", c.scenario.object_rate},
          {"semi_major", c.scenario.semi_major},
          {"semi_minor", c.scenario.semi_minor},
          {"speed", c.scenario.speed}}},
        {"motion",
         {{"Ts", c.motion.Ts},
          {"sigma_v", c.motion.sigma_v},
          {"sigma_omega", c.motion.sigma_omega},
          {"n_e", c.motion.n_e},
          {"eta", c.motion.eta},
          {"tau_ext", c.motion.tau_ext}}},
        {"measurement", {{"sigma_r", c.meas.sigma_r}, {"sigma_phi", c.meas.sigma_phi}, {"rho", c.meas.rho}}},
        {"filter",
         {{"p_survival", c.filter.p_survival},
          {"p_detect", c.filter.p_detect},
          {"clutter_rate", c.filter.clutter_rate},
          {"clutter_density", c.filter.clutter_density},
          {"birth_weight", c.filter.birth_weight},
          {"birth_template", detail::ggiw_to_json(c.filter.birth_template)},
          {"persistent_birth", persistent},
          {"prune_T", c.filter.prune_T},
          {"merge_U", c.filter.merge_U},
          {"cap_M", c.filter.cap_M},
          {"extract_threshold", c.filter.extract_threshold},
          {"gate", c.filter.gate},
          {"eps_grid", c.filter.eps_grid},
          {"lscan", c.filter.lscan}}},
        {"metric",
         {{"cutoff", c.metric.cutoff}, {"order", c.metric.order}, {"switch_penalty", c.metric.switch_penalty}}},
    };
}

/// Applies the keys present in j on top of the defaults for the scenario
/// named in j (or default_scenario). Derived values (clutter density, eps
/// grid, tau_ext) are recomputed unless given explicitly.
[[nodiscard]] inline ExperimentConfig config_from_json(const nlohmann::json& j, int default_scenario = 1) {
    using detail::read;
    const nlohmann::json empty = nlohmann::json::object();
    auto section = [&](const char* key) -> const nlohmann::json& { return j.contains(key) ? j[key] : empty; };

    const auto& js = section("scenario");
    int id = default_scenario;
    read(js, "id", id);
    ExperimentConfig c = default_config(id);
    read(js, "x_min", c.scenario.x_min);
    read(js, "x_max", c.scenario.x_max);
    read(js, "y_min", c.scenario.y_min);
    read(js, "y_max", c.scenario.y_max);
    read(js, "num_scans", c.scenario.num_scans);
    read(js, "clutter_rate", c.scenario.clutter_rate);
    read(js, "object_rate", c.scenario.object_rate);
    read(js, "semi_major", c.scenario.semi_major);
    read(js, "semi_minor", c.scenario.semi_minor);
    read(js, "speed", c.scenario.speed);

    const auto& jm = section("motion");
    read(jm, "Ts", c.motion.Ts);
    read(jm, "sigma_v", c.motion.sigma_v);
    read(jm, "sigma_omega", c.motion.sigma_omega);
    read(jm, "n_e", c.motion.n_e);
    read(jm, "eta", c.motion.eta);

    const auto& jz = section("measurement");
    read(jz, "sigma_r", c.meas.sigma_r);
    read(jz, "sigma_phi", c.meas.sigma_phi);
    read(jz, "rho", c.meas.rho);

    const auto& jf = section("filter");
    read(jf, "p_survival", c.filter.p_survival);
    read(jf, "p_detect", c.filter.p_detect);
    read(jf, "clutter_rate", c.filter.clutter_rate);
    c.filter.clutter_density = 1.0 / c.scenario.area();
    read(jf, "clutter_density", c.filter.clutter_density);
    read(jf, "birth_weight", c.filter.birth_weight);
    if (jf.contains("birth_template")) detail::ggiw_from_json(jf["birth_template"], c.filter.birth_template);
    if (jf.contains("persistent_birth")) {
        for (const auto& e : jf["persistent_birth"]) {
            GGIWParams g = c.filter.birth_template;
            detail::ggiw_from_json(e, g);
            c.filter.persistent_birth.emplace_back(e.value("weight", c.filter.birth_weight), g);
        }
    }
    read(jf, "prune_T", c.filter.prune_T);
    read(jf, "merge_U", c.filter.merge_U);
    read(jf, "cap_M", c.filter.cap_M);
    read(jf, "extract_threshold", c.filter.extract_threshold);
    read(jf, "gate", c.filter.gate);
    read(jf, "lscan", c.filter.lscan);

    if (c.filter.birth_template.ext.valid() && c.motion.n_e > 0.0 && c.motion.Ts > 0.0)
        c.motion.tau_ext = tau_ext_from_ne(c.motion.n_e, c.filter.birth_template.ext.dof, c.motion.Ts);
    read(jm, "tau_ext", c.motion.tau_ext);
    if (c.filter.birth_template.ext.valid() && c.meas.sigma_r > 0.0)
        c.filter.eps_grid = default_eps_grid(c.filter, c.meas.sigma_r);
    read(jf, "eps_grid", c.filter.eps_grid);

    const auto& jr = section("metric");
    read(jr, "cutoff", c.metric.cutoff);
    read(jr, "order", c.metric.order);
    read(jr, "switch_penalty", c.metric.switch_penalty);
    return c;
}

namespace detail {

inline bool spd5(const Mat5& m) {
    if (!m.allFinite() || (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
    return Eigen::LLT<Mat5>(m).info() == Eigen::Success;
}

inline void check_ggiw(const GGIWParams& g, const std::string& what, std::vector<std::string>& out) {
    if (!g.rate.valid()) out.push_back(what + ": gamma alpha and beta must be positive");
    if (!g.kin.mean.allFinite()) out.push_back(what + ": kinematic mean must be finite");
    if (!spd5(g.kin.cov)) out.push_back(what + ": kinematic covariance must be symmetric positive definite");
    if (!(g.ext.dof > InverseWishartParams::kMinDof)) out.push_back(what + ": extent dof must exceed 2d + 2 = 6");
    if (!linalg::is_spd(g.ext.scale)) out.push_back(what + ": extent scale must be symmetric positive definite");
}

}  // namespace detail

/// Every violated invariant, one message each. Empty when valid.
[[nodiscard]] inline std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> v;
    const auto& s = c.scenario;
    if (s.id != 1 && s.id != 2) v.push_back("unknown scenario " + std::to_string(s.id));
    if (!(s.num_scans > 0)) v.push_back("scenario duration must be positive");
    if (!(s.x_min < s.x_max) || !(s.y_min < s.y_max)) v.push_back("surveillance area bounds must be ordered");
    if (!(s.clutter_rate >= 0.0)) v.push_back("scenario clutter rate must be non-negative");
    if (!(s.object_rate >= 0.0)) v.push_back("object measurement rate must be non-negative");
    if (!(s.semi_major > 0.0) || !(s.semi_minor > 0.0)) v.push_back("object semi-axes must be positive");

    const auto& m = c.motion;
    if (!(m.Ts > 0.0)) v.push_back("sampling period Ts must be positive");
    if (!(m.eta > 1.0)) v.push_back("forgetting factor eta must exceed 1");
    if (!(m.n_e > 0.0)) v.push_back("extent transition dof n_e must be positive");
    if (!(m.tau_ext > 0.0)) v.push_back("extent forgetting time constant must be positive");
    if (!(m.sigma_v >= 0.0) || !(m.sigma_omega >= 0.0)) v.push_back("process noise deviations must be non-negative");

    const auto& z = c.meas;
    if (!(z.sigma_r > 0.0) || !(z.sigma_phi > 0.0)) v.push_back("measurement noise deviations must be positive");
    if (!(z.rho > 0.0 && z.rho <= 1.0)) v.push_back("extent scaling rho must lie in (0, 1]");

    const auto& f = c.filter;
    if (!(f.p_survival > 0.0 && f.p_survival <= 1.0)) v.push_back("survival probability must lie in (0, 1]");
    if (!(f.p_detect > 0.0 && f.p_detect <= 1.0)) v.push_back("detection probability must lie in (0, 1]");
    if (!(f.clutter_rate > 0.0)) v.push_back("filter clutter rate must be positive");
    if (!(f.clutter_density > 0.0)) v.push_back("clutter density must be positive");
    if (!(f.birth_weight > 0.0)) v.push_back("birth weight must be positive");
    if (!(f.prune_T > 0.0)) v.push_back("prune threshold prune_T must be positive");
    if (!(f.merge_U > 0.0)) v.push_back("merge threshold must be positive");
    if (!(f.cap_M >= 1)) v.push_back("capping threshold must be at least 1");
    if (!(f.extract_threshold > 0.0)) v.push_back("extraction threshold must be positive");
    if (!(f.gate > 0.0)) v.push_back("gate must be positive");
    if (f.eps_grid.empty()) v.push_back("eps grid must not be empty");
    for (std::size_t i = 0; i < f.eps_grid.size(); ++i) {
        if (!(f.eps_grid[i] > 0.0)) v.push_back("eps grid values must be positive");
        if (i > 0 && f.eps_grid[i] < f.eps_grid[i - 1]) v.push_back("eps grid must be sorted ascending");
    }
    detail::check_ggiw(f.birth_template, "birth template", v);
    for (const auto& [w, g] : f.persistent_birth) {
        if (!(w > 0.0)) v.push_back("persistent birth weight must be positive");
        detail::check_ggiw(g, "persistent birth", v);
    }

    const auto& r = c.metric;
    if (!(r.cutoff > 0.0)) v.push_back("metric cutoff must be positive");
    if (!(r.order >= 1.0)) v.push_back("metric order must be at least 1");
    if (!(r.switch_penalty >= 0.0)) v.push_back("switch penalty must be non-negative");
    return v;
}

}  // namespace ggiwt
