#include "mcrd/config.hpp"

#include <algorithm>
#include <set>

#include "mcrd/spectrum.hpp"

namespace mcrd {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double num(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError("'" + key + "' must be a number");
    return j[key].get<double>();
}

}  // namespace

BistableModel RunConfig::make_model() const {
    if (model_name == "cubic") return BistableModel::cubic(alpha, beta);
    if (model_name == "hill") return BistableModel::hill(kappa);
    throw ConfigError("model.name must be 'cubic' or 'hill' (custom models are library-only), got '" +
                      model_name + "'");
}

double RunConfig::eps() const {
    if (eps_list.size() != 1)
        throw ConfigError("this command needs a single 'eps'; got a list of " +
                          std::to_string(eps_list.size()));
    return eps_list.front();
}

int RunConfig::grid_for(double eps_value) const {
    if (grid_n > 0) return grid_n;
    return int(std::ceil(4.0 / eps_value)) + 1;
}

EigMethod RunConfig::eig_method() const {
    if (spectrum.method == "auto") return EigMethod::Auto;
    if (spectrum.method == "dense") return EigMethod::Dense;
    if (spectrum.method == "shift-invert") return EigMethod::ShiftInvert;
    throw ConfigError("spectrum.method must be auto|dense|shift-invert");
}

RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown(j,
                   {"model", "d", "xi", "eps", "eps_list", "grid_n", "direction", "maxwell_index",
                    "tolerances", "asymptotics", "spectrum", "simulate", "sweep"},
                   "config");
    RunConfig c;

    if (!j.contains("model") || !j["model"].is_object())
        throw ConfigError("config requires a 'model' object");
    const json& m = j["model"];
    reject_unknown(m, {"name", "params"}, "model");
    if (!m.contains("name") || !m["name"].is_string())
        throw ConfigError("model.name must be a string");
    c.model_name = m["name"].get<std::string>();
    const json params = m.value("params", json::object());
    if (c.model_name == "cubic") {
        reject_unknown(params, {"alpha", "beta"}, "model.params");
        c.alpha = num(params, "alpha", c.alpha);
        c.beta = num(params, "beta", c.beta);
    } else if (c.model_name == "hill") {
        reject_unknown(params, {"kappa"}, "model.params");
        c.kappa = num(params, "kappa", c.kappa);
    } else {
        throw ConfigError("model.name must be 'cubic' or 'hill', got '" + c.model_name + "'");
    }
    (void)c.make_model();  // validates parameter ranges

    c.d = num(j, "d", c.d);
    if (!(c.d > 0.0)) throw ConfigError("'d' must be positive");
    c.xi = num(j, "xi", c.xi);
    if (j.contains("eps") && j.contains("eps_list"))
        throw ConfigError("give either 'eps' or 'eps_list', not both");
    if (j.contains("eps_list")) {
        if (!j["eps_list"].is_array() || j["eps_list"].empty())
            throw ConfigError("'eps_list' must be a non-empty array");
        for (const auto& e : j["eps_list"]) c.eps_list.push_back(e.get<double>());
    } else {
        c.eps_list.push_back(num(j, "eps", 0.01));
    }
    for (double e : c.eps_list)
        if (!(e > 0.0)) throw ConfigError("every eps must be positive");
    c.grid_n = int(num(j, "grid_n", 0));
    if (j.contains("direction")) {
        const std::string dir = j["direction"].get<std::string>();
        if (dir == "up")
            c.direction = JumpDirection::Up;
        else if (dir == "down")
            c.direction = JumpDirection::Down;
        else
            throw ConfigError("direction must be 'up' or 'down'");
    }
    if (j.contains("maxwell_index")) c.maxwell_index = j["maxwell_index"].get<int>();

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t,
                       {"root_residual", "quadrature_abs", "bisection_interval", "fold_margin_rel",
                        "scan_margin_rel", "newton_tol", "newton_max_iters"},
                       "tolerances");
        c.tolerances.root_residual = num(t, "root_residual", c.tolerances.root_residual);
        c.tolerances.quadrature_abs = num(t, "quadrature_abs", c.tolerances.quadrature_abs);
        c.tolerances.bisection_interval = num(t, "bisection_interval", c.tolerances.bisection_interval);
        c.tolerances.fold_margin_rel = num(t, "fold_margin_rel", c.tolerances.fold_margin_rel);
        c.tolerances.scan_margin_rel = num(t, "scan_margin_rel", c.tolerances.scan_margin_rel);
        c.stationary.newton_tol = num(t, "newton_tol", c.stationary.newton_tol);
        c.stationary.max_iters = int(num(t, "newton_max_iters", c.stationary.max_iters));
    }
    c.asymptotics.model_tol = c.tolerances;
    if (j.contains("asymptotics")) {
        const json& a = j["asymptotics"];
        reject_unknown(a, {"z_half_width", "profile_points"}, "asymptotics");
        c.asymptotics.z_half_width = num(a, "z_half_width", c.asymptotics.z_half_width);
        c.asymptotics.profile_points = int(num(a, "profile_points", c.asymptotics.profile_points));
    }
    if (j.contains("spectrum")) {
        const json& s = j["spectrum"];
        reject_unknown(s, {"re_min", "count", "method"}, "spectrum");
        c.spectrum.re_min = num(s, "re_min", c.spectrum.re_min);
        c.spectrum.count = int(num(s, "count", c.spectrum.count));
        if (s.contains("method")) c.spectrum.method = s["method"].get<std::string>();
        (void)c.eig_method();
    }
    if (j.contains("simulate")) {
        const json& s = j["simulate"];
        reject_unknown(s,
                       {"t_end", "dt", "snapshot_every", "record_every", "initial", "displacement",
                        "seed_width", "fit_t_begin", "freeze_v"},
                       "simulate");
        c.simulate.t_end = num(s, "t_end", c.simulate.t_end);
        c.simulate.dt = num(s, "dt", c.simulate.dt);
        c.simulate.snapshot_every = num(s, "snapshot_every", c.simulate.snapshot_every);
        c.simulate.record_every = num(s, "record_every", c.simulate.record_every);
        if (s.contains("initial")) c.simulate.initial = s["initial"].get<std::string>();
        if (c.simulate.initial != "stationary" && c.simulate.initial != "displaced" &&
            c.simulate.initial != "ignition")
            throw ConfigError("simulate.initial must be stationary|displaced|ignition");
        c.simulate.displacement = num(s, "displacement", c.simulate.displacement);
        c.simulate.seed_width = num(s, "seed_width", c.simulate.seed_width);
        c.simulate.fit_t_begin = num(s, "fit_t_begin", c.simulate.fit_t_begin);
        if (s.contains("freeze_v")) c.simulate.freeze_v = s["freeze_v"].get<bool>();
    }
    if (j.contains("sweep")) {
        const json& s = j["sweep"];
        reject_unknown(s, {"axes", "command"}, "sweep");
        if (s.contains("command")) c.sweep.command = s["command"].get<std::string>();
        if (!s.contains("axes") || !s["axes"].is_object() || s["axes"].empty())
            throw ConfigError("sweep.axes must be a non-empty object");
        for (auto it = s["axes"].begin(); it != s["axes"].end(); ++it) {
            if (!it.value().is_array() || it.value().empty())
                throw ConfigError("sweep axis '" + it.key() + "' must be a non-empty array");
            std::vector<double> vals;
            for (const auto& v : it.value()) vals.push_back(v.get<double>());
            c.sweep.axes.emplace_back(it.key(), std::move(vals));
        }
        std::sort(c.sweep.axes.begin(), c.sweep.axes.end());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_json_file(path));
}

json RunConfig::resolved() const {
    json params;
    if (model_name == "cubic") {
        params = {{"alpha", alpha}, {"beta", beta}};
    } else {
        params = {{"kappa", kappa}};
    }
    json j = {
        {"model", {{"name", model_name}, {"params", params}}},
        {"d", d},
        {"xi", xi},
        {"grid_n", grid_n},
        {"direction", direction == JumpDirection::Up ? "up" : "down"},
        {"tolerances",
         {{"root_residual", tolerances.root_residual},
          {"quadrature_abs", tolerances.quadrature_abs},
          {"bisection_interval", tolerances.bisection_interval},
          {"fold_margin_rel", tolerances.fold_margin_rel},
          {"scan_margin_rel", tolerances.scan_margin_rel},
          {"newton_tol", stationary.newton_tol},
          {"newton_max_iters", stationary.max_iters}}},
        {"asymptotics",
         {{"z_half_width", asymptotics.z_half_width},
          {"profile_points", asymptotics.profile_points}}},
        {"spectrum",
         {{"re_min", spectrum.re_min}, {"count", spectrum.count}, {"method", spectrum.method}}},
        {"simulate",
         {{"t_end", simulate.t_end},
          {"dt", simulate.dt},
          {"snapshot_every", simulate.snapshot_every},
          {"record_every", simulate.record_every},
          {"initial", simulate.initial},
          {"displacement", simulate.displacement},
          {"seed_width", simulate.seed_width},
          {"fit_t_begin", simulate.fit_t_begin},
          {"freeze_v", simulate.freeze_v}}},
    };
    if (eps_list.size() == 1)
        j["eps"] = eps_list.front();
    else
        j["eps_list"] = eps_list;
    if (maxwell_index) j["maxwell_index"] = *maxwell_index;
    if (!sweep.axes.empty()) {
        json axes = json::object();
        for (const auto& [k, v] : sweep.axes) axes[k] = v;
        j["sweep"] = {{"axes", axes}, {"command", sweep.command}};
    }
    return j;
}

}  // namespace mcrd
