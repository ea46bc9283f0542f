#include "mcrd/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "mcrd/dynamics.hpp"
#include "mcrd/spectrum.hpp"

namespace mcrd {

namespace fs = std::filesystem;

namespace {

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void say(std::ostream* log, const std::string& msg) {
    if (log) *log << msg << "\n";
}

json model_json(const RunConfig& cfg) {
    json params;
    if (cfg.model_name == "cubic")
        params = {{"alpha", cfg.alpha}, {"beta", cfg.beta}};
    else
        params = {{"kappa", cfg.kappa}};
    return {{"name", cfg.model_name}, {"params", params}};
}

void finish(const RunConfig& cfg, const fs::path& out, json summary, const Stopwatch& clock) {
    std::string err;
    summary["model"] = model_json(cfg);
    if (!validate_summary(summary, &err)) throw Error("internal: summary schema violation: " + err);
    write_json_file(out / "config.resolved.json", cfg.resolved());
    write_json_file(out / "summary.json", summary);
    write_json_file(out / "meta.json", json{{"wall_seconds", clock.seconds()}});
}

AsymptoticsOptions asym_options(const RunConfig& cfg) {
    AsymptoticsOptions opt = cfg.asymptotics;
    opt.model_tol = cfg.tolerances;
    opt.maxwell_select = cfg.maxwell_index;
    return opt;
}

LayerAsymptotics analyze(const RunConfig& cfg, const BistableModel& model) {
    return compute_layer_asymptotics(model, cfg.d, cfg.xi, cfg.direction, asym_options(cfg));
}

std::string verdict_for(double jprime) {
    return jprime > 0.0 ? "predicted stable (J'(v*) > 0)"
                        : "not proven stable (J'(v*) < 0): instability is conjectural";
}

json spectrum_json(const SpectrumResult& sp) {
    return {{"critical_re", sp.critical.real()},
            {"critical_im", sp.critical.imag()},
            {"second_gap", sp.second_gap},
            {"mu0_scalar", sp.mu0_scalar},
            {"mass_mode_lambda", sp.mass_mode_lambda},
            {"mass_mode_functional", sp.mass_mode_functional},
            {"computed_stable", sp.critical.real() < 0.0}};
}

}  // namespace

int cmd_check(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
    Stopwatch clock;
    const BistableModel model = cfg.make_model();
    const AssumptionReport rep = verify_assumptions(model, 64, cfg.tolerances);
    json samples = json::array();
    for (const auto& [v, margin] : rep.samples) samples.push_back({v, margin});
    json summary = {{"command", "check"},
                    {"j_at_lower_fold", maxwell_integral_at_fold(model, FoldSide::Lower, cfg.tolerances)},
                    {"j_at_upper_fold", maxwell_integral_at_fold(model, FoldSide::Upper, cfg.tolerances)},
                    {"report",
                     {{"a1_holds", rep.a1_holds},
                      {"a2_holds", rep.a2_holds},
                      {"v_star", rep.v_star},
                      {"j_prime_at_vstar", rep.j_prime_at_vstar},
                      {"a3_holds", rep.a3_holds},
                      {"min_margin", rep.min_margin},
                      {"samples", samples},
                      {"failures", rep.failures}}}};
    finish(cfg, out, std::move(summary), clock);
    if (rep.all_hold()) {
        say(log, "assumptions hold; v* = " + format_full(rep.v_star) +
                     ", J'(v*) = " + format_full(rep.j_prime_at_vstar));
        return kExitOk;
    }
    say(log, "assumption check FAILED; see summary.json");
    return kExitAssumption;
}

int cmd_analyze(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
    Stopwatch clock;
    const BistableModel model = cfg.make_model();
    const LayerAsymptotics a = analyze(cfg, model);
    const auto [xi_lo, xi_hi] = admissible_xi_range(model, a.v_star, cfg.tolerances);
    std::vector<std::vector<double>> rows(a.q_profile.zeta.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        rows[i] = {a.q_profile.zeta[i], a.q_profile.q[i], a.q_profile.q_prime[i]};
    write_table(out / "profiles" / "q_profile.csv", {"zeta", "q", "q_prime"}, rows);

    json summary = {{"command", "analyze"},
                    {"v_star", a.v_star},
                    {"h_minus", a.h_minus},
                    {"h_zero", a.h_zero},
                    {"h_plus", a.h_plus},
                    {"x_star", a.x_star},
                    {"x1", a.x1},
                    {"c0", a.c0},
                    {"c1", a.c1},
                    {"kappa_star", a.kappa_star},
                    {"jprime_vstar", a.jprime_vstar},
                    {"lambda_slope", a.lambda_slope},
                    {"direction", a.jump_direction == JumpDirection::Up ? "up" : "down"},
                    {"admissible_xi", {xi_lo, xi_hi}},
                    {"j_at_lower_fold", maxwell_integral_at_fold(model, FoldSide::Lower, cfg.tolerances)},
                    {"j_at_upper_fold", maxwell_integral_at_fold(model, FoldSide::Upper, cfg.tolerances)},
                    {"verdict", verdict_for(a.jprime_vstar)}};
    finish(cfg, out, std::move(summary), clock);
    say(log, "x* = " + format_full(a.x_star) + ", v* = " + format_full(a.v_star));
    say(log, verdict_for(a.jprime_vstar));
    return kExitOk;
}

int cmd_solve(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
    Stopwatch clock;
    const BistableModel model = cfg.make_model();
    const LayerAsymptotics a = analyze(cfg, model);
    auto n_rule = [&](double e) { return cfg.grid_for(e); };

    std::vector<StationaryState> states;
    if (cfg.eps_list.size() == 1) {
        const Grid grid = Grid::uniform(n_rule(cfg.eps()));
        states.push_back(
            solve_stationary(a, StationaryProblem{model, cfg.eps(), cfg.d, cfg.xi, grid}, cfg.stationary));
    } else {
        states = continuation_in_eps(model, a, cfg.d, cfg.xi, cfg.eps_list, n_rule, cfg.stationary);
    }

    json continuation = json::array();
    for (std::size_t i = 0; i < states.size(); ++i) {
        const StationaryState& st = states[i];
        const Grid grid = Grid::uniform(n_rule(st.eps));
        std::ostringstream name;
        name << "solution_" << std::setw(3) << std::setfill('0') << i << ".csv";
        write_profile(out / "profiles" / name.str(), grid.x, st.u, st.v);
        const AsymptoticDistance dist = distance_to_asymptotics(st, a, grid);
        continuation.push_back({{"eps", st.eps},
                                {"n", grid.n},
                                {"c", st.c},
                                {"layer_x", st.layer_x},
                                {"residual_norm", st.residual_norm},
                                {"mass_error", st.mass_error},
                                {"newton_iters", st.newton_iters},
                                {"sup_all", dist.sup_all},
                                {"sup_outer", dist.sup_outer},
                                {"layer_offset", dist.layer_offset},
                                {"profile", "profiles/" + name.str()}});
        if (!st.warning.empty()) say(log, "warning: " + st.warning);
    }
    const StationaryState& last = states.back();
    json summary = {{"command", "solve"},       {"eps", last.eps},
                    {"c", last.c},              {"layer_x", last.layer_x},
                    {"residual_norm", last.residual_norm}, {"mass_error", last.mass_error},
                    {"newton_iters", last.newton_iters},   {"x_star", a.x_star},
                    {"x1", a.x1},               {"solutions", continuation}};
    finish(cfg, out, std::move(summary), clock);
    say(log, "layer_x = " + format_full(last.layer_x) + " at eps = " + format_full(last.eps));
    return kExitOk;
}

int cmd_spectrum(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
    Stopwatch clock;
    const BistableModel model = cfg.make_model();
    const LayerAsymptotics a = analyze(cfg, model);
    auto n_rule = [&](double e) { return cfg.grid_for(e); };
    const SpectrumWindow window{cfg.spectrum.re_min, cfg.spectrum.count};

    if (cfg.eps_list.size() == 2)
        throw ConfigError("spectrum scaling studies need at least three eps entries");
    json summary = {{"command", "spectrum"}, {"lambda_slope_predicted", a.lambda_slope}};
    if (cfg.eps_list.size() >= 3) {
        const ScalingFit fit =
            scaling_study(model, a, cfg.d, cfg.xi, cfg.eps_list, n_rule, window, cfg.eig_method());
        std::vector<std::vector<double>> rows;
        for (const auto& row : fit.table) {
            if (!row.error.empty()) continue;
            rows.push_back({row.eps, row.lambda_crit.real(), row.lambda_crit.imag(),
                            row.lambda_over_eps, row.mu0, double(row.n)});
        }
        write_table(out / "spectra" / "scaling.csv",
                    {"eps", "lambda_re", "lambda_im", "lambda_over_eps", "mu0", "n"}, rows);
        json errors = json::array();
        for (const auto& row : fit.table)
            if (!row.error.empty()) errors.push_back({{"eps", row.eps}, {"error", row.error}});
        const auto& smallest = fit.table.back();
        summary["slope"] = fit.slope;
        summary["r2"] = fit.r2;
        summary["critical_re"] = smallest.lambda_crit.real();
        summary["critical_im"] = smallest.lambda_crit.imag();
        summary["mu0_scalar"] = smallest.mu0;
        summary["entry_errors"] = errors;
        say(log, "extrapolated lambda/eps = " + format_full(fit.slope) + " (predicted " +
                     format_full(fit.predicted) + ")");
    } else {
        const Grid grid = Grid::uniform(n_rule(cfg.eps()));
        const StationaryState st =
            solve_stationary(a, StationaryProblem{model, cfg.eps(), cfg.d, cfg.xi, grid}, cfg.stationary);
        const LinearizedOperator op = assemble_linearization(st, grid, model);
        const SpectrumResult sp = constrained_spectrum(op, window, cfg.eig_method());
        std::vector<std::vector<double>> rows;
        json pairs = json::array(), mass = json::array();
        for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) {
            rows.push_back(
                {sp.eigenvalues[i].real(), sp.eigenvalues[i].imag(), sp.mass_functionals[i]});
            pairs.push_back({sp.eigenvalues[i].real(), sp.eigenvalues[i].imag()});
            mass.push_back(sp.mass_functionals[i]);
        }
        write_table(out / "spectra" / "eigenvalues.csv", {"re", "im", "mass_functional"}, rows);
        summary.update(spectrum_json(sp));
        summary["eigenvalues"] = pairs;
        summary["mass_functionals"] = mass;
        say(log, "critical eigenvalue = " + format_full(sp.critical.real()));
    }
    summary["verdict"] = verdict_for(a.jprime_vstar);
    finish(cfg, out, std::move(summary), clock);
    return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
    Stopwatch clock;
    const BistableModel model = cfg.make_model();
    const LayerAsymptotics a = analyze(cfg, model);
    const double eps = cfg.eps();
    const Grid grid = Grid::uniform(cfg.grid_for(eps));
    const StationaryProblem prob{model, eps, cfg.d, cfg.xi, grid};
    const StationaryState st = solve_stationary(a, prob, cfg.stationary);

    std::vector<double> u0, v0;
    if (cfg.simulate.initial == "stationary") {
        u0 = st.u;
        v0 = st.v;
    } else if (cfg.simulate.initial == "displaced") {
        std::tie(u0, v0) = displaced_initial_state(a, eps, grid, cfg.simulate.displacement);
    } else {
        std::tie(u0, v0) = ignition_initial_state(a, grid, cfg.simulate.seed_width);
    }
    if (cfg.simulate.freeze_v) v0.assign(grid.n, a.v_star);

    SimOptions opt;
    opt.t_end = cfg.simulate.t_end;
    opt.dt = cfg.simulate.dt;
    opt.snapshot_every = cfg.simulate.snapshot_every;
    opt.record_every = cfg.simulate.record_every;
    opt.freeze_v = cfg.simulate.freeze_v;
    const SimulationTrace tr = simulate(std::move(u0), std::move(v0), model, eps, cfg.d, grid, opt);

    std::vector<std::vector<double>> rows(tr.times.size());
    for (std::size_t i = 0; i < tr.times.size(); ++i)
        rows[i] = {tr.times[i], tr.mass[i], tr.layer_x[i]};
    write_table(out / "traces" / "trace.csv", {"t", "mass", "layer_x"}, rows);
    for (std::size_t i = 0; i < tr.snapshots.size(); ++i) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(4) << std::setfill('0') << i << ".csv";
        write_profile(out / "traces" / name.str(), grid.x, tr.snapshots[i].u, tr.snapshots[i].v);
    }

    double mass_drift = 0.0;
    for (double m : tr.mass) mass_drift = std::max(mass_drift, std::abs(m - cfg.xi));
    json summary = {{"command", "simulate"},
                    {"t_end", cfg.simulate.t_end},
                    {"initial", cfg.simulate.initial},
                    {"mass_drift", mass_drift},
                    {"layer_final", tr.layer_x.back()},
                    {"layer_stationary", st.layer_x},
                    // multiply t by this to read the trace on the fast time scale
                    {"time_rescale_factor", 1.0 / eps}};
    if (cfg.simulate.initial == "displaced") {
        try {
            const DecayFit fit =
                decay_rate_fit(tr, cfg.simulate.fit_t_begin, cfg.simulate.t_end, st.layer_x);
            summary["decay_rate"] = fit.rate;
            summary["decay_r2"] = fit.r2;
        } catch (const FitFailed& e) {
            summary["decay_fit_error"] = e.what();
        }
    }
    finish(cfg, out, std::move(summary), clock);
    say(log, "simulated to t = " + format_full(cfg.simulate.t_end) +
                 "; max |mass - xi| = " + format_full(mass_drift));
    return kExitOk;
}

namespace {

json apply_override(json raw, const std::string& path, double value) {
    json* node = &raw;
    std::size_t start = 0;
    while (true) {
        const std::size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot - start);
        if (key.empty()) throw ConfigError("empty segment in sweep axis path '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return raw;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

}  // namespace

int cmd_sweep(const json& raw_config, const fs::path& out, int workers, std::ostream* log) {
    Stopwatch clock;
    const RunConfig base = parse_config(raw_config);
    if (base.sweep.axes.empty()) throw ConfigError("sweep requires a 'sweep.axes' block");
    const std::string inner = base.sweep.command;
    if (inner == "sweep") throw ConfigError("sweep cannot nest");

    // cartesian product, axes in sorted-name order
    std::vector<std::vector<std::pair<std::string, double>>> combos{{}};
    for (const auto& [name, values] : base.sweep.axes) {
        std::vector<std::vector<std::pair<std::string, double>>> next;
        for (const auto& combo : combos)
            for (double v : values) {
                auto candidate = combo;
                candidate.emplace_back(name, v);
                next.push_back(std::move(candidate));
            }
        combos = std::move(next);
    }

    json strip = raw_config;
    strip.erase("sweep");

    struct RunOutcome {
        json entry;
        int code = 0;
    };
    std::vector<RunOutcome> outcomes(combos.size());
    std::atomic<std::size_t> cursor{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= combos.size()) return;
            std::ostringstream key;
            key << "run_" << std::setw(4) << std::setfill('0') << i;
            json overrides = json::object();
            json cfg_json = strip;
            for (const auto& [path, value] : combos[i]) {
                cfg_json = apply_override(std::move(cfg_json), path, value);
                overrides[path] = value;
            }
            RunOutcome& slot = outcomes[i];
            slot.entry = {{"key", key.str()}, {"overrides", overrides}};
            const fs::path run_dir = out / "runs" / key.str();
            try {
                slot.code = run_command(inner, cfg_json, run_dir, 1, nullptr);
            } catch (const std::exception& e) {
                slot.code = kExitNumerical;
                slot.entry["error"] = e.what();
            }
            slot.entry["exit_code"] = slot.code;
            if (slot.code == 0) slot.entry["summary"] = "runs/" + key.str() + "/summary.json";
        }
    };
    const int pool = std::max(1, std::min<int>(workers, int(combos.size())));
    std::vector<std::thread> threads;
    for (int k = 1; k < pool; ++k) threads.emplace_back(work);
    work();
    for (auto& th : threads) th.join();

    int failures = 0;
    json runs = json::array();
    for (const auto& oc : outcomes) {
        failures += oc.code == 0 ? 0 : 1;
        runs.push_back(oc.entry);
    }
    write_json_file(out / "index.json", json{{"command", inner}, {"runs", runs}});
    json summary = {{"command", "sweep"}, {"runs", runs.size()}, {"failures", failures}};
    summary["model"] = json{{"name", base.model_name}, {"params", json::object()}};
    std::string err;
    if (!validate_summary(summary, &err)) throw Error("internal: summary schema violation: " + err);
    write_json_file(out / "config.resolved.json", base.resolved());
    write_json_file(out / "summary.json", summary);
    write_json_file(out / "meta.json", json{{"wall_seconds", clock.seconds()}});
    say(log, std::to_string(combos.size()) + " runs, " + std::to_string(failures) + " failures");
    return failures == 0 ? kExitOk : kExitNumerical;
}

int run_command(const std::string& name, const json& raw_config, const fs::path& out, int workers,
                std::ostream* log) {
    try {
        if (name == "sweep") return cmd_sweep(raw_config, out, workers, log);
        const RunConfig cfg = parse_config(raw_config);
        if (name == "check") return cmd_check(cfg, out, log);
        if (name == "analyze") return cmd_analyze(cfg, out, log);
        if (name == "solve") return cmd_solve(cfg, out, log);
        if (name == "spectrum") return cmd_spectrum(cfg, out, log);
        if (name == "simulate") return cmd_simulate(cfg, out, log);
        throw ConfigError("unknown command '" + name + "'");
    } catch (const ConfigError& e) {
        say(log, std::string("config error: ") + e.what());
        return kExitConfig;
    } catch (const AssumptionError& e) {
        say(log, std::string("assumption failure: ") + e.what());
        return kExitAssumption;
    } catch (const Error& e) {
        say(log, std::string("numerical failure: ") + e.what());
        return kExitNumerical;
    }
}

}  // namespace mcrd
