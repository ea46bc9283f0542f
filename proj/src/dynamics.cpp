#include "mcrd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mcrd/fit.hpp"

namespace mcrd {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

double auto_dt(const std::vector<double>& u, const std::vector<double>& v,
               const BistableModel& model) {
    double fumax = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        fumax = std::max(fumax, std::abs(model.f_u(u[i], v[i])));
    return std::min(0.1, 0.5 / std::max(fumax, 1e-12));
}

// Layer threshold fixed for the whole run at the middle root of the Maxwell
// value: the stationary convention at leading order, and immune to the drift
// of the averaged conserved combination during transients.
double layer_threshold(const BistableModel& model) {
    const double v_star = find_vstar(model).v_star;
    return roots_at(model, v_star).h_zero;
}

class ImexStepper {
public:
    ImexStepper(const Grid& grid, double eps, double d, double dt, bool freeze_v)
        : grid_(&grid), dt_(dt), freeze_v_(freeze_v), solve_u_(grid, dt * eps * eps),
          reaction_(grid.n), rhs_(grid.n) {
        if (!freeze_v) solve_v_ = ImplicitDiffusionSolver(grid, dt * d);
    }

    double dt() const { return dt_; }

    void advance(std::vector<double>& u, std::vector<double>& v, const BistableModel& model) {
        const int n = grid_->n;
        for (int i = 0; i < n; ++i) reaction_[i] = model.f(u[i], v[i]);
        for (int i = 0; i < n; ++i) rhs_[i] = u[i] + dt_ * reaction_[i];
        solve_u_.solve(rhs_, u);
        if (freeze_v_) return;
        for (int i = 0; i < n; ++i) rhs_[i] = v[i] - dt_ * reaction_[i];
        solve_v_.solve(rhs_, v);
    }

private:
    const Grid* grid_ = nullptr;
    double dt_;
    bool freeze_v_;
    ImplicitDiffusionSolver solve_u_;
    ImplicitDiffusionSolver solve_v_;
    std::vector<double> reaction_;
    std::vector<double> rhs_;
};

}  // namespace

void step(std::vector<double>& u, std::vector<double>& v, const BistableModel& model, double eps,
          double d, double dt, const Grid& grid) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
    ImexStepper stepper(grid, eps, d, dt, false);
    stepper.advance(u, v, model);
    double umax = 0.0;
    for (double x : u) umax = std::max(umax, std::abs(x));
    if (!(umax < 1e6) || !std::isfinite(umax))
        throw StepRejected("field blow-up after one step (|u|_max = " + fmt(umax) + ")");
}

SimulationTrace simulate(std::vector<double> u, std::vector<double> v, const BistableModel& model,
                         double eps, double d, const Grid& grid, const SimOptions& opt) {
    if (int(u.size()) != grid.n || int(v.size()) != grid.n)
        throw ConfigError("simulate: initial fields do not match the grid");
    SimulationTrace trace;
    double t = 0.0;
    double dt = opt.dt > 0.0 ? opt.dt : auto_dt(u, v, model);
    ImexStepper stepper(grid, eps, d, dt, opt.freeze_v);

    const double threshold = layer_threshold(model);
    double next_record = 0.0, next_snapshot = 0.0;
    int steps_since_reeval = 0;

    auto record = [&]() {
        double mass = 0.0;
        for (int i = 0; i < grid.n; ++i) mass += grid.w[i] * (u[i] + v[i]);
        trace.times.push_back(t);
        trace.mass.push_back(mass);
        trace.layer_x.push_back(locate_crossing(grid.x, u, threshold));
    };
    auto snapshot = [&]() { trace.snapshots.push_back({t, u, v}); };

    record();
    snapshot();
    while (t < opt.t_end - 1e-12) {
        if (opt.dt <= 0.0 && steps_since_reeval >= opt.dt_reeval_steps) {
            const double fresh = auto_dt(u, v, model);
            if (std::abs(fresh - dt) > 0.05 * dt) {
                dt = fresh;
                stepper = ImexStepper(grid, eps, d, dt, opt.freeze_v);
            }
            steps_since_reeval = 0;
        }
        double dt_step = dt;
        const double remaining = opt.t_end - t;
        if (remaining <= dt * (1.0 + 1e-9)) dt_step = remaining;  // single final step
        if (dt_step != dt) {
            ImexStepper last(grid, eps, d, dt_step, opt.freeze_v);
            last.advance(u, v, model);
            t = opt.t_end;
        } else {
            stepper.advance(u, v, model);
            t += dt_step;
        }
        ++steps_since_reeval;
        double umax = 0.0;
        for (double x : u) umax = std::max(umax, std::abs(x));
        if (!(umax < opt.blowup_bound) || !std::isfinite(umax))
            throw StepRejected("field blow-up at t=" + fmt(t) + " (|u|_max = " + fmt(umax) + ")");
        if (opt.record_every <= 0.0 || t + 1e-12 >= next_record + opt.record_every) {
            record();
            next_record = t;
        }
        if (opt.snapshot_every > 0.0 && t + 1e-12 >= next_snapshot + opt.snapshot_every) {
            snapshot();
            next_snapshot = t;
        }
    }
    if (trace.snapshots.back().t != t) snapshot();
    return trace;
}

DecayFit decay_rate_fit(const SimulationTrace& trace, double t_begin, double t_end,
                        double layer_inf) {
    std::vector<double> ts, logd;
    double prev = -1.0;
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
        const double t = trace.times[i];
        if (t < t_begin || t > t_end) continue;
        const double dist = std::abs(trace.layer_x[i] - layer_inf);
        if (dist < 1e-12) continue;  // at the noise floor
        if (prev > 0.0 && dist > 1.25 * prev)
            throw FitFailed("layer distance is not monotone within the fit window (t=" + fmt(t) + ")");
        prev = dist;
        ts.push_back(t);
        logd.push_back(std::log(dist));
    }
    if (ts.size() < 10)
        throw FitFailed("fewer than 10 usable points in the fit window");
    const LinearFit lf = linear_fit(ts, logd);
    return DecayFit{lf.slope, lf.r2};
}

std::pair<std::vector<double>, std::vector<double>> displaced_initial_state(
    const LayerAsymptotics& asym, double eps, const Grid& grid, double shift) {
    const double sign = asym.jump_direction == JumpDirection::Up ? 1.0 : -1.0;
    const double center = asym.x_star + eps * asym.x1 + shift;
    std::vector<double> u(grid.n), v(grid.n);
    for (int i = 0; i < grid.n; ++i) u[i] = asym.q_profile.value_at(sign * (grid.x[i] - center) / eps);
    const double u_mass = grid.integrate(u);
    const double v_const = asym.xi - u_mass;  // uniform second field restores the mass exactly
    for (int i = 0; i < grid.n; ++i) v[i] = v_const;
    return {std::move(u), std::move(v)};
}

std::pair<std::vector<double>, std::vector<double>> ignition_initial_state(
    const LayerAsymptotics& asym, const Grid& grid, double seed_width) {
    if (!(seed_width > 0.0 && seed_width < 1.0))
        throw ConfigError("ignition seed width must lie in (0,1)");
    std::vector<double> u(grid.n), v(grid.n);
    for (int i = 0; i < grid.n; ++i)
        u[i] = grid.x[i] >= 1.0 - seed_width ? asym.h_plus : asym.h_minus;
    const double v_const = asym.xi - grid.integrate(u);
    for (int i = 0; i < grid.n; ++i) v[i] = v_const;
    return {std::move(u), std::move(v)};
}

}  // namespace mcrd
