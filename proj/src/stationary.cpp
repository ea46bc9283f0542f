#include "mcrd/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

namespace mcrd {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::string check_resolution(const StationaryProblem& prob, const StationaryOptions& opt) {
    if (!opt.enforce_resolution) return {};
    const double h = prob.grid.h;
    if (h > 0.5 * prob.eps)
        throw ConfigError("grid spacing h=" + fmt(h) + " exceeds eps/2=" + fmt(0.5 * prob.eps) +
                          "; the layer would be unresolved (need h <= eps/2, advised h <= eps/4)");
    if (h > 0.25 * prob.eps)
        return "grid spacing h=" + fmt(h) + " exceeds the advised eps/4=" + fmt(0.25 * prob.eps);
    return {};
}

double inf_norm(const std::vector<double>& r) {
    double m = 0.0;
    for (double x : r) m = std::max(m, std::abs(x));
    return m;
}

// Bordered Jacobian of the reduced system, assembled sparse: tridiagonal block
// for u, a dense column for c and the mass row at the bottom.
Eigen::SparseMatrix<double> assemble_jacobian(const std::vector<double>& u, double c,
                                              const StationaryProblem& prob) {
    const int n = prob.grid.n;
    const double ih2 = 1.0 / (prob.grid.h * prob.grid.h);
    const double e2 = prob.eps * prob.eps;
    Eigen::SparseMatrix<double> J(n + 1, n + 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(5) * std::size_t(n) + 2);
    for (int i = 0; i < n; ++i) {
        const double vi = (c - e2 * u[i]) / prob.d;
        const double fu = prob.model.f_u(u[i], vi);
        const double fv = prob.model.f_v(u[i], vi);
        const double diag = -2.0 * e2 * ih2 + fu - (e2 / prob.d) * fv;
        trip.emplace_back(i, i, diag);
        if (i == 0) {
            trip.emplace_back(0, 1, 2.0 * e2 * ih2);
        } else if (i == n - 1) {
            trip.emplace_back(n - 1, n - 2, 2.0 * e2 * ih2);
        } else {
            trip.emplace_back(i, i - 1, e2 * ih2);
            trip.emplace_back(i, i + 1, e2 * ih2);
        }
        trip.emplace_back(i, n, fv / prob.d);                            // d/dc
        trip.emplace_back(n, i, (1.0 - e2 / prob.d) * prob.grid.w[i]);   // mass row
    }
    trip.emplace_back(n, n, 1.0 / prob.d);
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
}

}  // namespace

std::vector<double> assemble_residual(const std::vector<double>& u, double c,
                                      const StationaryProblem& prob) {
    const int n = prob.grid.n;
    const double e2 = prob.eps * prob.eps;
    std::vector<double> res(n + 1), lap(n);
    prob.grid.laplacian(u, lap);
    for (int i = 0; i < n; ++i) {
        const double vi = (c - e2 * u[i]) / prob.d;
        res[i] = e2 * lap[i] + prob.model.f(u[i], vi);
    }
    res[n] = c / prob.d + (1.0 - e2 / prob.d) * prob.grid.integrate(u) - prob.xi;
    return res;
}

StationaryState newton_solve(std::vector<double> u, double c, const StationaryProblem& prob,
                             const StationaryOptions& opt) {
    const std::string warning = check_resolution(prob, opt);
    const int n = prob.grid.n;
    if (int(u.size()) != n) throw ConfigError("newton_solve: initial guess does not match the grid");

    std::vector<double> res = assemble_residual(u, c, prob);
    double norm = inf_norm(res);
    int iters = 0;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    while (norm > opt.newton_tol) {
        if (iters >= opt.max_iters)
            throw NewtonDiverged("no convergence after " + std::to_string(opt.max_iters) +
                                 " iterations (residual " + fmt(norm) + ")");
        Eigen::SparseMatrix<double> J = assemble_jacobian(u, c, prob);
        lu.compute(J);
        if (lu.info() != Eigen::Success)
            throw JacobianSingular("LU factorization failed at iteration " + std::to_string(iters) +
                                   " (||J||_inf ~ " + fmt(J.coeffs().abs().maxCoeff()) + ")");
        Eigen::VectorXd rhs(n + 1);
        for (int i = 0; i <= n; ++i) rhs[i] = -res[i];
        Eigen::VectorXd step = lu.solve(rhs);
        if (lu.info() != Eigen::Success) throw JacobianSingular("LU solve failed");

        // Armijo backtracking on the residual norm
        double t = 1.0;
        std::vector<double> u_try(n);
        double c_try;
        std::vector<double> res_try;
        double norm_try;
        while (true) {
            for (int i = 0; i < n; ++i) u_try[i] = u[i] + t * step[i];
            c_try = c + t * step[n];
            res_try = assemble_residual(u_try, c_try, prob);
            norm_try = inf_norm(res_try);
            if (norm_try <= (1.0 - 1e-4 * t) * norm) break;
            t *= 0.5;
            if (t < opt.min_step)
                throw NewtonDiverged("line search stalled at step " + fmt(t) + " (residual " +
                                     fmt(norm) + " -> " + fmt(norm_try) + ")");
        }
        u.swap(u_try);
        c = c_try;
        res.swap(res_try);
        norm = norm_try;
        ++iters;
    }

    StationaryState st;
    st.warning = warning;
    st.u = std::move(u);
    st.c = c;
    st.eps = prob.eps;
    st.d = prob.d;
    st.xi = prob.xi;
    st.residual_norm = norm;
    st.newton_iters = iters;
    const double e2 = prob.eps * prob.eps;
    st.v.resize(n);
    for (int i = 0; i < n; ++i) st.v[i] = (st.c - e2 * st.u[i]) / prob.d;
    double mass = 0.0;
    for (int i = 0; i < n; ++i) mass += prob.grid.w[i] * (st.u[i] + st.v[i]);
    st.mass_error = mass - prob.xi;
    const double v_plateau = st.c / prob.d;
    const double threshold = roots_at(prob.model, v_plateau).h_zero;
    st.layer_x = locate_crossing(prob.grid.x, st.u, threshold);
    if (st.layer_x < 0.0)
        throw NumericalError("converged state has no layer crossing at threshold " + fmt(threshold));
    return st;
}

StationaryState solve_stationary(const LayerAsymptotics& asym, const StationaryProblem& prob,
                                 const StationaryOptions& opt) {
    auto [u0, v0] = leading_order_fields(asym, prob.eps, prob.grid);
    (void)v0;
    return newton_solve(std::move(u0), asym.c0 + prob.eps * asym.c1, prob, opt);
}

std::vector<StationaryState> continuation_in_eps(const BistableModel& model,
                                                 const LayerAsymptotics& asym, double d, double xi,
                                                 const std::vector<double>& eps_desc,
                                                 const std::function<int(double)>& n_for_eps,
                                                 const StationaryOptions& opt) {
    for (std::size_t i = 0; i + 1 < eps_desc.size(); ++i)
        if (!(eps_desc[i] > eps_desc[i + 1]))
            throw ConfigError("continuation_in_eps: eps list must be strictly descending");

    std::vector<StationaryState> states;
    std::vector<double> prev_x, prev_u;
    double prev_c = 0.0;
    for (double eps : eps_desc) {
        const Grid grid = Grid::uniform(n_for_eps(eps));
        const StationaryProblem prob{model, eps, d, xi, grid};
        try {
            if (states.empty()) {
                states.push_back(solve_stationary(asym, prob, opt));
            } else {
                // warm start: previous solution carried onto the new grid
                std::vector<double> u0(grid.n);
                for (int i = 0; i < grid.n; ++i) {
                    const double x = grid.x[i];
                    auto it = std::upper_bound(prev_x.begin(), prev_x.end(), x);
                    const std::size_t k =
                        std::min(prev_x.size() - 2, std::size_t(std::max<long>(0, it - prev_x.begin() - 1)));
                    const double t = (x - prev_x[k]) / (prev_x[k + 1] - prev_x[k]);
                    u0[i] = (1.0 - t) * prev_u[k] + t * prev_u[k + 1];
                }
                states.push_back(newton_solve(std::move(u0), prev_c, prob, opt));
            }
        } catch (const NumericalError& e) {
            throw NewtonDiverged("continuation failed at eps=" + fmt(eps) + ": " + e.what());
        }
        prev_x = grid.x;
        prev_u = states.back().u;
        prev_c = states.back().c;
    }
    return states;
}

AsymptoticDistance distance_to_asymptotics(const StationaryState& state,
                                           const LayerAsymptotics& asym, const Grid& grid,
                                           double sigma) {
    auto [u0, v0] = leading_order_fields(asym, state.eps, grid);
    (void)v0;
    AsymptoticDistance out;
    const double center = asym.x_star + state.eps * asym.x1;
    for (int i = 0; i < grid.n; ++i) {
        const double diff = std::abs(state.u[i] - u0[i]);
        out.sup_all = std::max(out.sup_all, diff);
        if (std::abs(grid.x[i] - asym.x_star) >= sigma) out.sup_outer = std::max(out.sup_outer, diff);
    }
    out.layer_offset = std::abs(state.layer_x - center);
    return out;
}

}  // namespace mcrd
