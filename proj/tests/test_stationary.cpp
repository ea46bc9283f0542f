#include "mcrd/stationary.hpp"

#include <cmath>

#include "doctest.h"
#include "mcrd/fit.hpp"

using namespace mcrd;

namespace {

int n_quarter(double eps) { return int(std::ceil(4.0 / eps)) + 1; }

LayerAsymptotics hill_asym(JumpDirection dir = JumpDirection::Up) {
    AsymptoticsOptions opt;
    return compute_layer_asymptotics(BistableModel::hill(0.067), 1.0, 2.3, dir, opt);
}

LayerAsymptotics cubic_asym(double beta, double xi, JumpDirection dir = JumpDirection::Up) {
    AsymptoticsOptions opt;
    return compute_layer_asymptotics(BistableModel::cubic(0.2, beta), 1.0, xi, dir, opt);
}

}  // namespace

TEST_CASE("grid: weights sum to one and annihilate the laplacian") {
    for (int n : {3, 64, 1001}) {
        const Grid g = Grid::uniform(n);
        double sum = 0.0;
        for (double w : g.w) sum += w;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
        std::vector<double> u(n), lap(n);
        for (int i = 0; i < n; ++i) u[i] = std::cos(7.0 * g.x[i]) + 0.3 * g.x[i] * g.x[i];
        g.laplacian(u, lap);
        double divergence = 0.0;
        for (int i = 0; i < n; ++i) divergence += g.w[i] * lap[i];
        CHECK(std::abs(divergence) <= 1e-10 / (g.h * g.h) * 1e-6);
    }
}

TEST_CASE("assemble_residual: constant fields") {
    auto m = BistableModel::cubic(0.2, 0.5);
    const Grid g = Grid::uniform(101);
    const double eps = 0.05, d = 1.0, xi = 0.35;
    const StationaryProblem prob{m, eps, d, xi, g};
    // u constant at the lower root of v_hat, c consistent with v_hat
    const double v_hat = 0.1;
    const double h_minus = roots_at(m, v_hat).h_minus;
    const double c = d * v_hat + eps * eps * h_minus;
    std::vector<double> u(g.n, h_minus);
    const auto res = assemble_residual(u, c, prob);
    for (int i = 0; i < g.n; ++i) CHECK(std::abs(res[i]) <= 1e-12);
    // the last row measures the mass mismatch of the constant state
    const double expected = c / d + (1.0 - eps * eps / d) * h_minus - xi;
    CHECK(res[g.n] == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("assemble_residual: asymptotic guess residual decays with eps") {
    const LayerAsymptotics a = hill_asym();
    auto m = BistableModel::hill(0.067);
    std::vector<double> eps_list{0.04, 0.02, 0.01}, lx, ly;
    for (double eps : eps_list) {
        const Grid g = Grid::uniform(4097);  // fixed fine grid; h << eps/4
        const StationaryProblem prob{m, eps, 1.0, 2.3, g};
        auto [u0, v0] = leading_order_fields(a, eps, g);
        (void)v0;
        const auto res = assemble_residual(u0, a.c0, prob);
        double norm = 0.0;
        for (double r : res) norm = std::max(norm, std::abs(r));
        lx.push_back(std::log(eps));
        ly.push_back(std::log(norm));
    }
    // contract says O(eps); the slaving term makes the measured order ~2
    const LinearFit fit = linear_fit(lx, ly);
    CHECK(fit.slope >= 0.9);
    CHECK(std::exp(ly.back()) < std::exp(ly.front()));
}

TEST_CASE("newton_solve: first figure configuration") {
    const LayerAsymptotics a = cubic_asym(0.5, 0.35);
    const Grid g = Grid::uniform(4096);
    const StationaryProblem prob{BistableModel::cubic(0.2, 0.5), 0.01, 1.0, 0.35, g};
    const StationaryState st = solve_stationary(a, prob);
    CHECK(std::abs(st.layer_x - 0.650) <= 2e-3);
    CHECK(std::abs(st.v.front()) <= 2e-3);
    CHECK(std::abs(st.v.back()) <= 2e-3);
    CHECK(st.residual_norm <= 1e-11);
    CHECK(std::abs(st.mass_error) <= 1e-10);
    CHECK(st.newton_iters <= 10);
    // fixed point: re-assembled residual stays at tolerance
    const auto res = assemble_residual(st.u, st.c, prob);
    double norm = 0.0;
    for (double r : res) norm = std::max(norm, std::abs(r));
    CHECK(norm <= 1e-11);
}

TEST_CASE("newton_solve: hill configuration") {
    const LayerAsymptotics a = hill_asym();
    const Grid g = Grid::uniform(n_quarter(0.01));
    const StationaryProblem prob{BistableModel::hill(0.067), 0.01, 1.0, 2.3, g};
    const StationaryState st = solve_stationary(a, prob);
    CHECK(std::abs(st.layer_x - 0.660) <= 5e-3);
    CHECK(std::abs(st.v.front() - 1.802) <= 5e-3);
    CHECK(std::abs(st.mass_error) <= 1e-10);
}

TEST_CASE("newton_solve: jump-down is the mirror image") {
    const Grid g = Grid::uniform(n_quarter(0.01));
    const StationaryState up = solve_stationary(
        cubic_asym(0.5, 0.35), StationaryProblem{BistableModel::cubic(0.2, 0.5), 0.01, 1.0, 0.35, g});
    const StationaryState down =
        solve_stationary(cubic_asym(0.5, 0.35, JumpDirection::Down),
                         StationaryProblem{BistableModel::cubic(0.2, 0.5), 0.01, 1.0, 0.35, g});
    CHECK(std::abs(down.layer_x - (1.0 - 0.650)) <= 2e-3);
    for (int i = 0; i < g.n; ++i)
        CHECK(down.u[i] == doctest::Approx(up.u[g.n - 1 - i]).epsilon(0).scale(1).epsilon(1e-8));
}

TEST_CASE("reflection equivariance through the reflected mass") {
    auto m = BistableModel::cubic(0.2, 0.3);
    AsymptoticsOptions aopt;
    const LayerAsymptotics a = compute_layer_asymptotics(m, 1.0, 0.35, JumpDirection::Up, aopt);
    const double xi_reflected = a.h_plus + a.h_minus + 2.0 * a.v_star - 0.35;
    const Grid g = Grid::uniform(n_quarter(0.02));

    const LayerAsymptotics a_up =
        compute_layer_asymptotics(m, 1.0, xi_reflected, JumpDirection::Up, aopt);
    const StationaryState up =
        solve_stationary(a_up, StationaryProblem{m, 0.02, 1.0, xi_reflected, g});
    const LayerAsymptotics a_down =
        compute_layer_asymptotics(m, 1.0, xi_reflected, JumpDirection::Down, aopt);
    const StationaryState down =
        solve_stationary(a_down, StationaryProblem{m, 0.02, 1.0, xi_reflected, g});
    for (int i = 0; i < g.n; ++i)
        CHECK(down.u[i] == doctest::Approx(up.u[g.n - 1 - i]).epsilon(0).scale(1).epsilon(1e-8));
    CHECK(down.layer_x == doctest::Approx(1.0 - up.layer_x).epsilon(1e-6));
}

TEST_CASE("algebraic slaving and conservation hold exactly") {
    const LayerAsymptotics a = hill_asym();
    const Grid g = Grid::uniform(n_quarter(0.02));
    const StationaryProblem prob{BistableModel::hill(0.067), 0.02, 1.0, 2.3, g};
    const StationaryState st = solve_stationary(a, prob);
    double worst = 0.0;
    for (int i = 0; i < g.n; ++i)
        worst = std::max(worst, std::abs(st.d * st.v[i] + st.eps * st.eps * st.u[i] - st.c));
    CHECK(worst <= 1e-15);
    CHECK(std::abs(st.mass_error) <= 1e-10);
}

TEST_CASE("monotone layer profile for jump-up solutions") {
    const LayerAsymptotics a = cubic_asym(0.3, 0.35);
    const Grid g = Grid::uniform(n_quarter(0.02));
    const StationaryProblem prob{BistableModel::cubic(0.2, 0.3), 0.02, 1.0, 0.35, g};
    const StationaryState st = solve_stationary(a, prob);
    for (int i = 0; i + 1 < g.n; ++i) CHECK(st.u[i + 1] >= st.u[i] - 1e-12);
}

TEST_CASE("grid refinement: layer position converges at second order") {
    const LayerAsymptotics a = cubic_asym(0.3, 0.35);
    auto m = BistableModel::cubic(0.2, 0.3);
    const double eps = 0.02;
    double layer[3];
    int k = 0;
    for (int n : {n_quarter(eps), 2 * n_quarter(eps), 4 * n_quarter(eps)}) {
        const Grid g = Grid::uniform(n);
        layer[k++] = solve_stationary(a, StationaryProblem{m, eps, 1.0, 0.35, g}).layer_x;
    }
    const double d1 = std::abs(layer[0] - layer[1]);
    const double d2 = std::abs(layer[1] - layer[2]);
    CHECK(d1 > 0.0);
    // at least second order per doubling (crossing interpolation superconverges)
    const double ratio = d1 / std::max(d2, 1e-15);
    CHECK(ratio > 2.5);
}

TEST_CASE("continuation: convergence to the asymptotic description") {
    const LayerAsymptotics a = cubic_asym(0.5, 0.35);
    auto m = BistableModel::cubic(0.2, 0.5);
    const std::vector<double> eps_list{0.04, 0.02, 0.01, 0.005};
    const auto states = continuation_in_eps(m, a, 1.0, 0.35, eps_list, n_quarter);
    REQUIRE(states.size() == 4);
    std::vector<double> lx, lc;
    double prev_err = 1e9, prev_outer = 1e9;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const double eps = eps_list[i];
        const double layer_err = std::abs(states[i].layer_x - a.x_star);
        CHECK(layer_err <= 0.5 * eps);  // x1 = 0 here
        CHECK(layer_err < prev_err + 1e-12);
        prev_err = layer_err;
        lx.push_back(std::log(eps));
        lc.push_back(std::log(std::abs(states[i].c - a.c0) + 1e-300));
        const Grid g = Grid::uniform(n_quarter(eps));
        const AsymptoticDistance dist = distance_to_asymptotics(states[i], a, g);
        CHECK(dist.sup_outer < 0.75 * prev_outer);
        prev_outer = dist.sup_outer;
    }
    // |c(eps) - c0| = O(eps^2) for the symmetric cubic
    const LinearFit fit = linear_fit(lx, lc);
    CHECK(fit.slope >= 2.0 - 0.15);
}

TEST_CASE("distance_to_asymptotics: layer offset at first order") {
    const LayerAsymptotics a = cubic_asym(0.5, 0.35);
    const Grid g = Grid::uniform(4096);
    const StationaryProblem prob{BistableModel::cubic(0.2, 0.5), 0.01, 1.0, 0.35, g};
    const StationaryState st = solve_stationary(a, prob);
    const AsymptoticDistance dist = distance_to_asymptotics(st, a, g);
    CHECK(dist.layer_offset <= 5e-4);
    CHECK(dist.sup_all < 0.05);
}

TEST_CASE("first-order shift cross-check against the solver (hill)") {
    // Richardson extrapolation of (layer_x(eps) - x0)/eps reproduces the
    // quadrature value of the first-order shift.
    const LayerAsymptotics a = hill_asym();
    auto m = BistableModel::hill(0.067);
    const std::vector<double> eps_list{0.02, 0.01, 0.005};
    const auto states = continuation_in_eps(m, a, 1.0, 2.3, eps_list, n_quarter);
    std::vector<double> r;
    for (std::size_t i = 0; i < states.size(); ++i)
        r.push_back((states[i].layer_x - a.x_star) / eps_list[i]);
    const double richardson = 2.0 * r[2] - r[1];
    CHECK(richardson == doctest::Approx(a.x1).epsilon(0.05));
    CHECK(r[2] == doctest::Approx(a.x1).epsilon(0.12));
}

TEST_CASE("resolution rule is enforced") {
    const LayerAsymptotics a = cubic_asym(0.5, 0.35);
    const Grid g = Grid::uniform(51);  // h = 0.02 > eps/2 for eps = 0.01
    const StationaryProblem prob{BistableModel::cubic(0.2, 0.5), 0.01, 1.0, 0.35, g};
    CHECK_THROWS_AS(solve_stationary(a, prob), ConfigError);
}

TEST_CASE("newton diverges loudly from an absurd guess") {
    const Grid g = Grid::uniform(201);
    const StationaryProblem prob{BistableModel::cubic(0.2, 0.5), 0.05, 1.0, 0.35, g};
    std::vector<double> u0(g.n, 40.0);  // far outside the basin
    StationaryOptions opt;
    opt.max_iters = 6;
    CHECK_THROWS_AS(newton_solve(std::move(u0), 130.0, prob, opt), NumericalError);
}
