#include "mcrd/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcrd/quad.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace mcrd {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// Potential of the layer equation with accurate values near both plateaus:
// the left half integrates from h_minus, the right half backwards from h_plus,
// which keeps the relative accuracy of the tiny near-plateau values.
class Potential {
public:
    Potential(const BistableModel& model, double v_star, const ModelTolerances& tol)
        : model_(model), v_(v_star), tol_(tol), roots_(roots_at(model, v_star, tol)) {
        const double j_left = integrate([&](double u) { return model_.f(u, v_); }, roots_.h_minus,
                                        roots_.h_zero, tol_.quadrature_abs);
        const double j_right = integrate([&](double u) { return model_.f(u, v_); }, roots_.h_zero,
                                         roots_.h_plus, tol_.quadrature_abs);
        maxwell_defect_ = j_left + j_right;
        if (std::abs(F(roots_.h_zero) - j_left) > 1e-10 * std::max(1.0, std::abs(j_left)) ||
            std::abs(-F(std::nextafter(roots_.h_zero, roots_.h_plus)) - j_right) >
                1e-10 * std::max(1.0, std::abs(j_right)))
            throw NumericalError("fixed-order potential quadrature disagrees with the adaptive rule; "
                                 "the nonlinearity may be too rough");
        if (std::abs(maxwell_defect_) > 1e-9)
            throw DegeneratePotential("potential endpoints are unbalanced (area integral = " +
                                      fmt(maxwell_defect_) + "); v=" + fmt(v_star) +
                                      " is not a Maxwell point");
        mu_minus_ = std::sqrt(-model_.f_u(roots_.h_minus, v_));
        mu_plus_ = std::sqrt(-model_.f_u(roots_.h_plus, v_));
        // -F must be strictly positive inside (a double root mid-interval would
        // break the first-integral construction)
        const double width = roots_.h_plus - roots_.h_minus;
        for (int k = 1; k < 96; ++k) {
            const double u = roots_.h_minus + width * double(k) / 96.0;
            if (std::min(u - roots_.h_minus, roots_.h_plus - u) < 0.01 * width) continue;
            if (!(F(u) < 0.0))
                throw DegeneratePotential("-F vanishes at interior u=" + fmt(u) + " for v=" + fmt(v_star));
        }
    }

    const Roots& roots() const { return roots_; }
    double mu_minus() const { return mu_minus_; }
    double mu_plus() const { return mu_plus_; }

    // Fixed-order rule: machine accurate for the smooth nonlinearities this
    // sees, deterministic cost, and free of the adaptive-termination noise that
    // would make functions of F rough. Integrating from the nearest stable root
    // keeps the tiny near-plateau values accurate in relative terms. The
    // constructor cross-checks it against the adaptive rule.
    double F(double u) const {
        using boost::math::quadrature::gauss;
        if (u <= roots_.h_zero)
            return gauss<double, 61>::integrate([&](double s) { return model_.f(s, v_); },
                                                roots_.h_minus, u);
        return -gauss<double, 61>::integrate([&](double s) { return model_.f(s, v_); }, u,
                                             roots_.h_plus);
    }

    double speed(double u) const {  // Q_zeta as a function of Q
        return std::sqrt(std::max(0.0, -2.0 * F(u)));
    }

private:
    const BistableModel& model_;
    double v_;
    ModelTolerances tol_;
    Roots roots_;
    double mu_minus_ = 0.0, mu_plus_ = 0.0;
    double maxwell_defect_ = 0.0;
};

double auto_half_width(const Potential& pot) {
    return 12.0 / std::min(pot.mu_minus(), pot.mu_plus());
}

struct MarchNode {
    double zeta, u, s;
};

// First-integral march from the middle root toward one plateau; returns nodes
// with exact zeta increments from panel quadrature of 1 / sqrt(-2F).
std::vector<MarchNode> march_half(const Potential& pot, int dir, double zeta_target, double dz,
                                  double quad_tol) {
    const Roots& r = pot.roots();
    const double plateau = dir > 0 ? r.h_plus : r.h_minus;
    const double mu = dir > 0 ? pot.mu_plus() : pot.mu_minus();
    const double width = r.h_plus - r.h_minus;
    const double stop_gap = width * std::exp(-mu * (zeta_target + 3.0));

    std::vector<MarchNode> nodes;
    double u = r.h_zero, zeta = 0.0;
    nodes.push_back({0.0, u, pot.speed(u)});
    const double eps_mach = std::numeric_limits<double>::epsilon();
    const double u_scale = std::max({1.0, std::abs(r.h_minus), std::abs(r.h_plus)});
    while (zeta < zeta_target) {
        const double gap = std::abs(plateau - u);
        if (gap <= stop_gap) break;
        const double s = pot.speed(u);
        double du = std::min(s * dz, 0.45 * gap);
        if (du <= 0.0) break;
        double u_next = u + dir * du;
        // The potential inherits ~eps/gap relative noise from rounding of the
        // integrand argument near the plateau, so the panel tolerance cannot be
        // tighter than that. Tail panels only position the flat part of the
        // profile, so the loss is harmless there.
        const double panel_tol = std::max(quad_tol, 16.0 * eps_mach * u_scale / gap);
        const double dzeta = integrate_rel([&](double x) { return 1.0 / pot.speed(x); },
                                           std::min(u, u_next), std::max(u, u_next), panel_tol);
        zeta += dzeta;
        u = u_next;
        nodes.push_back({dir * zeta, u, pot.speed(u)});
    }
    return nodes;
}

double hermite(double z, const MarchNode& a, const MarchNode& b) {
    const double h = b.zeta - a.zeta;
    const double t = (z - a.zeta) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a.u + (t3 - 2 * t2 + t) * h * a.s + (-2 * t3 + 3 * t2) * b.u +
           (t3 - t2) * h * b.s;
}

Potential make_potential(const BistableModel& model, double v_star, const ModelTolerances& tol) {
    return Potential(model, v_star, tol);
}

}  // namespace

double ProfileTable::value_at(double z) const {
    if (z <= zeta.front()) return h_minus;
    if (z >= zeta.back()) return h_plus;
    const double dz = zeta[1] - zeta[0];
    const std::size_t i = std::min(zeta.size() - 2, std::size_t((z - zeta.front()) / dz));
    const double t = (z - zeta[i]) / dz;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * q[i] + (t3 - 2 * t2 + t) * dz * q_prime[i] +
           (-2 * t3 + 3 * t2) * q[i + 1] + (t3 - t2) * dz * q_prime[i + 1];
}

std::pair<double, double> admissible_xi_range(const BistableModel& model, double v_star,
                                              const ModelTolerances& tol) {
    const Roots r = roots_at(model, v_star, tol);
    return {r.h_minus + v_star, r.h_plus + v_star};
}

double layer_position(const BistableModel& model, double v_star, double xi, JumpDirection direction,
                      const ModelTolerances& tol) {
    const auto [lo, hi] = admissible_xi_range(model, v_star, tol);
    if (!(xi > lo && xi < hi))
        throw XiOutOfRange("xi=" + fmt(xi) + " outside the admissible interval (" + fmt(lo) + "," +
                           fmt(hi) + ")");
    const Roots r = roots_at(model, v_star, tol);
    const double width = r.h_plus - r.h_minus;
    const double x_up = (r.h_plus + v_star - xi) / width;
    return direction == JumpDirection::Up ? x_up : 1.0 - x_up;
}

double potential_F(const BistableModel& model, double v_star, double u, const ModelTolerances& tol) {
    return make_potential(model, v_star, tol).F(u);
}

ProfileTable heteroclinic_profile(const BistableModel& model, double v_star, double half_width,
                                  int n_points, const AsymptoticsOptions& opt) {
    const Potential pot(model, v_star, opt.model_tol);
    const double Z = half_width > 0.0 ? half_width : auto_half_width(pot);
    if (n_points < 9) throw ConfigError("heteroclinic_profile: need at least 9 points");

    const double quad_tol = 1e-12;  // relative, per march panel
    auto up = march_half(pot, +1, Z + 0.75, opt.march_dzeta, quad_tol);
    auto down = march_half(pot, -1, Z + 0.75, opt.march_dzeta, quad_tol);

    std::vector<MarchNode> nodes(down.rbegin(), down.rend());
    nodes.insert(nodes.end(), up.begin() + 1, up.end());

    ProfileTable table;
    table.h_minus = pot.roots().h_minus;
    table.h_plus = pot.roots().h_plus;
    table.half_width = Z;
    table.zeta.resize(n_points);
    table.q.resize(n_points);
    table.q_prime.resize(n_points);
    std::size_t k = 0;
    for (int i = 0; i < n_points; ++i) {
        const double z = -Z + 2.0 * Z * double(i) / double(n_points - 1);
        while (k + 2 < nodes.size() && nodes[k + 1].zeta < z) ++k;
        double u;
        if (z <= nodes.front().zeta) {
            u = nodes.front().u;
        } else if (z >= nodes.back().zeta) {
            u = nodes.back().u;
        } else {
            u = hermite(z, nodes[k], nodes[k + 1]);
        }
        table.zeta[i] = z;
        table.q[i] = u;
        table.q_prime[i] = pot.speed(u);
    }
    return table;
}

double kappa_star(const BistableModel& model, double v_star, const ModelTolerances& tol) {
    const Potential pot(model, v_star, tol);
    const double norm2 = integrate([&](double u) { return pot.speed(u); }, pot.roots().h_minus,
                                   pot.roots().h_plus, tol.quadrature_abs);
    return 1.0 / std::sqrt(norm2);
}

double first_order_shift_x1(const BistableModel& model, double v_star, double x0,
                            const ModelTolerances& tol) {
    if (!(x0 > 0.0 && x0 < 1.0)) throw ConfigError("first_order_shift_x1: x0 must lie in (0,1)");
    const Potential pot(model, v_star, tol);
    const Roots& r = pot.roots();
    const double width = r.h_plus - r.h_minus;
    const double edge = 1e-9 * width;
    auto lower = [&](double u) {
        if (u - r.h_minus < edge) return 1.0 / pot.mu_minus();
        const double s = pot.speed(u);
        return s > 0.0 ? (u - r.h_minus) / s : 1.0 / pot.mu_minus();
    };
    auto upper = [&](double u) {
        if (r.h_plus - u < edge) return -1.0 / pot.mu_plus();
        const double s = pot.speed(u);
        return s > 0.0 ? (u - r.h_plus) / s : -1.0 / pot.mu_plus();
    };
    const double i_lower = integrate(lower, r.h_minus, r.h_zero, tol.quadrature_abs);
    const double i_upper = integrate(upper, r.h_zero, r.h_plus, tol.quadrature_abs);
    return (i_lower + i_upper) / width;
}

std::pair<std::vector<double>, std::vector<double>> leading_order_fields(
    const LayerAsymptotics& asym, double eps, const Grid& grid) {
    const double sign = asym.jump_direction == JumpDirection::Up ? 1.0 : -1.0;
    const double center = asym.x_star + eps * asym.x1;
    std::vector<double> u0(grid.n), v0(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        const double z = sign * (grid.x[i] - center) / eps;
        u0[i] = asym.q_profile.value_at(z);
        v0[i] = (asym.c0 + eps * asym.c1 - eps * eps * u0[i]) / asym.d;
    }
    return {std::move(u0), std::move(v0)};
}

double predict_critical_eigenvalue_slope(const BistableModel& model, const LayerAsymptotics& asym) {
    const double v = asym.v_star;
    auto weight = [&](double h) {
        const double fu = model.f_u(h, v);
        return (model.f_v(h, v) - fu) / fu;
    };
    const double first =
        asym.jump_direction == JumpDirection::Up ? weight(asym.h_minus) : weight(asym.h_plus);
    const double second =
        asym.jump_direction == JumpDirection::Up ? weight(asym.h_plus) : weight(asym.h_minus);
    const double W = asym.x_star * first + (1.0 - asym.x_star) * second;
    const double width = asym.h_plus - asym.h_minus;
    return asym.kappa_star * asym.kappa_star * width * asym.jprime_vstar / W;
}

MatchingResiduals matching_residuals(const BistableModel& model, const LayerAsymptotics& asym,
                                     double alpha_match, double v_probe, double x0_probe,
                                     const ModelTolerances& tol) {
    const bool at_star = std::isnan(v_probe);
    const double v = at_star ? asym.v_star : v_probe;
    const Roots r = at_star ? Roots{asym.h_minus, asym.h_zero, asym.h_plus, asym.v_star}
                            : roots_at(model, v, tol);
    if (!(alpha_match > r.h_minus && alpha_match < r.h_plus))
        throw ConfigError("matching point must lie strictly between the stable roots");
    double x0 = asym.jump_direction == JumpDirection::Up ? asym.x_star : 1.0 - asym.x_star;
    if (!std::isnan(x0_probe)) {
        if (!(x0_probe > 0.0 && x0_probe < 1.0))
            throw ConfigError("matching_residuals: x0 must lie in (0,1)");
        x0 = x0_probe;
    }
    const double A = integrate([&](double u) { return model.f(u, v); }, r.h_minus, alpha_match,
                               tol.quadrature_abs);
    const double B = integrate([&](double u) { return model.f(u, v); }, alpha_match, r.h_plus,
                               tol.quadrature_abs);
    const double slope_minus = x0 * std::sqrt(std::max(0.0, -2.0 * A));
    const double slope_plus = (1.0 - x0) * std::sqrt(std::max(0.0, 2.0 * B));
    MatchingResiduals out;
    out.phi0 = (1.0 - x0) * slope_minus - x0 * slope_plus;
    out.k_identity = x0 * (1.0 - x0) / slope_minus * (-2.0 * A) - slope_minus +
                     x0 * (1.0 - x0) / slope_plus * (2.0 * B) - slope_plus;
    return out;
}

LayerAsymptotics compute_layer_asymptotics(const BistableModel& model, double d, double xi,
                                           JumpDirection direction, const AsymptoticsOptions& opt) {
    if (!(d > 0.0)) throw ConfigError("diffusion coefficient d must be positive");
    LayerAsymptotics a;
    const MaxwellPoint mp = find_vstar(model, opt.model_tol, opt.maxwell_select);
    a.v_star = mp.v_star;
    a.jprime_vstar = mp.j_prime;
    const Roots r = roots_at(model, a.v_star, opt.model_tol);
    a.h_minus = r.h_minus;
    a.h_zero = r.h_zero;
    a.h_plus = r.h_plus;
    a.d = d;
    a.xi = xi;
    a.jump_direction = direction;
    a.x_star = layer_position(model, a.v_star, xi, direction, opt.model_tol);
    a.c0 = d * a.v_star;
    a.c1 = 0.0;
    a.kappa_star = kappa_star(model, a.v_star, opt.model_tol);
    const double x0_up = direction == JumpDirection::Up ? a.x_star : 1.0 - a.x_star;
    const double x1_up = first_order_shift_x1(model, a.v_star, x0_up, opt.model_tol);
    a.x1 = direction == JumpDirection::Up ? x1_up : -x1_up;
    a.q_profile = heteroclinic_profile(model, a.v_star, opt.z_half_width, opt.profile_points, opt);
    a.lambda_slope = predict_critical_eigenvalue_slope(model, a);
    return a;
}

}  // namespace mcrd
