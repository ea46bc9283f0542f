#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mcrd/errors.hpp"

namespace mcrd {

struct ModelTolerances {
    double root_residual = 1e-12;       // |f(h_i, v)| at accepted roots
    double quadrature_abs = 1e-12;      // absolute error for the area integrals
    double bisection_interval = 1e-14;  // bracket width before Newton polish
    double fold_margin_rel = 1e-6;      // "strictly inside I" relative margin
    double scan_margin_rel = 1e-6;      // margin for the Maxwell sign scan
};

// Callback bundle for user-supplied nonlinearities. Partials are supplied
// analytically; the constructor cross-checks them against finite differences.
struct CustomCallbacks {
    std::function<double(double, double)> f;
    std::function<double(double, double)> f_u;
    std::function<double(double, double)> f_v;
    double u_min = -10.0;
    // Search ceiling grows with v because the upper root of Hill-like models does.
    std::function<double(double)> u_max = [](double v) { return std::max(10.0, 5.0 * (1.0 + v)); };
    double v_seed_min = -10.0;  // fold search window (Custom only)
    double v_seed_max = 10.0;
    std::string name = "custom";
};

// The single pluggable physics object: a nonlinearity f(u,v) bistable in u,
// with analytic partials.
class BistableModel {
public:
    enum class Kind { Cubic, Hill, Custom };

    static BistableModel cubic(double alpha, double beta);
    static BistableModel hill(double kappa);
    static BistableModel custom(CustomCallbacks callbacks);

    double f(double u, double v) const {
        switch (kind_) {
            case Kind::Cubic: return alpha_ * v - u * (u - beta_) * (u - 1.0);
            case Kind::Hill: return (kappa_ + u * u / (1.0 + u * u)) * v - u;
            default: return cb_.f(u, v);
        }
    }
    double f_u(double u, double v) const {
        switch (kind_) {
            case Kind::Cubic: return -3.0 * u * u + 2.0 * (1.0 + beta_) * u - beta_;
            case Kind::Hill: {
                const double s = 1.0 + u * u;
                return 2.0 * u * v / (s * s) - 1.0;
            }
            default: return cb_.f_u(u, v);
        }
    }
    double f_v(double u, double v) const {
        switch (kind_) {
            case Kind::Cubic: return alpha_;
            case Kind::Hill: return kappa_ + u * u / (1.0 + u * u);
            default: return cb_.f_v(u, v);
        }
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double kappa() const { return kappa_; }

    double search_u_min() const;
    double search_u_max(double v) const;
    double v_seed_min() const { return kind_ == Kind::Custom ? cb_.v_seed_min : -10.0; }
    double v_seed_max() const { return kind_ == Kind::Custom ? cb_.v_seed_max : 10.0; }

private:
    BistableModel() = default;
    Kind kind_ = Kind::Cubic;
    double alpha_ = 0.0, beta_ = 0.0, kappa_ = 0.0;
    CustomCallbacks cb_;
    std::string name_;
};

// Roots of f(., v) = 0 at a fixed v, ordered h_minus < h_zero < h_plus with the
// bistable sign pattern f_u = (-, +, -).
struct Roots {
    double h_minus = 0.0;
    double h_zero = 0.0;
    double h_plus = 0.0;
    double v = 0.0;
};

struct BistableInterval {
    double v_lower = 0.0;
    double v_upper = 0.0;
};

// Fold location detail: the value of v, the coalescing (double) root and the
// remaining simple root. Used to evaluate the area integral exactly at a fold.
struct FoldPoint {
    double v = 0.0;
    double u_double = 0.0;
    double u_simple = 0.0;
};

enum class FoldSide { Lower, Upper };

struct MaxwellPoint {
    double v_star = 0.0;
    double j_prime = 0.0;  // derivative of the area integral at v_star
};

struct AssumptionReport {
    bool a1_holds = false;
    bool a2_holds = false;
    double v_star = 0.0;
    double j_prime_at_vstar = 0.0;
    bool a3_holds = false;
    // per-sample (v, min over both stable roots of f_v - f_u)
    std::vector<std::pair<double, double>> samples;
    double min_margin = 0.0;
    std::vector<std::string> failures;

    bool all_hold() const { return a1_holds && a2_holds && a3_holds; }
};

Roots roots_at(const BistableModel& model, double v, const ModelTolerances& tol = {});

BistableInterval fold_points(const BistableModel& model, const ModelTolerances& tol = {});
FoldPoint fold_point(const BistableModel& model, FoldSide side, const ModelTolerances& tol = {});

// Area integral of f(., v) between the outer roots; zero at the Maxwell point.
double maxwell_integral(const BistableModel& model, double v, const ModelTolerances& tol = {});
double maxwell_integral_at_fold(const BistableModel& model, FoldSide side,
                                const ModelTolerances& tol = {});

// d/dv of the area integral: the integral of f_v between the outer roots
// (boundary terms vanish because f(h±,v)=0).
double maxwell_slope(const BistableModel& model, double v, const ModelTolerances& tol = {});

// Finds the zero of the area integral by sign scan + bisection + Newton.
// `select_index` picks among multiple sign changes; by default more than one
// is an error.
MaxwellPoint find_vstar(const BistableModel& model, const ModelTolerances& tol = {},
                        std::optional<int> select_index = std::nullopt);

AssumptionReport verify_assumptions(const BistableModel& model, int n_samples,
                                    const ModelTolerances& tol = {});

}  // namespace mcrd
