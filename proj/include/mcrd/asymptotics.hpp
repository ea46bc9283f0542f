#pragma once

#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"

namespace mcrd {

enum class JumpDirection { Up, Down };

// Tabulated heteroclinic connection between the two stable roots, on a uniform
// stretched-coordinate grid over [-Z, Z], normalized so q(0) is the middle root.
struct ProfileTable {
    std::vector<double> zeta;
    std::vector<double> q;
    std::vector<double> q_prime;
    double h_minus = 0.0;
    double h_plus = 0.0;
    double half_width = 0.0;

    // Cubic Hermite interpolation inside [-Z, Z]; plateau values outside.
    double value_at(double z) const;
};

struct AsymptoticsOptions {
    double z_half_width = 0.0;  // <= 0 selects 12 / sqrt(min |f_u| at the plateaus)
    int profile_points = 2001;
    double march_dzeta = 0.05;  // node spacing for the first-integral march
    ModelTolerances model_tol{};
    std::optional<int> maxwell_select;  // pick among multiple Maxwell candidates
};

// Every eps-independent output of the layer construction, plus the predicted
// critical-eigenvalue slope. x_star and x1 are stored for the requested jump
// direction; the composite layer center is x_star + eps * x1.
struct LayerAsymptotics {
    double v_star = 0.0;
    double h_minus = 0.0, h_zero = 0.0, h_plus = 0.0;
    double x_star = 0.0;
    double x1 = 0.0;
    double c0 = 0.0;  // = d * v_star
    double c1 = 0.0;  // = 0
    double kappa_star = 0.0;
    double jprime_vstar = 0.0;
    double lambda_slope = 0.0;  // predicted critical eigenvalue / eps
    ProfileTable q_profile;
    JumpDirection jump_direction = JumpDirection::Up;
    double d = 1.0;
    double xi = 0.0;
};

std::pair<double, double> admissible_xi_range(const BistableModel& model, double v_star,
                                              const ModelTolerances& tol = {});

double layer_position(const BistableModel& model, double v_star, double xi, JumpDirection direction,
                      const ModelTolerances& tol = {});

// F(u) = integral of f(., v_star) from the lower stable root up to u; <= 0 on
// [h_minus, h_plus] and zero at both ends when v_star is the Maxwell value.
double potential_F(const BistableModel& model, double v_star, double u,
                   const ModelTolerances& tol = {});

ProfileTable heteroclinic_profile(const BistableModel& model, double v_star, double half_width,
                                  int n_points, const AsymptoticsOptions& opt = {});

double kappa_star(const BistableModel& model, double v_star, const ModelTolerances& tol = {});

// First-order layer shift. Independent of x0 after the stretched-variable
// substitution; x0 enters only through its (0,1) precondition.
double first_order_shift_x1(const BistableModel& model, double v_star, double x0,
                            const ModelTolerances& tol = {});

std::pair<std::vector<double>, std::vector<double>> leading_order_fields(
    const LayerAsymptotics& asym, double eps, const Grid& grid);

double predict_critical_eigenvalue_slope(const BistableModel& model, const LayerAsymptotics& asym);

struct MatchingResiduals {
    double phi0 = 0.0;        // C1 mismatch of the leading inner slopes
    double k_identity = 0.0;  // coefficient of the layer-shift unknown; == 0 at Maxwell
};

// Diagnostic confirming the matching algebra numerically. Pass a finite
// v_probe to evaluate away from the Maxwell point (default: at v_star), and a
// finite x0_probe to evaluate at a layer position other than the asymptotic one
// (both residuals vanish at the Maxwell point for every x0 in (0,1)).
MatchingResiduals matching_residuals(const BistableModel& model, const LayerAsymptotics& asym,
                                     double alpha_match,
                                     double v_probe = std::numeric_limits<double>::quiet_NaN(),
                                     double x0_probe = std::numeric_limits<double>::quiet_NaN(),
                                     const ModelTolerances& tol = {});

LayerAsymptotics compute_layer_asymptotics(const BistableModel& model, double d, double xi,
                                           JumpDirection direction,
                                           const AsymptoticsOptions& opt = {});

}  // namespace mcrd
