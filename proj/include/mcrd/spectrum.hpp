#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "mcrd/asymptotics.hpp"
#include "mcrd/grid.hpp"
#include "mcrd/model.hpp"
#include "mcrd/stationary.hpp"

namespace mcrd {

// Discrete linearization around a stationary state: the two diffusion blocks
// with Neumann closures identical to the stationary solver's, coupled through
// the reaction partials evaluated along the state. The quadrature-weight row
// applied to both components annihilates the operator, which is the discrete
// form of the mass constraint being preserved by the flow.
struct LinearizedOperator {
    int n = 0;
    double eps = 0.0;
    double d = 0.0;
    std::vector<double> fu;  // f_u(u_i, v_i)
    std::vector<double> fv;  // f_v(u_i, v_i)
    const Grid* grid = nullptr;

    Eigen::MatrixXd dense() const;                  // block ordering (phi | psi)
    Eigen::SparseMatrix<double> sparse() const;     // interleaved ordering
    double scale() const;                           // inf-norm estimate
};

LinearizedOperator assemble_linearization(const StationaryState& state, const Grid& grid,
                                          const BistableModel& model);

struct SpectrumWindow {
    double re_min = -1.0;
    int count = 16;
};

enum class EigMethod { Auto, Dense, ShiftInvert };

struct SpectrumResult {
    std::vector<std::complex<double>> eigenvalues;  // in-window, mass mode removed, Re descending
    std::vector<double> mass_functionals;           // |sum w (phi+psi)| per unit eigenvector
    std::complex<double> critical;
    double mu0_scalar = 0.0;   // principal eigenvalue of the scalar diffusion-reaction block
    double second_gap = 0.0;   // real part of the next in-window eigenvalue after the critical one
    double mass_mode_lambda = 0.0;   // |lambda| of the removed mass mode
    double mass_mode_functional = 0.0;
};

SpectrumResult constrained_spectrum(const LinearizedOperator& op, const SpectrumWindow& window = {},
                                    EigMethod method = EigMethod::Auto);

struct ScalarPrincipal {
    double mu0 = 0.0;
    std::vector<double> phi0;  // unit discrete-L2 norm, nonnegative mean
};

ScalarPrincipal scalar_principal_eigenvalue(const LinearizedOperator& op);

struct ScalingRow {
    double eps = 0.0;
    int n = 0;
    std::complex<double> lambda_crit;
    double lambda_over_eps = 0.0;
    double mu0 = 0.0;
    std::string error;  // empty on success
};

struct ScalingFit {
    double slope = 0.0;      // extrapolated lambda/eps as eps -> 0
    double r2 = 0.0;
    double predicted = 0.0;  // asymptotic prediction for comparison
    std::vector<ScalingRow> table;
};

ScalingFit scaling_study(const BistableModel& model, const LayerAsymptotics& asym, double d,
                         double xi, const std::vector<double>& eps_list,
                         const std::function<int(double)>& n_for_eps,
                         const SpectrumWindow& window = {}, EigMethod method = EigMethod::Auto);

// Shift-invert Arnoldi for the sparse operator; returns eigenpairs nearest the
// shift whose direct residuals pass the tolerance.
struct ArnoldiPair {
    std::complex<double> lambda;
    Eigen::VectorXcd vec;
};
std::vector<ArnoldiPair> shift_invert_arnoldi(const Eigen::SparseMatrix<double>& A, double sigma,
                                              int n_wanted, int subspace = 80,
                                              double rel_tol = 1e-9);

}  // namespace mcrd
