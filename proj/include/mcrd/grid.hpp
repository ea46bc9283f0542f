#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mcrd {

// Vertex-centered uniform grid on [0,1] with trapezoid quadrature weights and a
// 3-point Laplacian closed by mirror ghost nodes (homogeneous Neumann). The
// weights sum to 1 and annihilate the Laplacian: sum_i w_i (Lap u)_i = 0 for
// every u (discrete divergence theorem), which is what makes the conservation
// row of the stationary system and the IMEX mass balance exact.
struct Grid {
    int n = 0;
    double h = 0.0;
    std::vector<double> x;
    std::vector<double> w;

    static Grid uniform(int n);

    double integrate(std::span<const double> u) const;

    // out_i = (u_{i-1} - 2 u_i + u_{i+1}) / h^2 with u_{-1} = u_1, u_n = u_{n-2}.
    void laplacian(std::span<const double> u, std::span<double> out) const;
};

// Solves (I - c * Lap) x = rhs with the grid's Neumann Laplacian via the Thomas
// algorithm; the matrix is strictly diagonally dominant for c > 0.
class ImplicitDiffusionSolver {
public:
    ImplicitDiffusionSolver() = default;
    ImplicitDiffusionSolver(const Grid& grid, double c);

    void solve(std::span<const double> rhs, std::span<double> x) const;

private:
    std::vector<double> lower_, diag_, upper_;  // factored in-place
    mutable std::vector<double> work_;
};

// First crossing of u through `threshold`, linearly interpolated between nodes.
// Returns a negative value when u never crosses.
double locate_crossing(std::span<const double> x, std::span<const double> u, double threshold);

}  // namespace mcrd
