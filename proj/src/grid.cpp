#include "mcrd/grid.hpp"

#include <cassert>
#include <stdexcept>

namespace mcrd {

Grid Grid::uniform(int n) {
    if (n < 3) throw std::invalid_argument("Grid::uniform: need n >= 3");
    Grid g;
    g.n = n;
    g.h = 1.0 / double(n - 1);
    g.x.resize(n);
    g.w.resize(n);
    for (int i = 0; i < n; ++i) {
        g.x[i] = double(i) * g.h;
        g.w[i] = g.h;
    }
    g.x[n - 1] = 1.0;
    g.w[0] *= 0.5;
    g.w[n - 1] *= 0.5;
    return g;
}

double Grid::integrate(std::span<const double> u) const {
    assert(int(u.size()) == n);
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * u[i];
    return s;
}

void Grid::laplacian(std::span<const double> u, std::span<double> out) const {
    assert(int(u.size()) == n && int(out.size()) == n);
    const double ih2 = 1.0 / (h * h);
    out[0] = 2.0 * (u[1] - u[0]) * ih2;
    for (int i = 1; i < n - 1; ++i) out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * ih2;
    out[n - 1] = 2.0 * (u[n - 2] - u[n - 1]) * ih2;
}

ImplicitDiffusionSolver::ImplicitDiffusionSolver(const Grid& grid, double c) {
    const int n = grid.n;
    const double r = c / (grid.h * grid.h);
    lower_.assign(n, -r);
    upper_.assign(n, -r);
    diag_.assign(n, 1.0 + 2.0 * r);
    upper_[0] = -2.0 * r;       // mirror ghost at x=0
    lower_[n - 1] = -2.0 * r;   // mirror ghost at x=1
    work_.resize(n);
    // forward elimination, stored
    for (int i = 1; i < n; ++i) {
        const double m = lower_[i] / diag_[i - 1];
        lower_[i] = m;
        diag_[i] -= m * upper_[i - 1];
    }
}

void ImplicitDiffusionSolver::solve(std::span<const double> rhs, std::span<double> x) const {
    const int n = int(diag_.size());
    assert(int(rhs.size()) == n && int(x.size()) == n);
    auto& y = work_;
    y[0] = rhs[0];
    for (int i = 1; i < n; ++i) y[i] = rhs[i] - lower_[i] * y[i - 1];
    x[n - 1] = y[n - 1] / diag_[n - 1];
    for (int i = n - 2; i >= 0; --i) x[i] = (y[i] - upper_[i] * x[i + 1]) / diag_[i];
}

double locate_crossing(std::span<const double> x, std::span<const double> u, double threshold) {
    for (std::size_t i = 0; i + 1 < u.size(); ++i) {
        const double a = u[i] - threshold, b = u[i + 1] - threshold;
        if (a == 0.0) return x[i];
        if (a * b < 0.0) return x[i] + (x[i + 1] - x[i]) * a / (a - b);
    }
    if (!u.empty() && u.back() == threshold) return x.back();
    return -1.0;
}

}  // namespace mcrd
