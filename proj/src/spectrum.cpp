#include "mcrd/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "mcrd/fit.hpp"

namespace mcrd {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

}  // namespace

Eigen::MatrixXd LinearizedOperator::dense() const {
    const int N = n;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    const double ih2 = 1.0 / (grid->h * grid->h);
    const double e2 = eps * eps;
    auto add_laplacian = [&](int row0, int col0, double coef) {
        for (int i = 0; i < N; ++i) {
            A(row0 + i, col0 + i) += -2.0 * coef * ih2;
            if (i == 0)
                A(row0, col0 + 1) += 2.0 * coef * ih2;
            else if (i == N - 1)
                A(row0 + N - 1, col0 + N - 2) += 2.0 * coef * ih2;
            else {
                A(row0 + i, col0 + i - 1) += coef * ih2;
                A(row0 + i, col0 + i + 1) += coef * ih2;
            }
        }
    };
    add_laplacian(0, 0, e2);
    add_laplacian(N, N, d);
    for (int i = 0; i < N; ++i) {
        A(i, i) += fu[i];
        A(i, N + i) += fv[i];
        A(N + i, i) += -fu[i];
        A(N + i, N + i) += -fv[i];
    }
    return A;
}

Eigen::SparseMatrix<double> LinearizedOperator::sparse() const {
    const int N = n;
    const double ih2 = 1.0 / (grid->h * grid->h);
    const double e2 = eps * eps;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(std::size_t(8) * std::size_t(N));
    auto U = [](int i) { return 2 * i; };
    auto V = [](int i) { return 2 * i + 1; };
    for (int i = 0; i < N; ++i) {
        trip.emplace_back(U(i), U(i), -2.0 * e2 * ih2 + fu[i]);
        trip.emplace_back(V(i), V(i), -2.0 * d * ih2 - fv[i]);
        trip.emplace_back(U(i), V(i), fv[i]);
        trip.emplace_back(V(i), U(i), -fu[i]);
        if (i == 0) {
            trip.emplace_back(U(0), U(1), 2.0 * e2 * ih2);
            trip.emplace_back(V(0), V(1), 2.0 * d * ih2);
        } else if (i == N - 1) {
            trip.emplace_back(U(N - 1), U(N - 2), 2.0 * e2 * ih2);
            trip.emplace_back(V(N - 1), V(N - 2), 2.0 * d * ih2);
        } else {
            trip.emplace_back(U(i), U(i - 1), e2 * ih2);
            trip.emplace_back(U(i), U(i + 1), e2 * ih2);
            trip.emplace_back(V(i), V(i - 1), d * ih2);
            trip.emplace_back(V(i), V(i + 1), d * ih2);
        }
    }
    Eigen::SparseMatrix<double> A(2 * N, 2 * N);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

double LinearizedOperator::scale() const {
    const double ih2 = 1.0 / (grid->h * grid->h);
    double fumax = 0.0, fvmax = 0.0;
    for (int i = 0; i < n; ++i) {
        fumax = std::max(fumax, std::abs(fu[i]));
        fvmax = std::max(fvmax, std::abs(fv[i]));
    }
    return 4.0 * std::max(eps * eps, d) * ih2 + fumax + fvmax;
}

LinearizedOperator assemble_linearization(const StationaryState& state, const Grid& grid,
                                          const BistableModel& model) {
    if (int(state.u.size()) != grid.n)
        throw ConfigError("assemble_linearization: state does not match the grid");
    LinearizedOperator op;
    op.n = grid.n;
    op.eps = state.eps;
    op.d = state.d;
    op.grid = &grid;
    op.fu.resize(grid.n);
    op.fv.resize(grid.n);
    for (int i = 0; i < grid.n; ++i) {
        op.fu[i] = model.f_u(state.u[i], state.v[i]);
        op.fv[i] = model.f_v(state.u[i], state.v[i]);
    }
    return op;
}

namespace {

struct Candidate {
    std::complex<double> lambda;
    double mass;  // |sum w (phi+psi)| for the unit-norm eigenvector
};

// Mass functional of a complex eigenvector stored as (phi | psi).
double mass_functional_block(const Eigen::VectorXcd& vec, const Grid& g) {
    const int N = g.n;
    std::complex<double> s = 0.0;
    for (int i = 0; i < N; ++i) s += g.w[i] * (vec[i] + vec[N + i]);
    return std::abs(s) / vec.norm();
}

double mass_functional_interleaved(const Eigen::VectorXcd& vec, const Grid& g) {
    const int N = g.n;
    std::complex<double> s = 0.0;
    for (int i = 0; i < N; ++i) s += g.w[i] * (vec[2 * i] + vec[2 * i + 1]);
    return std::abs(s) / vec.norm();
}

SpectrumResult classify(std::vector<Candidate> cand, const LinearizedOperator& op,
                        const SpectrumWindow& window) {
    const double zero_tol = std::max(1e-8, 1e-12 * op.scale());
    const double mass_tol = 1e-6;

    SpectrumResult out;
    int n_mass = 0;
    std::vector<Candidate> kept;
    for (const auto& c : cand) {
        if (std::abs(c.lambda) <= zero_tol && c.mass > mass_tol) {
            ++n_mass;
            out.mass_mode_lambda = std::abs(c.lambda);
            out.mass_mode_functional = c.mass;
            continue;
        }
        kept.push_back(c);
    }
    if (n_mass != 1)
        throw AmbiguousMassMode("expected exactly one mass-carrying near-zero mode, found " +
                                std::to_string(n_mass) +
                                " (zero window " + fmt(zero_tol) + "); refine the grid");
    std::sort(kept.begin(), kept.end(),
              [](const Candidate& a, const Candidate& b) { return a.lambda.real() > b.lambda.real(); });
    for (const auto& c : kept) {
        if (c.lambda.real() < window.re_min) break;
        if (int(out.eigenvalues.size()) >= window.count) break;
        out.eigenvalues.push_back(c.lambda);
        out.mass_functionals.push_back(c.mass);
    }
    if (out.eigenvalues.empty())
        throw EigensolverFailed("no in-window eigenvalue above re_min=" + fmt(window.re_min));
    out.critical = out.eigenvalues.front();
    out.second_gap = out.eigenvalues.size() > 1 ? out.eigenvalues[1].real()
                                                : window.re_min;
    return out;
}

std::vector<Candidate> dense_candidates(const LinearizedOperator& op) {
    Eigen::MatrixXd A = op.dense();
    Eigen::EigenSolver<Eigen::MatrixXd> es(A, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success) throw EigensolverFailed("dense eigensolver did not converge");
    const auto& evals = es.eigenvalues();
    // pseudoEigenvectors is real: one column per real eigenvalue, two columns
    // (real, imag) per conjugate pair
    const Eigen::MatrixXd& V = es.pseudoEigenvectors();
    const int N = op.n;
    std::vector<Candidate> cand;
    cand.reserve(2 * N);
    for (int j = 0; j < 2 * N; ++j) {
        const std::complex<double> lam = evals[j];
        Eigen::VectorXcd vec(2 * N);
        if (lam.imag() == 0.0) {
            vec = V.col(j).cast<std::complex<double>>();
        } else {
            const int base = (j > 0 && evals[j - 1] == std::conj(lam)) ? j - 1 : j;
            const double sign = (j == base) ? 1.0 : -1.0;
            for (int i = 0; i < 2 * N; ++i)
                vec[i] = std::complex<double>(V(i, base), sign * V(i, base + 1));
        }
        cand.push_back({lam, mass_functional_block(vec, *op.grid)});
    }
    return cand;
}

std::vector<Candidate> iterative_candidates(const LinearizedOperator& op,
                                            const SpectrumWindow& window) {
    const Eigen::SparseMatrix<double> A = op.sparse();
    std::vector<Candidate> cand;
    auto harvest = [&](double sigma, int k) {
        for (const auto& p : shift_invert_arnoldi(A, sigma, k)) {
            bool dup = false;
            for (const auto& c : cand)
                if (std::abs(c.lambda - p.lambda) <= 1e-9 * std::max(1.0, std::abs(c.lambda)))
                    dup = true;
            if (!dup) cand.push_back({p.lambda, mass_functional_interleaved(p.vec, *op.grid)});
        }
    };
    harvest(-1e-3, std::max(6, window.count / 2 + 2));
    harvest(window.re_min, std::max(6, window.count / 2 + 2));
    return cand;
}

}  // namespace

SpectrumResult constrained_spectrum(const LinearizedOperator& op, const SpectrumWindow& window,
                                    EigMethod method) {
    if (method == EigMethod::Auto)
        method = (2 * op.n <= 4096) ? EigMethod::Dense : EigMethod::ShiftInvert;
    std::vector<Candidate> cand = (method == EigMethod::Dense) ? dense_candidates(op)
                                                               : iterative_candidates(op, window);
    SpectrumResult out = classify(std::move(cand), op, window);
    out.mu0_scalar = scalar_principal_eigenvalue(op).mu0;
    return out;
}

namespace {

// Tridiagonal solve with partial pivoting (three-band elimination); tolerates
// the nearly singular shifts used by inverse iteration.
void tridiag_solve_pivot(std::vector<double> a, std::vector<double> b, std::vector<double> c,
                         std::vector<double>& x) {
    const int n = int(b.size());
    std::vector<double> d(n, 0.0);  // second superdiagonal fill-in
    for (int i = 0; i < n - 1; ++i) {
        if (std::abs(a[i + 1]) > std::abs(b[i])) {
            std::swap(b[i], a[i + 1]);
            std::swap(c[i], b[i + 1]);
            if (i + 2 < n) std::swap(d[i], c[i + 1]);
            std::swap(x[i], x[i + 1]);
        }
        if (b[i] == 0.0) b[i] = 1e-300;
        const double m = a[i + 1] / b[i];
        b[i + 1] -= m * c[i];
        if (i + 2 < n) c[i + 1] -= m * d[i];
        x[i + 1] -= m * x[i];
    }
    if (b[n - 1] == 0.0) b[n - 1] = 1e-300;
    x[n - 1] /= b[n - 1];
    if (n >= 2) x[n - 2] = (x[n - 2] - c[n - 2] * x[n - 1]) / b[n - 2];
    for (int i = n - 3; i >= 0; --i) x[i] = (x[i] - c[i] * x[i + 1] - d[i] * x[i + 2]) / b[i];
}

int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
    int count = 0;
    double q = diag[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        double denom = q;
        if (denom == 0.0) denom = 1e-300;
        q = diag[i] - x - off[i - 1] * off[i - 1] / denom;
        if (q < 0.0) ++count;
    }
    return count;
}

}  // namespace

ScalarPrincipal scalar_principal_eigenvalue(const LinearizedOperator& op) {
    const int n = op.n;
    const Grid& g = *op.grid;
    const double r = op.eps * op.eps / (g.h * g.h);
    // similarity transform with sqrt of the quadrature weights makes the
    // Neumann-closed block symmetric tridiagonal
    std::vector<double> diag(n), off(n - 1);
    for (int i = 0; i < n; ++i) diag[i] = -2.0 * r + op.fu[i];
    for (int i = 0; i + 1 < n; ++i) off[i] = r;
    off[0] = std::sqrt(2.0) * r;
    off[n - 2] = std::sqrt(2.0) * r;

    double lo = diag[0], hi = diag[0];
    for (int i = 0; i < n; ++i) {
        const double radius = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - radius);
        hi = std::max(hi, diag[i] + radius);
    }
    // bisection for the largest eigenvalue
    double a = lo, b = hi + 1e-12 * (hi - lo);
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::abs(b)); ++it) {
        const double mid = 0.5 * (a + b);
        if (sturm_count(diag, off, mid) >= n)
            b = mid;
        else
            a = mid;
    }
    const double mu0 = 0.5 * (a + b);

    // inverse iteration at a slightly shifted value
    const double shift = mu0 + 1e-11 * std::max(1.0, std::abs(mu0) + std::abs(diag[0]));
    std::vector<double> x(n, 1.0);
    for (int i = 0; i < n; ++i) x[i] = 1.0 + 0.3 * std::cos(3.0 * double(i) / double(n));
    for (int iter = 0; iter < 4; ++iter) {
        std::vector<double> lower(n, 0.0), mid(n), upper(n, 0.0);
        for (int i = 0; i < n; ++i) mid[i] = diag[i] - shift;
        for (int i = 0; i + 1 < n; ++i) {
            upper[i] = off[i];
            lower[i + 1] = off[i];
        }
        tridiag_solve_pivot(lower, mid, upper, x);
        double norm = 0.0;
        for (double v : x) norm = std::max(norm, std::abs(v));
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw EigensolverFailed("inverse iteration for the scalar block broke down");
        for (double& v : x) v /= norm;
    }
    ScalarPrincipal out;
    out.mu0 = mu0;
    out.phi0.resize(n);
    for (int i = 0; i < n; ++i) out.phi0[i] = x[i] / std::sqrt(g.w[i]);
    double norm2 = 0.0, mean = 0.0;
    for (int i = 0; i < n; ++i) {
        norm2 += g.w[i] * out.phi0[i] * out.phi0[i];
        mean += g.w[i] * out.phi0[i];
    }
    const double s = (mean >= 0.0 ? 1.0 : -1.0) / std::sqrt(norm2);
    for (double& v : out.phi0) v *= s;
    return out;
}

std::vector<ArnoldiPair> shift_invert_arnoldi(const Eigen::SparseMatrix<double>& A, double sigma,
                                              int n_wanted, int subspace, double rel_tol) {
    const int N = int(A.rows());
    if (subspace + 1 > N) subspace = N - 1;
    const int m = std::min(subspace, N);
    Eigen::SparseMatrix<double> B = A;
    for (int i = 0; i < N; ++i) B.coeffRef(i, i) -= sigma;
    B.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(B);
    if (lu.info() != Eigen::Success) {
        // unlucky shift; nudge once
        for (int i = 0; i < N; ++i) B.coeffRef(i, i) -= 0.17 * std::abs(sigma) + 1e-8;
        lu.compute(B);
        if (lu.info() != Eigen::Success)
            throw EigensolverFailed("shift-invert factorization failed at sigma=" + fmt(sigma));
    }

    Eigen::MatrixXd Vb(N, m + 1);
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
    Eigen::VectorXd v0(N);
    for (int i = 0; i < N; ++i) v0[i] = 1.0 + 0.5 * std::cos(7.0 * double(i) / double(N));
    Vb.col(0) = v0 / v0.norm();
    int steps = m;
    for (int j = 0; j < m; ++j) {
        Eigen::VectorXd w = lu.solve(Vb.col(j));
        // modified Gram-Schmidt with one reorthogonalization pass
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i <= j; ++i) {
                const double hij = Vb.col(i).dot(w);
                w -= hij * Vb.col(i);
                H(i, j) += hij;
            }
        }
        const double hnext = w.norm();
        H(j + 1, j) = hnext;
        if (hnext < 1e-12) {
            steps = j + 1;
            break;
        }
        Vb.col(j + 1) = w / hnext;
    }

    // on happy breakdown the trailing beta is below the deflation threshold
    Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(steps, steps), true);
    if (es.info() != Eigen::Success) throw EigensolverFailed("Hessenberg eigensolve failed");

    struct Ritz {
        std::complex<double> theta;
        int idx;
    };
    std::vector<Ritz> ritz;
    for (int i = 0; i < steps; ++i) ritz.push_back({es.eigenvalues()[i], i});
    std::sort(ritz.begin(), ritz.end(),
              [](const Ritz& a, const Ritz& b) { return std::abs(a.theta) > std::abs(b.theta); });

    const double beta = H(steps, steps - 1);
    std::vector<ArnoldiPair> out;
    for (const auto& rz : ritz) {
        if (int(out.size()) >= n_wanted) break;
        if (std::abs(rz.theta) < 1e-14) continue;
        Eigen::VectorXcd y = es.eigenvectors().col(rz.idx);
        // Arnoldi residual of the inverse-operator eigenpair; relative
        // convergence here bounds the eigenvalue error by ~tol * |lambda-sigma|
        const double hres = std::abs(beta * y[steps - 1]);
        if (hres > rel_tol * std::abs(rz.theta)) continue;
        const std::complex<double> lambda = sigma + 1.0 / rz.theta;
        Eigen::VectorXcd x = Vb.leftCols(steps) * y;
        x /= x.norm();
        out.push_back({lambda, std::move(x)});
    }
    if (out.empty())
        throw EigensolverFailed("no Ritz pair converged at sigma=" + fmt(sigma) +
                                "; enlarge the subspace");
    return out;
}

ScalingFit scaling_study(const BistableModel& model, const LayerAsymptotics& asym, double d,
                         double xi, const std::vector<double>& eps_list,
                         const std::function<int(double)>& n_for_eps, const SpectrumWindow& window,
                         EigMethod method) {
    if (eps_list.size() < 3)
        throw ConfigError("scaling_study: need at least three eps entries");
    ScalingFit fit;
    fit.predicted = asym.lambda_slope;
    for (double eps : eps_list) {
        ScalingRow row;
        row.eps = eps;
        row.n = n_for_eps(eps);
        try {
            const Grid grid = Grid::uniform(row.n);
            const StationaryProblem prob{model, eps, d, xi, grid};
            const StationaryState st = solve_stationary(asym, prob);
            const LinearizedOperator op = assemble_linearization(st, grid, model);
            const SpectrumResult sp = constrained_spectrum(op, window, method);
            row.lambda_crit = sp.critical;
            row.lambda_over_eps = sp.critical.real() / eps;
            row.mu0 = sp.mu0_scalar;
        } catch (const Error& e) {
            row.error = e.what();
        }
        fit.table.push_back(row);
    }
    std::vector<double> xs, ys;
    for (const auto& row : fit.table)
        if (row.error.empty()) {
            xs.push_back(row.eps);
            ys.push_back(row.lambda_over_eps);
        }
    if (xs.size() < 3)
        throw EigensolverFailed("scaling_study: fewer than three entries succeeded");
    const LinearFit lf = linear_fit(xs, ys);
    fit.slope = lf.intercept;
    fit.r2 = lf.r2;
    return fit;
}

}  // namespace mcrd
