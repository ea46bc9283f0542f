#include "mcrd/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcrd/quad.hpp"

namespace mcrd {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

// Bracketed bisection followed by a safeguarded Newton polish.
template <class F, class DF>
double refine_root(const F& f, const DF& df, double lo, double hi, const ModelTolerances& tol) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    const double scale = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    // bisect until the bracket is narrow enough for Newton to be safe
    while (hi - lo > 1e-7 * scale) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    double u = 0.5 * (lo + hi);
    for (int it = 0; it < 30; ++it) {
        const double fu = f(u);
        if (std::abs(fu) <= tol.root_residual) return u;
        const double d = df(u);
        double un = (d != 0.0) ? u - fu / d : u;
        if (!(un > lo && un < hi)) un = 0.5 * (lo + hi);  // fall back to bisection
        const double fn = f(un);
        if (flo * fn < 0.0) {
            hi = un;
        } else {
            lo = un;
            flo = fn;
        }
        if (std::abs(un - u) < tol.bisection_interval * scale && std::abs(fn) <= tol.root_residual)
            return un;
        u = un;
    }
    if (std::abs(f(u)) <= tol.root_residual) return u;
    throw NumericalError("root refinement stalled near u=" + fmt(u));
}

// Sign changes of g on [a,b], refined by bisection; used for critical points.
template <class G>
std::vector<double> sign_changes(const G& g, double a, double b, int samples) {
    std::vector<double> out;
    double prev_x = a, prev_g = g(a);
    for (int i = 1; i <= samples; ++i) {
        const double x = a + (b - a) * double(i) / double(samples);
        const double gx = g(x);
        if (prev_g == 0.0) {
            out.push_back(prev_x);
        } else if (prev_g * gx < 0.0) {
            double lo = prev_x, hi = x, glo = prev_g;
            for (int k = 0; k < 80 && hi - lo > 1e-14 * std::max(1.0, std::abs(hi)); ++k) {
                const double mid = 0.5 * (lo + hi), gm = g(mid);
                if (glo * gm <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                    glo = gm;
                }
            }
            out.push_back(0.5 * (lo + hi));
        }
        prev_x = x;
        prev_g = gx;
    }
    return out;
}

void check_partials(const CustomCallbacks& cb) {
    const double us[] = {-1.3, -0.2, 0.1, 0.45, 0.9, 2.7};
    const double vs[] = {-0.8, 0.0, 0.35, 1.9};
    for (double u : us) {
        for (double v : vs) {
            const double hu = 1e-6 * (1.0 + std::abs(u));
            const double hv = 1e-6 * (1.0 + std::abs(v));
            const double du = (cb.f(u + hu, v) - cb.f(u - hu, v)) / (2.0 * hu);
            const double dv = (cb.f(u, v + hv) - cb.f(u, v - hv)) / (2.0 * hv);
            const double su = std::max(1.0, std::abs(cb.f_u(u, v)));
            const double sv = std::max(1.0, std::abs(cb.f_v(u, v)));
            if (std::abs(du - cb.f_u(u, v)) > 1e-5 * su || std::abs(dv - cb.f_v(u, v)) > 1e-5 * sv)
                throw ConfigError("custom model: analytic partials disagree with finite differences at (u,v)=(" +
                                  fmt(u) + "," + fmt(v) + ")");
        }
    }
}

}  // namespace

BistableModel BistableModel::cubic(double alpha, double beta) {
    if (!(alpha > 0.0)) throw ConfigError("cubic model: alpha must be > 0, got " + fmt(alpha));
    if (!(beta > 0.0 && beta < 1.0))
        throw ConfigError("cubic model: beta must lie in (0,1), got " + fmt(beta));
    BistableModel m;
    m.kind_ = Kind::Cubic;
    m.alpha_ = alpha;
    m.beta_ = beta;
    m.name_ = "cubic";
    return m;
}

BistableModel BistableModel::hill(double kappa) {
    if (!(kappa > 0.0 && kappa < 0.125))
        throw ConfigError("hill model: kappa must lie in (0, 1/8), got " + fmt(kappa));
    BistableModel m;
    m.kind_ = Kind::Hill;
    m.kappa_ = kappa;
    m.name_ = "hill";
    return m;
}

BistableModel BistableModel::custom(CustomCallbacks callbacks) {
    if (!callbacks.f || !callbacks.f_u || !callbacks.f_v)
        throw ConfigError("custom model: f, f_u and f_v callbacks are all required");
    check_partials(callbacks);
    BistableModel m;
    m.kind_ = Kind::Custom;
    m.name_ = callbacks.name;
    m.cb_ = std::move(callbacks);
    return m;
}

double BistableModel::search_u_min() const {
    return kind_ == Kind::Custom ? cb_.u_min : -10.0;
}

double BistableModel::search_u_max(double v) const {
    if (kind_ == Kind::Custom) return cb_.u_max ? cb_.u_max(v) : std::max(10.0, 5.0 * (1.0 + v));
    return std::max(10.0, 5.0 * (1.0 + std::abs(v)));
}

namespace {

Roots cubic_roots_closed_form(const BistableModel& model, double v, const ModelTolerances& tol) {
    // monic u^3 + A u^2 + B u + C = 0
    const double A = -(1.0 + model.beta());
    const double B = model.beta();
    const double C = -model.alpha() * v;
    const double s = -A / 3.0;
    const double P = B - A * A / 3.0;
    const double Q = 2.0 * A * A * A / 27.0 - A * B / 3.0 + C;
    const double disc = Q * Q / 4.0 + P * P * P / 27.0;
    if (!(disc < 0.0))
        throw NotBistable("cubic has fewer than three real roots at v=" + fmt(v) +
                          " (v outside the bistable interval)");
    const double m = 2.0 * std::sqrt(-P / 3.0);
    const double theta = std::acos(std::clamp(3.0 * Q / (P * m), -1.0, 1.0));
    double r[3];
    for (int k = 0; k < 3; ++k) r[k] = s + m * std::cos(theta / 3.0 - 2.0 * kPi * double(k) / 3.0);
    std::sort(r, r + 3);
    // one Newton polish per root
    for (double& u : r) {
        for (int it = 0; it < 3 && std::abs(model.f(u, v)) > tol.root_residual; ++it) {
            const double d = model.f_u(u, v);
            if (d == 0.0) break;
            u -= model.f(u, v) / d;
        }
    }
    return Roots{r[0], r[1], r[2], v};
}

Roots scanned_roots(const BistableModel& model, double v, const ModelTolerances& tol) {
    const double lo = model.search_u_min();
    const double hi = model.search_u_max(v);
    auto fu = [&](double u) { return model.f_u(u, v); };
    auto f = [&](double u) { return model.f(u, v); };
    // The two critical points of f(.,v) separate the three roots even when a
    // pair of roots is about to coalesce at a fold, so bracket through them.
    const auto crit = sign_changes(fu, lo, hi, 1024);
    if (crit.size() != 2) {
        std::vector<double> direct = sign_changes(f, lo, hi, 4096);
        if (direct.size() != 3)
            throw NotBistable("found " + std::to_string(direct.size()) +
                              " roots of f(.,v) at v=" + fmt(v) + " on [" + fmt(lo) + "," + fmt(hi) +
                              "] (need exactly 3; v may be outside I or the range unsuitable)");
        Roots rr{direct[0], direct[1], direct[2], v};
        return rr;
    }
    const double c1 = crit[0], c2 = crit[1];
    if (!(f(c1) < 0.0 && f(c2) > 0.0))
        throw NotBistable("f(.,v) has no three-root configuration at v=" + fmt(v) +
                          " (critical values do not straddle zero)");
    if (!(f(lo) > 0.0 && f(hi) < 0.0))
        throw NotBistable("search range [" + fmt(lo) + "," + fmt(hi) +
                          "] does not bracket the outer roots at v=" + fmt(v));
    auto dfu = [&](double u) { return model.f_u(u, v); };
    Roots r;
    r.h_minus = refine_root(f, dfu, lo, c1, tol);
    r.h_zero = refine_root(f, dfu, c1, c2, tol);
    r.h_plus = refine_root(f, dfu, c2, hi, tol);
    r.v = v;
    return r;
}

void validate_roots(const BistableModel& model, const Roots& r, const ModelTolerances& tol) {
    if (!(r.h_minus < r.h_zero && r.h_zero < r.h_plus))
        throw NotBistable("roots at v=" + fmt(r.v) + " are not distinct/ordered");
    for (double u : {r.h_minus, r.h_zero, r.h_plus})
        if (std::abs(model.f(u, r.v)) > tol.root_residual)
            throw NumericalError("root residual " + fmt(model.f(u, r.v)) + " above tolerance at v=" + fmt(r.v));
    if (!(model.f_u(r.h_minus, r.v) < 0.0 && model.f_u(r.h_zero, r.v) > 0.0 &&
          model.f_u(r.h_plus, r.v) < 0.0))
        throw NotBistable("sign pattern of f_u at the roots is not (-,+,-) at v=" + fmt(r.v));
}

}  // namespace

Roots roots_at(const BistableModel& model, double v, const ModelTolerances& tol) {
    Roots r = (model.kind() == BistableModel::Kind::Cubic) ? cubic_roots_closed_form(model, v, tol)
                                                           : scanned_roots(model, v, tol);
    validate_roots(model, r, tol);
    return r;
}

namespace {

FoldPoint custom_fold_newton(const BistableModel& model, double u0, double v0) {
    double u = u0, v = v0;
    auto res_norm = [&](double uu, double vv) {
        return std::max(std::abs(model.f(uu, vv)), std::abs(model.f_u(uu, vv)));
    };
    for (int it = 0; it < 80; ++it) {
        const double F1 = model.f(u, v), F2 = model.f_u(u, v);
        if (std::max(std::abs(F1), std::abs(F2)) < 1e-13) break;
        const double hu = 1e-6 * (1.0 + std::abs(u));
        const double fuu = (model.f_u(u + hu, v) - model.f_u(u - hu, v)) / (2.0 * hu);
        const double hv = 1e-6 * (1.0 + std::abs(v));
        const double fuv = (model.f_u(u, v + hv) - model.f_u(u, v - hv)) / (2.0 * hv);
        const double a = model.f_u(u, v), b = model.f_v(u, v);
        const double det = a * fuv - b * fuu;
        if (det == 0.0) throw FoldNotFound("singular fold Newton step");
        double du = (-F1 * fuv + F2 * b) / det;
        double dv = (-a * F2 + fuu * F1) / det;
        double t = 1.0;
        const double n0 = res_norm(u, v);
        while (t > 1.0 / 1024.0 && res_norm(u + t * du, v + t * dv) > (1.0 - 1e-4 * t) * n0) t *= 0.5;
        u += t * du;
        v += t * dv;
    }
    if (res_norm(u, v) > 1e-10)
        throw FoldNotFound("fold Newton did not converge from seed (u,v)=(" + fmt(u0) + "," + fmt(v0) + ")");
    return FoldPoint{v, u, 0.0};
}

std::vector<FoldPoint> custom_folds(const BistableModel& model) {
    std::vector<FoldPoint> folds;
    const int nv = 41;
    const double va = model.v_seed_min(), vb = model.v_seed_max();
    for (int i = 0; i <= nv; ++i) {
        // Seeds: critical points of f(.,v) sampled across the configured v window.
        const double v = va + (vb - va) * double(i) / double(nv);
        auto fu = [&](double u) { return model.f_u(u, v); };
        for (double c : sign_changes(fu, model.search_u_min(), model.search_u_max(v), 512)) {
            if (std::abs(model.f(c, v)) > 0.5) continue;  // far from a double root, skip
            try {
                FoldPoint fp = custom_fold_newton(model, c, v);
                bool dup = false;
                for (const auto& g : folds)
                    if (std::abs(g.v - fp.v) < 1e-8 && std::abs(g.u_double - fp.u_double) < 1e-8) dup = true;
                if (!dup) folds.push_back(fp);
            } catch (const FoldNotFound&) {
            }
        }
    }
    return folds;
}

// Simple root of f(., v) away from the double root at a fold.
double simple_root_at_fold(const BistableModel& model, double v, double u_double,
                           const ModelTolerances& tol) {
    auto f = [&](double u) { return model.f(u, v); };
    auto df = [&](double u) { return model.f_u(u, v); };
    const double lo = model.search_u_min(), hi = model.search_u_max(v);
    const double gap = 1e-4 * (hi - lo);
    for (auto [a, b] : {std::pair{lo, u_double - gap}, std::pair{u_double + gap, hi}}) {
        if (a >= b) continue;
        if (f(a) * f(b) < 0.0) return refine_root(f, df, a, b, tol);
    }
    throw FoldNotFound("no simple root beside the double root at v=" + fmt(v));
}

}  // namespace

FoldPoint fold_point(const BistableModel& model, FoldSide side, const ModelTolerances& tol) {
    switch (model.kind()) {
        case BistableModel::Kind::Cubic: {
            const double beta = model.beta(), alpha = model.alpha();
            const double rho = 1.0 - beta + beta * beta;
            auto g = [&](double u) { return u * (u - 1.0) * (u - beta) / alpha; };
            if (side == FoldSide::Lower) {
                const double ud = (1.0 + beta + std::sqrt(rho)) / 3.0;
                return FoldPoint{g(ud), ud, (1.0 + beta - 2.0 * std::sqrt(rho)) / 3.0};
            }
            const double ud = (1.0 + beta - std::sqrt(rho)) / 3.0;
            return FoldPoint{g(ud), ud, (1.0 + beta + 2.0 * std::sqrt(rho)) / 3.0};
        }
        case BistableModel::Kind::Hill: {
            const double k = model.kappa();
            const double root = std::sqrt(1.0 - 8.0 * k);
            const double phi = (side == FoldSide::Lower) ? (1.0 - 2.0 * k + root) / 2.0
                                                         : (1.0 - 2.0 * k - root) / 2.0;
            const double v = (1.0 + k - phi) / (2.0 * k * (1.0 + k)) * std::sqrt(phi / (1.0 + k));
            const double ud = std::sqrt(phi / (1.0 + k));
            const double us = (1.0 + k - phi) / (2.0 * std::sqrt((1.0 + k) * phi));
            return FoldPoint{v, ud, us};
        }
        default: {
            auto folds = custom_folds(model);
            if (folds.size() < 2) throw FoldNotFound("fold seed sweep found fewer than two double roots");
            std::sort(folds.begin(), folds.end(),
                      [](const FoldPoint& a, const FoldPoint& b) { return a.v < b.v; });
            // adjacent fold pair bounding a window where f(.,v) has three roots
            for (std::size_t i = 0; i + 1 < folds.size(); ++i) {
                const double v_mid = 0.5 * (folds[i].v + folds[i + 1].v);
                try {
                    (void)scanned_roots(model, v_mid, tol);
                } catch (const NotBistable&) {
                    continue;
                }
                FoldPoint fp = (side == FoldSide::Lower) ? folds[i] : folds[i + 1];
                fp.u_simple = simple_root_at_fold(model, fp.v, fp.u_double, tol);
                return fp;
            }
            throw FoldNotFound("no adjacent fold pair bounds a bistable window");
        }
    }
}

BistableInterval fold_points(const BistableModel& model, const ModelTolerances& tol) {
    BistableInterval iv;
    iv.v_lower = fold_point(model, FoldSide::Lower, tol).v;
    iv.v_upper = fold_point(model, FoldSide::Upper, tol).v;
    if (!(iv.v_lower < iv.v_upper))
        throw FoldNotFound("fold values are not ordered: v_lower=" + fmt(iv.v_lower) +
                           " v_upper=" + fmt(iv.v_upper));
    return iv;
}

double maxwell_integral(const BistableModel& model, double v, const ModelTolerances& tol) {
    const Roots r = roots_at(model, v, tol);
    return integrate([&](double u) { return model.f(u, v); }, r.h_minus, r.h_plus, tol.quadrature_abs);
}

double maxwell_integral_at_fold(const BistableModel& model, FoldSide side, const ModelTolerances& tol) {
    const FoldPoint fp = fold_point(model, side, tol);
    const double a = std::min(fp.u_double, fp.u_simple);
    const double b = std::max(fp.u_double, fp.u_simple);
    return integrate([&](double u) { return model.f(u, fp.v); }, a, b, tol.quadrature_abs);
}

double maxwell_slope(const BistableModel& model, double v, const ModelTolerances& tol) {
    const Roots r = roots_at(model, v, tol);
    return integrate([&](double u) { return model.f_v(u, v); }, r.h_minus, r.h_plus, tol.quadrature_abs);
}

MaxwellPoint find_vstar(const BistableModel& model, const ModelTolerances& tol,
                        std::optional<int> select_index) {
    const BistableInterval iv = fold_points(model, tol);
    const double width = iv.v_upper - iv.v_lower;
    const double delta = tol.scan_margin_rel * width;
    const double a = iv.v_lower + delta, b = iv.v_upper - delta;
    const int samples = 256;
    std::vector<double> vs(samples + 1), js(samples + 1);
    for (int i = 0; i <= samples; ++i) {
        vs[i] = a + (b - a) * double(i) / double(samples);
        js[i] = maxwell_integral(model, vs[i], tol);
    }
    std::vector<std::pair<double, double>> brackets;
    for (int i = 0; i < samples; ++i)
        if (js[i] == 0.0 || js[i] * js[i + 1] < 0.0) brackets.emplace_back(vs[i], vs[i + 1]);
    if (brackets.empty())
        throw NoMaxwellPoint("the area integral has no sign change on (" + fmt(a) + "," + fmt(b) + ")");
    if (brackets.size() > 1 && !select_index) {
        std::vector<double> cand;
        for (auto& [lo, hi] : brackets) cand.push_back(0.5 * (lo + hi));
        std::string msg = "multiple Maxwell candidates near v = {";
        for (double c : cand) msg += " " + fmt(c);
        throw MultipleMaxwellPoints(msg + " }; select one via config", cand);
    }
    const int idx = select_index.value_or(0);
    if (idx < 0 || idx >= int(brackets.size()))
        throw ConfigError("maxwell point index " + std::to_string(idx) + " out of range (found " +
                          std::to_string(brackets.size()) + ")");
    auto [lo, hi] = brackets[idx];
    double jlo = maxwell_integral(model, lo, tol);
    while (hi - lo > 1e-13 * width) {
        const double mid = 0.5 * (lo + hi);
        const double jm = maxwell_integral(model, mid, tol);
        if (jm == 0.0) {
            lo = hi = mid;
            break;
        }
        if (jlo * jm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            jlo = jm;
        }
    }
    double v = 0.5 * (lo + hi);
    // Newton on the area integral with its analytic derivative
    for (int it = 0; it < 8; ++it) {
        const double j = maxwell_integral(model, v, tol);
        if (std::abs(j) <= 1e-13) break;
        const double jp = maxwell_slope(model, v, tol);
        if (jp == 0.0) break;
        v -= j / jp;
    }
    MaxwellPoint mp;
    mp.v_star = v;
    mp.j_prime = maxwell_slope(model, v, tol);
    if (std::abs(maxwell_integral(model, v, tol)) > 1e-12)
        throw NumericalError("Maxwell point refinement left |area integral| above 1e-12");
    if (mp.j_prime == 0.0)
        throw NoMaxwellPoint("area integral has a zero of even order at v=" + fmt(v));
    return mp;
}

AssumptionReport verify_assumptions(const BistableModel& model, int n_samples,
                                    const ModelTolerances& tol) {
    if (n_samples < 3) throw ConfigError("verify_assumptions: need n_samples >= 3");
    AssumptionReport rep;
    BistableInterval iv;
    try {
        iv = fold_points(model, tol);
    } catch (const Error& e) {
        rep.failures.push_back(std::string("fold location failed: ") + e.what());
        return rep;
    }
    const double width = iv.v_upper - iv.v_lower;
    const double margin = tol.fold_margin_rel * width;
    rep.a1_holds = true;
    rep.a3_holds = true;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_samples; ++i) {
        const double v = iv.v_lower + margin + (width - 2.0 * margin) * (double(i) + 0.5) / double(n_samples);
        try {
            const Roots r = roots_at(model, v, tol);
            const double m_minus = model.f_v(r.h_minus, v) - model.f_u(r.h_minus, v);
            const double m_plus = model.f_v(r.h_plus, v) - model.f_u(r.h_plus, v);
            const double m = std::min(m_minus, m_plus);
            rep.samples.emplace_back(v, m);
            rep.min_margin = std::min(rep.min_margin, m);
            if (!(m > 0.0)) {
                rep.a3_holds = false;
                rep.failures.push_back("(A3) violated at v=" + fmt(v) + " with margin " + fmt(m));
            }
        } catch (const Error& e) {
            rep.a1_holds = false;
            rep.failures.push_back(std::string("(A1) failed at v=") + fmt(v) + ": " + e.what());
        }
    }
    try {
        const MaxwellPoint mp = find_vstar(model, tol);
        rep.v_star = mp.v_star;
        rep.j_prime_at_vstar = mp.j_prime;
        rep.a2_holds = std::abs(maxwell_integral(model, mp.v_star, tol)) <= 1e-10 && mp.j_prime != 0.0;
    } catch (const Error& e) {
        rep.a2_holds = false;
        rep.failures.push_back(std::string("(A2) failed: ") + e.what());
    }
    return rep;
}

}  // namespace mcrd
