#include "mcrd/model.hpp"

#include <cmath>

#include "doctest.h"

using namespace mcrd;

namespace {

// Standard cubic with the sign of the v-coupling flipped: bistable with a clean
// fold window, Maxwell zero at v=0 with negative slope, and f_v - f_u < 0 at the
// stable roots (a deliberate (A3) violation).
BistableModel flipped_cubic() {
    CustomCallbacks cb;
    cb.f = [](double u, double v) { return -v - u * (u - 0.5) * (u - 1.0); };
    cb.f_u = [](double u, double) { return -(3.0 * u * u - 3.0 * u + 0.5); };
    cb.f_v = [](double, double) { return -1.0; };
    cb.name = "flipped-cubic";
    return BistableModel::custom(cb);
}

// Cubic expressed through the Custom interface; used to exercise the scanned
// root path against the closed form.
BistableModel cubic_as_custom(double alpha, double beta) {
    CustomCallbacks cb;
    cb.f = [=](double u, double v) { return alpha * v - u * (u - beta) * (u - 1.0); };
    cb.f_u = [=](double u, double) { return -3.0 * u * u + 2.0 * (1.0 + beta) * u - beta; };
    cb.f_v = [=](double, double) { return alpha; };
    cb.name = "cubic-as-custom";
    return BistableModel::custom(cb);
}

}  // namespace

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(BistableModel::cubic(-0.1, 0.5), ConfigError);
    CHECK_THROWS_AS(BistableModel::cubic(0.2, 1.5), ConfigError);
    CHECK_THROWS_AS(BistableModel::hill(0.2), ConfigError);   // kappa >= 1/8
    CHECK_THROWS_AS(BistableModel::hill(-0.01), ConfigError);
    CHECK_NOTHROW(BistableModel::hill(0.067));
}

TEST_CASE("custom partials are cross-checked against finite differences") {
    CustomCallbacks cb;
    cb.f = [](double u, double v) { return v - u * u * u; };
    cb.f_u = [](double u, double) { return -3.0 * u * u + 0.3; };  // wrong on purpose
    cb.f_v = [](double, double) { return 1.0; };
    CHECK_THROWS_AS(BistableModel::custom(cb), ConfigError);
}

TEST_CASE("roots_at: cubic closed form at v=0") {
    auto m = BistableModel::cubic(0.2, 0.5);
    const Roots r = roots_at(m, 0.0);
    CHECK(std::abs(r.h_minus) <= 1e-13);
    CHECK(r.h_zero == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(r.h_plus == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("roots_at: fails at a fold") {
    auto m = BistableModel::hill(0.067);
    const BistableInterval iv = fold_points(m);
    CHECK_THROWS_AS(roots_at(m, iv.v_lower), NotBistable);
    CHECK_THROWS_AS(roots_at(m, iv.v_upper + 0.5), NotBistable);
}

TEST_CASE("roots_at: hill at v=1.802") {
    auto m = BistableModel::hill(0.067);
    const Roots r = roots_at(m, 1.802);
    // frozen from an independent scipy bisection run
    CHECK(r.h_minus == doctest::Approx(0.1732399638517).epsilon(1e-10));
    CHECK(r.h_zero == doctest::Approx(0.6134720112123).epsilon(1e-10));
    CHECK(r.h_plus == doctest::Approx(1.1360220249361).epsilon(1e-10));
    const double inv_sqrt3 = 1.0 / std::sqrt(3.0);
    CHECK(r.h_minus < inv_sqrt3);
    CHECK(r.h_plus > inv_sqrt3);
}

TEST_CASE("root consistency across the bistable interval") {
    for (auto m : {BistableModel::cubic(0.2, 0.3), BistableModel::hill(0.067)}) {
        const BistableInterval iv = fold_points(m);
        for (int i = 1; i <= 24; ++i) {
            const double v = iv.v_lower + (iv.v_upper - iv.v_lower) * double(i) / 25.0;
            const Roots r = roots_at(m, v);
            for (double u : {r.h_minus, r.h_zero, r.h_plus}) CHECK(std::abs(m.f(u, v)) <= 1e-12);
            CHECK(m.f_u(r.h_minus, v) < 0.0);
            CHECK(m.f_u(r.h_zero, v) > 0.0);
            CHECK(m.f_u(r.h_plus, v) < 0.0);
        }
    }
}

TEST_CASE("fold_points: symmetric cubic has opposite folds") {
    auto m = BistableModel::cubic(0.37, 0.5);
    const BistableInterval iv = fold_points(m);
    CHECK(iv.v_upper == doctest::Approx(-iv.v_lower).epsilon(1e-13));
    // frozen for alpha=0.2 (value scales as 1/alpha)
    auto m2 = BistableModel::cubic(0.2, 0.5);
    const BistableInterval iv2 = fold_points(m2);
    CHECK(iv2.v_upper == doctest::Approx(0.24056261216234406).epsilon(1e-12));
}

TEST_CASE("fold_points: hill folds merge as kappa -> 1/8") {
    const BistableInterval a = fold_points(BistableModel::hill(0.1));
    const BistableInterval b = fold_points(BistableModel::hill(0.1249));
    CHECK(b.v_upper - b.v_lower < 0.1 * (a.v_upper - a.v_lower));
    CHECK(b.v_upper - b.v_lower < 5e-3);
}

TEST_CASE("fold_points: hill kappa=0.067 brackets the Maxwell value") {
    const BistableInterval iv = fold_points(BistableModel::hill(0.067));
    CHECK(iv.v_lower == doctest::Approx(1.7473569568774943).epsilon(1e-12));
    CHECK(iv.v_upper == doctest::Approx(2.0060157388670485).epsilon(1e-12));
    CHECK(iv.v_lower < 1.802);
    CHECK(iv.v_upper > 1.802);
}

TEST_CASE("fold formulas satisfy the double-root equations") {
    // closed-form fold expressions must solve f = 0, f_u = 0 exactly
    for (double kappa : {0.01, 0.05, 0.1, 0.12}) {
        auto m = BistableModel::hill(kappa);
        for (auto side : {FoldSide::Lower, FoldSide::Upper}) {
            const FoldPoint fp = fold_point(m, side);
            CHECK(std::abs(m.f(fp.u_double, fp.v)) <= 1e-12);
            CHECK(std::abs(m.f_u(fp.u_double, fp.v)) <= 1e-12);
            CHECK(std::abs(m.f(fp.u_simple, fp.v)) <= 1e-12);
        }
    }
    for (double beta : {0.2, 0.5, 0.8}) {
        auto m = BistableModel::cubic(0.2, beta);
        for (auto side : {FoldSide::Lower, FoldSide::Upper}) {
            const FoldPoint fp = fold_point(m, side);
            CHECK(std::abs(m.f(fp.u_double, fp.v)) <= 1e-12);
            CHECK(std::abs(m.f_u(fp.u_double, fp.v)) <= 1e-12);
        }
    }
}

TEST_CASE("hill lower-fold root is increasing in kappa with values in (0, 1/sqrt3)") {
    double prev = 0.0;
    for (double kappa : {0.01, 0.03, 0.05, 0.067, 0.09, 0.11, 0.124}) {
        const FoldPoint fp = fold_point(BistableModel::hill(kappa), FoldSide::Lower);
        CHECK(fp.u_simple > prev);
        CHECK(fp.u_simple < 1.0 / std::sqrt(3.0));
        prev = fp.u_simple;
    }
}

TEST_CASE("maxwell_integral: cubic closed forms") {
    // J(0) = 1/12 - beta/6, exactly zero at beta = 1/2
    CHECK(std::abs(maxwell_integral(BistableModel::cubic(0.7, 0.5), 0.0)) <= 1e-12);
    for (double beta : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        auto m = BistableModel::cubic(0.2, beta);
        CHECK(std::abs(maxwell_integral(m, 0.0) - (1.0 / 12.0 - beta / 6.0)) <= 1e-12);
        // at the folds: J = -/+ rho^2/12
        const double rho = 1.0 - beta + beta * beta;
        CHECK(maxwell_integral_at_fold(m, FoldSide::Lower) ==
              doctest::Approx(-rho * rho / 12.0).epsilon(1e-10));
        CHECK(maxwell_integral_at_fold(m, FoldSide::Upper) ==
              doctest::Approx(rho * rho / 12.0).epsilon(1e-10));
    }
}

TEST_CASE("maxwell_integral at hill folds straddles zero") {
    for (double kappa : {0.02, 0.067, 0.12}) {
        auto m = BistableModel::hill(kappa);
        CHECK(maxwell_integral_at_fold(m, FoldSide::Lower) < 0.0);
        CHECK(maxwell_integral_at_fold(m, FoldSide::Upper) > 0.0);
    }
    // frozen values for kappa=0.067
    auto m = BistableModel::hill(0.067);
    CHECK(maxwell_integral_at_fold(m, FoldSide::Lower) ==
          doctest::Approx(-0.015769124046774798).epsilon(1e-8));
    CHECK(maxwell_integral_at_fold(m, FoldSide::Upper) ==
          doctest::Approx(0.10227820181499891).epsilon(1e-8));
}

TEST_CASE("sign bracketing near the folds") {
    for (double beta : {0.2, 0.5, 0.8}) {
        auto m = BistableModel::cubic(0.2, beta);
        const BistableInterval iv = fold_points(m);
        const double d = 1e-3 * (iv.v_upper - iv.v_lower);
        CHECK(maxwell_integral(m, iv.v_lower + d) < 0.0);
        CHECK(maxwell_integral(m, iv.v_upper - d) > 0.0);
    }
    for (double kappa : {0.02, 0.067, 0.12}) {
        auto m = BistableModel::hill(kappa);
        const BistableInterval iv = fold_points(m);
        const double d = 1e-3 * (iv.v_upper - iv.v_lower);
        CHECK(maxwell_integral(m, iv.v_lower + d) < 0.0);
        CHECK(maxwell_integral(m, iv.v_upper - d) > 0.0);
    }
}

TEST_CASE("maxwell_slope: closed form and lower bound") {
    auto m = BistableModel::cubic(0.2, 0.5);
    CHECK(maxwell_slope(m, 0.0) == doctest::Approx(0.2).epsilon(1e-12));

    auto h = BistableModel::hill(0.067);
    const BistableInterval iv = fold_points(h);
    for (int i = 1; i <= 6; ++i) {
        const double v = iv.v_lower + (iv.v_upper - iv.v_lower) * double(i) / 7.0;
        const Roots r = roots_at(h, v);
        CHECK(maxwell_slope(h, v) > 0.067 * (r.h_plus - r.h_minus));
    }
}

TEST_CASE("maxwell_slope: symmetric custom coupling integrates to zero") {
    CustomCallbacks cb;
    cb.f = [](double u, double v) { return v * (u - 0.5) - u * (u - 0.5) * (u - 1.0); };
    cb.f_u = [](double u, double v) { return v - (3.0 * u * u - 3.0 * u + 0.5); };
    cb.f_v = [](double u, double) { return u - 0.5; };
    auto m = BistableModel::custom(cb);
    CHECK(std::abs(maxwell_slope(m, 0.0)) <= 1e-12);
}

TEST_CASE("derivative consistency: dJ/dv equals the slope integral") {
    for (auto m : {BistableModel::cubic(0.2, 0.3), BistableModel::hill(0.067)}) {
        const BistableInterval iv = fold_points(m);
        for (double t : {0.25, 0.5, 0.75}) {
            const double v = iv.v_lower + t * (iv.v_upper - iv.v_lower);
            const double dv = 1e-5 * (iv.v_upper - iv.v_lower);
            const double fd = (maxwell_integral(m, v + dv) - maxwell_integral(m, v - dv)) / (2.0 * dv);
            const double an = maxwell_slope(m, v);
            CHECK(fd == doctest::Approx(an).epsilon(1e-6));
        }
    }
}

TEST_CASE("find_vstar: frozen values") {
    const MaxwellPoint a = find_vstar(BistableModel::cubic(0.2, 0.5));
    CHECK(std::abs(a.v_star) <= 1e-12);
    CHECK(a.j_prime == doctest::Approx(0.2).epsilon(1e-10));

    const MaxwellPoint b = find_vstar(BistableModel::cubic(0.2, 0.3));
    CHECK(b.v_star == doctest::Approx(-221.0 / 1350.0).epsilon(1e-10));

    const MaxwellPoint c = find_vstar(BistableModel::hill(0.067));
    CHECK(c.v_star == doctest::Approx(1.801619384619969).epsilon(1e-10));
    CHECK(c.j_prime == doctest::Approx(0.349152653126914).epsilon(1e-8));
}

TEST_CASE("find_vstar: flipped cubic has a negative-slope Maxwell point") {
    const MaxwellPoint mp = find_vstar(flipped_cubic());
    CHECK(std::abs(mp.v_star) <= 1e-10);
    CHECK(mp.j_prime == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("custom scanned roots agree with the cubic closed form") {
    auto closed = BistableModel::cubic(0.2, 0.3);
    auto scanned = cubic_as_custom(0.2, 0.3);
    for (double v : {-0.3, -0.1637, 0.0, 0.05}) {
        const Roots a = roots_at(closed, v);
        const Roots b = roots_at(scanned, v);
        CHECK(a.h_minus == doctest::Approx(b.h_minus).epsilon(1e-11));
        CHECK(a.h_zero == doctest::Approx(b.h_zero).epsilon(1e-11));
        CHECK(a.h_plus == doctest::Approx(b.h_plus).epsilon(1e-11));
    }
    const BistableInterval ia = fold_points(closed);
    const BistableInterval ib = fold_points(scanned);
    CHECK(ia.v_lower == doctest::Approx(ib.v_lower).epsilon(1e-8));
    CHECK(ia.v_upper == doctest::Approx(ib.v_upper).epsilon(1e-8));
}

TEST_CASE("verify_assumptions: shipped models pass") {
    const AssumptionReport a = verify_assumptions(BistableModel::cubic(0.2, 0.5), 64);
    CHECK(a.a1_holds);
    CHECK(a.a2_holds);
    CHECK(a.a3_holds);
    CHECK(a.min_margin >= 0.2);  // f_v = alpha and f_u(h±) < 0
    CHECK(std::abs(a.v_star) <= 1e-10);
    CHECK(int(a.samples.size()) == 64);

    const AssumptionReport b = verify_assumptions(BistableModel::hill(0.067), 64);
    CHECK(b.a1_holds);
    CHECK(b.a2_holds);
    CHECK(b.a3_holds);
    CHECK(b.min_margin > 0.0);
}

TEST_CASE("verify_assumptions: constructed (A3) violation is reported, not thrown") {
    const AssumptionReport r = verify_assumptions(flipped_cubic(), 32);
    CHECK(r.a1_holds);
    CHECK(r.a2_holds);
    CHECK_FALSE(r.a3_holds);
    CHECK(r.min_margin < 0.0);
    bool listed = false;
    for (const auto& msg : r.failures)
        if (msg.find("(A3)") != std::string::npos) listed = true;
    CHECK(listed);
    CHECK_THROWS_AS((void)verify_assumptions(flipped_cubic(), 2), ConfigError);
}
