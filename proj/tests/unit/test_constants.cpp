#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "roskit/constants.hpp"
#include "roskit/errors.hpp"
#include "roskit/specfun.hpp"
#include "support.hpp"

using namespace roskit;
using testsupport::Gen;
using testsupport::rel_diff;

namespace {

const double EZ3 = 2.0 * std::sqrt(2.0 / std::numbers::pi);

std::vector<BaseDistribution> kinds() {
    return {BaseDistribution::rademacher(), BaseDistribution::uniform(1.0), BaseDistribution::gaussian(),
            BaseDistribution::cosine(), BaseDistribution::atoms({{0.0, 0.2}, {1.0, 0.5}, {2.0, 0.3}})};
}

}  // namespace

TEST_CASE("rosenthal_constant_symmetric") {
    const auto r4 = rosenthal_constant_symmetric(4.0, 1e-10);
    CHECK(std::fabs(r4.value - std::sqrt(2.0)) < 1e-9);
    CHECK(r4.diagnostics.at("branch_mismatch") < 1e-9);
    CHECK(std::fabs(r4.diagnostics.at("branch_lower") - 4.0) < 1e-12);
    CHECK(std::fabs(rosenthal_constant_symmetric(3.0, 1e-10).value - std::cbrt(1.0 + EZ3)) < 1e-12);
    CHECK(std::fabs(rosenthal_constant_symmetric(2.0001, 1e-10).value - std::sqrt(2.0)) < 1e-4);
    CHECK_THROWS_AS(rosenthal_constant_symmetric(2.0, 1e-9), DomainError);
    CHECK_THROWS_AS(rosenthal_constant_symmetric(1.5, 1e-9), DomainError);
}

TEST_CASE("rosenthal constant dominates the admissible extremes") {
    // A single sign and the Gaussian limit both satisfy the budgets.
    for (double p = 2.5; p <= 12.0; p += 0.5) {
        const double cp = std::pow(rosenthal_constant_symmetric(p, 1e-9).value, p);
        CHECK(cp >= 1.0);
        CHECK(cp >= specfun::gaussian_abs_moment(p) * (1.0 - 1e-9));
    }
}

TEST_CASE("mixture_sup known values") {
    const auto rad = BaseDistribution::rademacher();
    CHECK(std::fabs(mixture_sup(3.0, rad, 1.0, 1.0, 1e-10).value - (1.0 + EZ3)) < 1e-12);
    CHECK(std::fabs(mixture_sup(4.0, rad, 1.0, 1.0, 1e-10).value - 4.0) < 1e-9);
    SupOptions cum;
    cum.path = SeriesPath::cumulant;
    const auto u = mixture_sup(4.0, BaseDistribution::uniform(1.0), 1.0, 1.0, 1e-10, cum);
    CHECK(std::fabs(u.value - 4.0) < 1e-12);
    CHECK(std::fabs(u.diagnostics.at("lambda") - 1.8) < 1e-12);
    CHECK(std::fabs(u.diagnostics.at("prefactor") - 25.0 / 9.0) < 1e-12);
    CHECK(std::fabs(u.diagnostics.at("cp_moment") - 1.44) < 1e-12);
    CHECK(u.diagnostics.at("branch_mismatch") <= 1e-12);
    CHECK_THROWS_AS(mixture_sup(5.0, rad, 1.0, 1.0, 1e-9, cum), UnsupportedMethodError);
    CHECK_THROWS_AS(mixture_sup(2.0, rad, 1.0, 1.0, 1e-9), DomainError);
    CHECK_THROWS_AS(mixture_sup(3.0, rad, -1.0, 1.0, 1e-9), DomainError);
}

TEST_CASE("mixture_constant below 4 does not depend on V") {
    for (const auto& v : kinds()) {
        CHECK(std::fabs(mixture_constant(3.0, v, 1e-10).value - std::cbrt(1.0 + EZ3)) < 1e-12);
    }
    CHECK(std::fabs(mixture_constant(4.0, BaseDistribution::rademacher(), 1e-10).value - std::sqrt(2.0)) < 1e-9);
}

TEST_CASE("branches agree at p = 4 on the cumulant path") {
    SupOptions cum;
    cum.path = SeriesPath::cumulant;
    for (const auto& v : kinds()) {
        const auto r = mixture_sup(4.0, v, 1.0, 1.0, 1e-10, cum);
        INFO(v.spec_string());
        CHECK(r.diagnostics.at("branch_mismatch") <= 1e-12);
        CHECK(std::fabs(r.value - 4.0) < 1e-11);
    }
}

TEST_CASE("mixture_sup is continuous across p = 4") {
    const auto rad = BaseDistribution::rademacher();
    const double at4 = mixture_sup(4.0, rad, 1.0, 1.0, 1e-10).value;
    const double below = mixture_sup(4.0 - 1e-6, rad, 1.0, 1.0, 1e-10).value;
    const double above = mixture_sup(4.0 + 1e-6, rad, 1.0, 1.0, 1e-10).value;
    CHECK(std::fabs(below - at4) < 1e-4);
    CHECK(std::fabs(above - at4) < 1e-4);
}

TEST_CASE("positive_sum_sup") {
    CHECK(std::fabs(positive_sum_sup(2.0, 1.0, 1.0, 1e-12).value - 2.0) < 1e-12);
    CHECK(std::fabs(positive_sum_sup(1.5, 1.0, 1.0, 1e-12).value - 2.0) < 1e-12);
    CHECK(std::fabs(positive_sum_sup(3.0, 1.0, 1.0, 1e-12).value - 5.0) < 1e-9);
    CHECK(std::fabs(positive_sum_sup(1.5, 2.0, 3.0, 1e-12).value - (std::pow(2.0, 1.5) + std::pow(3.0, 1.5))) < 1e-12);
    CHECK_THROWS_AS(positive_sum_sup(1.0, 1.0, 1.0, 1e-9), DomainError);
}

TEST_CASE("Gaussian bridge reproduces the nonnegative constants") {
    for (double p : {2.0, 3.0}) {
        const double z2p = specfun::gaussian_abs_moment(2.0 * p);
        const double B = std::pow(z2p, 1.0 / (2.0 * p));
        const auto via = mixture_sup(2.0 * p, BaseDistribution::gaussian(), 1.0, B, 1e-10);
        const double direct = positive_sum_sup(p, 1.0, 1.0, 1e-12).value;
        CHECK(rel_diff(via.value / z2p, direct) < 1e-6);
    }
}

TEST_CASE("mixture_sup is nondecreasing in A and B") {
    for (double p : {3.0, 5.0}) {
        for (const auto& v : {BaseDistribution::rademacher(), BaseDistribution::gaussian()}) {
            double prev = 0.0;
            for (double A = 0.25; A <= 3.0; A += 0.25) {
                const double value = mixture_sup(p, v, A, 1.0, 1e-10).value;
                CHECK(value >= prev * (1.0 - 1e-12));
                prev = value;
            }
            prev = 0.0;
            for (double B = 0.25; B <= 3.0; B += 0.25) {
                const double value = mixture_sup(p, v, 1.0, B, 1e-10).value;
                CHECK(value >= prev * (1.0 - 1e-12));
                prev = value;
            }
        }
    }
}

TEST_CASE("scale covariance") {
    const double t = 2.0;
    for (double p : {3.0, 4.5, 6.0}) {
        for (const auto& v : {BaseDistribution::rademacher(), BaseDistribution::gaussian()}) {
            const double a = mixture_sup(p, v, 0.8, 1.3, 1e-12).value;
            const double b = mixture_sup(p, v, t * 0.8, t * 1.3, 1e-12).value;
            CHECK(rel_diff(b, std::pow(t, p) * a) < 1e-12);
        }
    }
    const auto budget = MomentBudget::per_summand(5.0, {1.0, 0.5, 0.8}, {1.3, 1.0, 1.1});
    const double u1 = utev_3point_sup(budget, EnumMode::exact_enum, 1e-12).result.value;
    const double u2 = utev_3point_sup(budget.scaled(t), EnumMode::exact_enum, 1e-12).result.value;
    CHECK(rel_diff(u2, std::pow(t, 5.0) * u1) < 1e-12);
    CHECK(rel_diff(positive_sum_sup(3.0, t, t, 1e-12).value, std::pow(t, 3.0) * 5.0) < 1e-9);
}

TEST_CASE("utev_3point_sup known values") {
    const auto one = utev_3point_sup(MomentBudget::per_summand(4.0, {1.0}, {1.0}), EnumMode::exact_enum, 1e-12);
    CHECK(one.result.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(one.mu[0] == doctest::Approx(1.0));
    CHECK(one.c[0] == doctest::Approx(1.0));
    const double q = std::pow(2.0, 0.25);
    const auto half = utev_3point_sup(MomentBudget::per_summand(4.0, {1.0}, {q}), EnumMode::exact_enum, 1e-12);
    CHECK(half.result.value == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(half.mu[0] == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(half.c[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
    const auto two = utev_3point_sup(MomentBudget::per_summand(4.0, {1.0, 1.0}, {q, q}), EnumMode::exact_enum, 1e-12);
    CHECK(two.result.value == doctest::Approx(10.0).epsilon(1e-13));
    CHECK_THROWS_AS(MomentBudget::per_summand(4.0, {1.0}, {0.9}), FeasibilityError);
    const std::vector<double> many(13, 1.0);
    CHECK_THROWS_AS(utev_3point_sup(MomentBudget::per_summand(4.0, many, many), EnumMode::exact_enum, 1e-9),
                    UnsupportedMethodError);
}

TEST_CASE("three-point extremals respect their budgets") {
    Gen gen(21);
    for (int t = 0; t < 30; ++t) {
        const double p = gen.uniform(4.0, 8.0);
        const int n = gen.integer(1, 5);
        std::vector<double> a(n), b(n);
        for (int j = 0; j < n; ++j) {
            a[j] = gen.uniform(0.2, 2.0);
            b[j] = a[j] * gen.uniform(1.0, 2.0);
        }
        const auto r = utev_3point_sup(MomentBudget::per_summand(p, a, b), EnumMode::exact_enum, 1e-12);
        for (int j = 0; j < n; ++j) {
            CHECK(r.mu[j] > 0.0);
            CHECK(r.mu[j] <= 1.0);
            CHECK(rel_diff(r.mu[j] * r.c[j] * r.c[j], a[j] * a[j]) < 1e-12);
            CHECK(rel_diff(r.mu[j] * std::pow(r.c[j], p), std::pow(b[j], p)) < 1e-12);
        }
    }
}

TEST_CASE("i.i.d. three-point sums stay below the global supremum") {
    for (double p : {4.0, 5.0, 7.5}) {
        const double sup = mixture_sup(p, BaseDistribution::rademacher(), 1.0, 1.0, 1e-12).value;
        for (int n = 1; n <= 12; ++n) {
            const std::vector<double> a(n, 1.0 / std::sqrt(n)), b(n, std::pow(n, -1.0 / p));
            const double u = utev_3point_sup(MomentBudget::per_summand(p, a, b), EnumMode::exact_enum, 1e-12).result.value;
            CHECK(u <= sup * (1.0 + 1e-9));
        }
    }
}

TEST_CASE("mixture_individual_sup") {
    const double p = 5.0;
    const double zp = std::pow(specfun::gaussian_abs_moment(p), 1.0 / p);
    const auto g1 = mixture_individual_sup(BaseDistribution::gaussian(), MomentBudget::per_summand(p, {1.0}, {zp}),
                                           EnumMode::exact_enum, 1e-12);
    CHECK(rel_diff(g1.result.value, specfun::gaussian_abs_moment(p)) < 1e-12);
    CHECK(g1.mu[0] == doctest::Approx(1.0));

    const auto budget = MomentBudget::per_summand(4.0, {1.0, 0.7}, {1.5, 1.0});
    const auto exact = mixture_individual_sup(BaseDistribution::gaussian(), budget, EnumMode::exact_enum, 1e-12);
    EnumOptions mc;
    mc.seed = 4;
    const auto sampled = mixture_individual_sup(BaseDistribution::gaussian(), budget, EnumMode::monte_carlo, 1e-12, mc);
    CHECK(std::fabs(exact.result.value - sampled.result.value) <= sampled.result.error_bound);

    const auto rb = MomentBudget::per_summand(4.0, {1.0, 0.5, 0.8}, {1.3, 1.0, 1.1});
    const auto rad = mixture_individual_sup(BaseDistribution::rademacher(), rb, EnumMode::exact_enum, 1e-12);
    const auto utev = utev_3point_sup(rb, EnumMode::exact_enum, 1e-12);
    CHECK(rel_diff(rad.result.value, utev.result.value) < 1e-13);

    // Gaussian V needs b_j >= a_j ||Z||_p.
    CHECK_THROWS_AS(mixture_individual_sup(BaseDistribution::gaussian(), MomentBudget::per_summand(4.0, {1.0}, {1.1}),
                                           EnumMode::exact_enum, 1e-9),
                    FeasibilityError);
}

TEST_CASE("complex_constant") {
    SupOptions cum;
    cum.path = SeriesPath::cumulant;
    const auto c4 = complex_constant(4.0, 1e-10, cum);
    CHECK(std::fabs(c4.value - std::pow(3.0, 0.25)) < 1e-10);
    const double beta3 = 3.0 * std::numbers::pi / 4.0;
    const double expected3 = std::cbrt(1.0 + beta3 * std::pow(2.0, -1.5) * EZ3);
    CHECK(std::fabs(complex_constant(3.0, 1e-10).value - expected3) < 1e-12);
}

TEST_CASE("witness construction bookkeeping") {
    const auto rad = BaseDistribution::rademacher();
    const double p = 3.0;
    const auto w = witness_construction(p, rad, 1.0, 1.0, 10000, 0.98, 100000, 3);
    CHECK(std::fabs(w.second_moment_sum - 1.0) < 1e-12);
    CHECK(std::fabs(w.pth_moment_sum - 1.0) < 1e-12);
    const double n = 10000.0;
    const double lam = std::pow(1.0 - 0.98 * 0.98, p / (p - 2.0)) *
                       std::pow(1.0 - std::pow(0.98, p) * std::pow(n, 1.0 - p / 2.0), -2.0 / (p - 2.0));
    CHECK(rel_diff(w.lambda, lam) < 1e-12);
    CHECK(rel_diff(w.gamma * w.gamma * w.lambda, 1.0 - 0.98 * 0.98) < 1e-12);
    CHECK(std::fabs(w.theorem_value - (1.0 + EZ3)) < 1e-12);

    // Independent symmetric blocks: E|X + Y|^p >= E|X|^p + E|Y|^p for p >= 2.
    const auto sn = kfold_abs_moment(condition_nonzero(rad), 10000, p, KfoldMethod::exact, 1e-12);
    const double lower = std::pow(0.98, p) * sn.value / std::pow(n, p / 2.0) + std::pow(w.gamma, p) * w.lambda;
    CHECK(w.estimate.value + w.estimate.error_bound >= lower);
    CHECK(w.estimate.value - w.estimate.error_bound <= w.theorem_value);

    CHECK_THROWS_AS(witness_construction(p, rad, 1.0, 1.0, 10000, 1.0), FeasibilityError);
    CHECK_THROWS_AS(witness_construction(4.0, rad, 1.0, 1.0, 10000, 0.5), DomainError);
    const auto again = witness_construction(p, rad, 1.0, 1.0, 10000, 0.98, 100000, 3);
    CHECK(again.estimate.value == w.estimate.value);
}
