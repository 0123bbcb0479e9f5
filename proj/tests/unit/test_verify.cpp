#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "roskit/errors.hpp"
#include "roskit/logconcave.hpp"
#include "roskit/specfun.hpp"
#include "roskit/verify.hpp"
#include "support.hpp"

using namespace roskit;
using testsupport::Gen;
using testsupport::rel_diff;
using testsupport::simpson;

namespace {

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return x;
}

std::vector<double> geomspace(double a, double b, std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = a * std::pow(b / a, static_cast<double>(i) / static_cast<double>(n - 1));
    return x;
}

double gaussian_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

SymmetricLaw laplace_unit_variance() { return to_law(TruncatedExpDensity::make(std::nullopt, std::sqrt(2.0))); }

}  // namespace

TEST_CASE("count_sign_changes") {
    const std::vector<double> x{0.0, 1.0, 2.0};
    const std::vector<double> alt{1.0, -1.0, 1.0};
    const auto a = count_sign_changes(x, alt);
    CHECK(a.count == 2);
    CHECK(a.signature == std::vector<int>{1, -1, 1});
    CHECK(a.locations == std::vector<double>{0.5, 1.5});
    const std::vector<double> touch{1.0, 0.0, 1.0};
    CHECK(count_sign_changes(x, touch, 1e-12).count == 0);
    const std::vector<double> flat{1e-14, -1e-14, 0.0};
    const auto f = count_sign_changes(x, flat, 1e-12);
    CHECK(f.indeterminate);
    CHECK(f.count == 0);
    // Zero runs between opposite signs still count once.
    const std::vector<double> x5{0.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> gap{2.0, 0.0, 0.0, -3.0, -1.0};
    CHECK(count_sign_changes(x5, gap, 1e-12).count == 1);
    CHECK_THROWS_AS(count_sign_changes(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, -1.0}), DomainError);
}

TEST_CASE("sign changes of sampled polynomials count their simple roots") {
    Gen gen(41);
    const auto x = linspace(0.0, 10.0, 5001);
    for (int t = 0; t < 50; ++t) {
        const int k = gen.integer(0, 4);
        std::vector<double> roots;
        for (int i = 0; i < k; ++i) roots.push_back(0.5 + i * 2.3 + gen.uniform(0.0, 1.0));
        std::vector<double> v(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double prod = 1.0;
            for (double r : roots) prod *= x[i] - r;
            v[i] = prod;
        }
        const auto s = count_sign_changes(x, v);
        CHECK(s.count == k);
        for (int i = 0; i < k; ++i) CHECK(std::fabs(s.locations[i] - roots[i]) < 2.5e-3);
    }
}

TEST_CASE("Gaussian against its matched F- member") {
    const double p = 5.0;
    const double b = std::pow(specfun::gaussian_abs_moment(p), 1.0 / p);
    const auto fm = match_density_minus({p, 1.0, b});
    const auto x = linspace(8.0 / 10000.0, 8.0, 10000);
    const auto s = difference_sign_changes(gaussian_pdf, [&](double u) { return density_eval(fm, u); }, x);
    CHECK(s.count == 3);
    CHECK(s.signature == std::vector<int>{1, -1, 1, -1});
}

TEST_CASE("sign changes between log-concave members with shared moments") {
    Gen g(5150);
    int max_pair = 0, max_matched = 0, min_matched = 99;
    for (int i = 0; i < 200; ++i) {
        const double p = g.uniform(4.2, 10.0);
        const auto [lo, hi] = feasibility_interval_density(p);
        const double a = g.log_uniform(0.5, 2.0);
        const double u1 = g.uniform(0.05, 0.95), u2 = g.uniform(0.05, 0.95);
        const auto x = linspace(a * 1e-3, a * 40.0, 20000);
        // Two F- members with the same second moment.
        const auto f1 = match_density_minus({p, a, a * (lo + (hi - lo) * u1)});
        const auto f2 = match_density_minus({p, a, a * (lo + (hi - lo) * u2)});
        const auto pair = difference_sign_changes([&](double t) { return density_eval(f1, t); },
                                                  [&](double t) { return density_eval(f2, t); }, x);
        max_pair = std::max(max_pair, pair.count);
        // F+ and F- matched to the same (a, b): three moment constraints.
        const MatchTarget t{p, a, a * (lo + (hi - lo) * u1)};
        const auto fp = match_density_plus(t);
        const auto fm = match_density_minus(t);
        const auto matched = difference_sign_changes([&](double v) { return density_eval(fp, v); },
                                                     [&](double v) { return density_eval(fm, v); }, x);
        max_matched = std::max(max_matched, matched.count);
        min_matched = std::min(min_matched, matched.count);
    }
    CHECK(max_pair <= 2);
    CHECK(max_matched <= 3);
    CHECK(min_matched == 3);
}

TEST_CASE("GridDensity") {
    const auto g = GridDensity::from_law(SymmetricLaw::gaussian(), 1e-3, 12.0);
    CHECK(std::fabs(g.total_mass() - 1.0) < 1e-8);
    CHECK(g.asymmetry() < 1e-10);
    CHECK_NOTHROW(g.validate());
    GridDensity bad = g;
    for (double& v : bad.values) v *= 1.01;
    CHECK_THROWS_AS(bad.validate(), GridError);
    GridDensity skew = g;
    skew.values[10] += 1e-6;
    CHECK_THROWS_AS(skew.validate(), GridError);
    const auto law = g.to_law();
    CHECK(rel_diff(law.abs_moment(2.0), 1.0) < 1e-6);
    const auto atoms = GridDensity::from_law(SymmetricLaw::point_masses({{1.0, 1.0}}), 0.01, 2.0);
    CHECK(std::fabs(atoms.total_mass() - 1.0) < 1e-15);
}

TEST_CASE("nfold_moment known values") {
    const std::vector<GridDensity> gauss{GridDensity::from_law(SymmetricLaw::gaussian(), 2.5e-4, 12.0)};
    const auto g4 = nfold_moment(gauss, 4.0, 1e-8);
    CHECK(std::fabs(g4.value - 3.0) < 1e-6);

    const auto u = GridDensity::from_law(SymmetricLaw::uniform(1.0), 1e-3, 1.0);
    const std::vector<GridDensity> two_u{u, u};
    CHECK(std::fabs(nfold_moment(two_u, 2.0, 1e-9).value - 2.0 / 3.0) < 1e-6);

    const auto lap = GridDensity::from_law(laplace_unit_variance(), 1e-4, 40.0);
    const std::vector<GridDensity> two_l{lap, lap};
    const auto l4 = nfold_moment(two_l, 4.0, 1e-8);
    CHECK(rel_diff(l4.value, 18.0) < 1e-5);
}

TEST_CASE("nfold_moment: refining the lattice stays within the reported error") {
    const auto law = to_law(match_density_minus({5.0, 1.0, 1.5}));
    const auto d = GridDensity::from_law(law, 2.5e-4, 30.0);
    const std::vector<GridDensity> three{d, d, d};
    for (double p : {3.0, 5.0}) {
        const auto coarse = nfold_moment(three, p, 1e-5);
        const auto fine = nfold_moment(three, p, 1e-8);
        CHECK(std::fabs(coarse.value - fine.value) <= coarse.error_bound + fine.error_bound);
    }
}

TEST_CASE("uniform_sum_abs_moment") {
    const std::vector<double> one{1.5};
    CHECK(rel_diff(uniform_sum_abs_moment(one, 3.5).value, std::pow(1.5, 3.5) / 4.5) < 1e-14);
    const std::vector<double> three{0.5, 1.0, 2.0};
    double k2 = 0.0, k4 = 0.0;
    for (double w : three) {
        k2 += w * w / 3.0;
        k4 += std::pow(w, 4.0) * (0.2 - 1.0 / 3.0);
    }
    CHECK(rel_diff(uniform_sum_abs_moment(three, 4.0).value, k4 + 3.0 * k2 * k2) < 1e-13);

    Gen gen(42);
    for (int t = 0; t < 20; ++t) {
        const double w1 = gen.uniform(0.1, 1.0), w2 = gen.uniform(1.0, 3.0);
        const double p = gen.uniform(2.5, 9.0);
        // Trapezoidal density of U1 + U2.
        auto f = [&](double s) {
            const double flat = 1.0 / (2.0 * w2);
            return s <= w2 - w1 ? flat : (w1 + w2 - s) / (4.0 * w1 * w2);
        };
        auto g = [&](double s) { return 2.0 * std::pow(s, p) * f(s); };
        const double ref = simpson(g, 0.0, w2 - w1, 20000) + simpson(g, w2 - w1, w1 + w2, 20000);
        const std::vector<double> w{w1, w2};
        const auto r = uniform_sum_abs_moment(w, p);
        CHECK(rel_diff(r.value, ref) < 1e-10);
        CHECK(r.error_bound < 1e-10 * r.value);
    }
    CHECK_THROWS_AS(uniform_sum_abs_moment(std::vector<double>(25, 1.0), 4.0), DomainError);
}

TEST_CASE("search_sup_U") {
    const auto rad = BaseDistribution::rademacher();
    const auto single = search_sup_U(5.0, rad, 1.0, 1.0, 1, 5, 1);
    CHECK(single.ok());
    CHECK(single.best_value == doctest::Approx(1.0));
    REQUIRE(single.iid_values.size() == 1);
    CHECK(single.iid_values[0] == doctest::Approx(1.0));
    CHECK(single.best_value <= single.theorem_value);

    const auto r = search_sup_U(5.0, rad, 1.0, 1.0, 6, 200, 7);
    CHECK(r.ok());
    CHECK(r.best_value <= r.theorem_value * (1.0 + 1e-6));
    CHECK(r.gap == doctest::Approx(r.theorem_value - r.best_value));
    CHECK(r.iid_values.size() == 6);
    for (std::size_t i = 1; i < r.iid_values.size(); ++i) CHECK(r.iid_values[i] >= r.iid_values[i - 1]);

    const auto again = search_sup_U(5.0, rad, 1.0, 1.0, 6, 200, 7);
    CHECK(again.best_value == r.best_value);
    CHECK(again.best_config.describe() == r.best_config.describe());

    const auto u = search_sup_U(3.0, BaseDistribution::uniform(1.0), 1.0, 1.0, 4, 100, 8);
    CHECK(u.ok());
    const auto g = search_sup_U(4.5, BaseDistribution::gaussian(), 1.0, 1.0, 4, 100, 9);
    CHECK(g.ok());
}

TEST_CASE("check_poissonisation") {
    const std::vector<BaseDistribution> one{BaseDistribution::rademacher()};
    const auto a = check_poissonisation(one, 4.0, 1e-9);
    CHECK(a.ok);
    CHECK(a.left == doctest::Approx(1.0));
    CHECK(a.right == doctest::Approx(4.0).epsilon(1e-9));
    const std::vector<BaseDistribution> two(2, BaseDistribution::rademacher());
    const auto b = check_poissonisation(two, 4.0, 1e-9);
    CHECK(b.ok);
    CHECK(b.left == doctest::Approx(8.0));
    CHECK(b.right == doctest::Approx(14.0).epsilon(1e-9));
    // Degenerate summands drop out of both sides, leaving the empty sum.
    const auto c = check_poissonisation(std::span<const BaseDistribution>{}, 4.0, 0.0);
    CHECK(c.ok);
    CHECK(c.left == 0.0);
    CHECK(c.right == 0.0);

    Rng rng(43);
    for (int t = 0; t < 40; ++t) {
        const auto tuple = random_atomic_tuple(rng, 5);
        for (double p : {4.0, 5.0, 6.0}) CHECK(check_poissonisation(tuple, p, 1e-9).ok);
    }
    const std::vector<BaseDistribution> cont{BaseDistribution::gaussian()};
    CHECK_THROWS_AS(check_poissonisation(cont, 4.0, 1e-9), UnsupportedMethodError);
}

TEST_CASE("check_easy_lower_bound") {
    const std::vector<BaseDistribution> one{BaseDistribution::rademacher()};
    const auto a = check_easy_lower_bound(one, 5.0);
    CHECK(a.ok);
    CHECK(a.value == doctest::Approx(1.0));
    CHECK(a.second_term == doctest::Approx(1.0));
    CHECK(a.pth_term == doctest::Approx(1.0));
    const std::vector<BaseDistribution> two(2, BaseDistribution::rademacher());
    const auto b = check_easy_lower_bound(two, 4.0);
    CHECK(b.value == doctest::Approx(8.0));
    CHECK(b.second_term == doctest::Approx(4.0));
    CHECK(b.pth_term == doctest::Approx(2.0));
    Rng rng(44);
    for (int t = 0; t < 200; ++t) {
        const auto tuple = random_atomic_tuple(rng, 5);
        CHECK(check_easy_lower_bound(tuple, 2.0 + 8.0 * std::generate_canonical<double, 53>(rng)).ok);
    }
}

TEST_CASE("psi and its convexity") {
    for (double p : {4.5, 5.0, 7.0, 12.0}) CHECK(psi(p, 0.0L) == doctest::Approx(2.0));
    // Direct formula where it is well conditioned.
    for (double x : {0.25, 1.0, 4.0}) {
        const double s = std::sqrt(x);
        const double direct = std::pow(s + 1.0, 5.0) + std::pow(std::fabs(s - 1.0), 5.0) - 2.0 * std::pow(x, 2.5);
        CHECK(static_cast<double>(psi(5.0, x)) == doctest::Approx(direct).epsilon(1e-12));
    }
    const auto grid = geomspace(1e-3, 1e3, 2000);
    for (double p : {4.5, 5.0, 7.0, 10.0}) {
        const auto c = check_psi_convexity(p, grid);
        CHECK(c.ok);
        CHECK(c.failures == 0);
        CHECK(c.min_scaled_difference > 0.0);
    }
}

TEST_CASE("h signature") {
    const auto big = check_h_signature(5.0, 0.0, 0.0, 50.0);
    CHECK(big.roots == 1);
    CHECK(big.ok);
    const auto none = check_h_signature(5.0, 2.0, 0.0, 0.0);
    CHECK(none.roots == 0);
    const auto [al, be, ga] = h_coefficients_through(5.0, 0.3, 1.7, 4.0);
    const auto three = check_h_signature(5.0, al, be, ga);
    CHECK(three.roots == 3);
    CHECK(three.ok);
    CHECK(three.signature == std::vector<int>{1, -1, 1, -1});
    REQUIRE(three.locations.size() == 3);
    CHECK(three.locations[0] == doctest::Approx(0.3).epsilon(1e-2));
    CHECK(three.locations[1] == doctest::Approx(1.7).epsilon(1e-2));
    CHECK(three.locations[2] == doctest::Approx(4.0).epsilon(1e-2));

    Rng rng(45);
    for (double p : {4.5, 6.0}) {
        for (int t = 0; t < 150; ++t) {
            const auto [a, b, g] = random_h_coefficients(rng, p, t % 2 == 0);
            const auto h = check_h_signature(p, a, b, g, 4000);
            CHECK(h.roots <= 3);
            CHECK(h.ok);
        }
    }
}

TEST_CASE("determinant inequality") {
    const auto lin = check_det_inequality([](long double x) { return 3.0L * x - 1.0L; }, 0.5, 1.0, 4.0);
    CHECK(std::fabs(static_cast<double>(lin.det)) <= static_cast<double>(lin.rounding) + 1e-15);
    CHECK(lin.ok);
    const auto sq = check_det_inequality([](long double x) { return x * x; }, 1.0, 2.0, 3.0);
    CHECK(static_cast<double>(sq.det) == doctest::Approx(2.0));
    const auto concave = check_det_inequality([](long double x) { return -x * x; }, 1.0, 2.0, 3.0);
    CHECK_FALSE(concave.ok);
    Rng rng(46);
    for (int t = 0; t < 300; ++t) {
        const auto phi = random_convex_function(rng);
        const auto [x1, x2, x3] = random_increasing_triple(rng, 1e-2, 1e2);
        const auto d = check_det_inequality(phi.phi, x1, x2, x3);
        CHECK(d.ok);
        if (phi.strict) CHECK(d.det > d.rounding);
    }
    for (double p : {4.5, 6.0}) {
        const auto d = check_det_inequality([p](long double x) { return psi(p, x * x); }, 0.5, 1.5, 3.0);
        CHECK(d.det > d.rounding);
    }
}

TEST_CASE("interlacing") {
    const double p = 5.0;
    const double b = std::pow(specfun::gaussian_abs_moment(p), 1.0 / p);
    const auto minus = to_law(match_density_minus({p, 1.0, b}));
    const auto plus = to_law(match_density_plus({p, 1.0, b}));
    const auto gauss = SymmetricLaw::gaussian();
    for (double z : {0.0, 0.5, 2.0, 4.0}) {
        CHECK(check_interlacing(gauss, minus, MemberSide::minus, z, p).ok);
        CHECK(check_interlacing(gauss, plus, MemberSide::plus, z, p).ok);
    }
    const auto self = check_interlacing(minus, minus, MemberSide::minus, 1.0, p);
    CHECK(self.ok);
    CHECK(std::fabs(self.left - self.right) <= self.left_error + self.right_error + 1e-12);
    const auto other = to_law(match_density_minus({p, 1.0, 1.05 * b}));
    CHECK_THROWS_AS(check_interlacing(gauss, other, MemberSide::minus, 1.0, p), InvalidComparisonError);
    // Exact shifted moment: E(Z + z)^4 = 3 + 6 z^2 + z^4.
    CHECK(rel_diff(shifted_abs_moment(gauss, 1.5, 4.0).value, 3.0 + 6.0 * 2.25 + 1.5 * 1.5 * 1.5 * 1.5) < 1e-10);
}

TEST_CASE("log-concave ordering") {
    const auto gauss = SymmetricLaw::gaussian();
    const auto n1 = check_logconcave_ordering(1, gauss, 5.0, 1e-7);
    CHECK(n1.ok);
    CHECK(std::fabs(n1.lower.value - n1.source.value) <= n1.lower.error_bound + n1.source.error_bound + 1e-9);
    CHECK(std::fabs(n1.upper.value - n1.source.value) <= n1.upper.error_bound + n1.source.error_bound + 1e-9);

    const auto n2 = check_logconcave_ordering(2, gauss, 5.0, 1e-7);
    CHECK(n2.ok);
    CHECK(n2.strict);

    const auto member = to_law(match_density_minus({5.0, 1.0, 1.5}));
    const auto n3 = check_logconcave_ordering(3, member, 5.0, 1e-7);
    CHECK(n3.ok);
    CHECK(std::fabs(n3.lower_gap) <= n3.lower.error_bound + n3.source.error_bound + 1e-9 * n3.source.value);
    CHECK(n3.upper_gap > n3.upper.error_bound + n3.source.error_bound);
}

TEST_CASE("tail ordering") {
    const auto g = to_law(TailLawMinus::make(2.0, 0.4));
    const auto n1 = check_tail_ordering(1, g, 5.0, 1e-7);
    CHECK(n1.ok);
    CHECK(std::fabs(n1.upper.value - n1.source.value) <= n1.upper.error_bound + n1.source.error_bound + 1e-9);
    const auto n2 = check_tail_ordering(2, g, 5.0, 1e-7);
    CHECK(n2.ok);
    CHECK(n2.upper_gap > n2.upper.error_bound + n2.source.error_bound);
    CHECK(std::fabs(n2.lower_gap) <= n2.lower.error_bound + n2.source.error_bound + 1e-9 * n2.source.value);

    const auto expo = to_law(TailLawPlus::make(std::sqrt(2.0), std::nullopt));
    const auto e2 = check_tail_ordering(2, expo, 5.0, 1e-7);
    CHECK(e2.ok);
    CHECK(std::fabs(e2.lower_gap) <= e2.lower.error_bound + e2.source.error_bound + 1e-8 * e2.source.value);
    CHECK(std::fabs(e2.upper_gap) <= e2.upper.error_bound + e2.source.error_bound + 1e-8 * e2.source.value);
}

TEST_CASE("generators are seeded") {
    Rng a(47), b(47);
    const auto ta = random_atomic_tuple(a, 5), tb = random_atomic_tuple(b, 5);
    REQUIRE(ta.size() == tb.size());
    for (std::size_t i = 0; i < ta.size(); ++i) CHECK(ta[i] == tb[i]);
    Rng c(48);
    for (int t = 0; t < 200; ++t) {
        const auto tuple = random_atomic_tuple(c, 4);
        CHECK(tuple.size() >= 1);
        CHECK(tuple.size() <= 4);
        for (const auto& v : tuple) CHECK(v.is_atomic());
        const auto [x1, x2, x3] = random_increasing_triple(c, 0.05, 20.0);
        CHECK(x1 < x2);
        CHECK(x2 < x3);
    }
}
