// Acceptance checks AC1..AC10: one PASS/FAIL line per criterion with the
// measured values, the tolerance and the runtime against its limit.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "roskit/cli.hpp"
#include "roskit/constants.hpp"
#include "roskit/logconcave.hpp"
#include "roskit/specfun.hpp"
#include "roskit/verify.hpp"

using namespace roskit;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail += " [failed: " + what + "]";
        }
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel(double x, double y) { return std::fabs(x - y) / std::fabs(y); }

// e^-1 sum_k (3k^2 - 2k) / k!, the Poisson(1) average of E S_k^4.
double poisson_binomial_fourth() {
    double total = 0.0, term = std::exp(-1.0);
    for (int k = 0; k < 40; ++k) {
        if (k > 0) term /= k;
        total += term * (3.0 * k * k - 2.0 * k);
    }
    return total;
}

Verdict ac1() {
    Verdict v;
    const auto r = rosenthal_constant_symmetric(4.0, 1e-10);
    const double oracle = std::pow(1.0 + 3.0, 0.25);
    const double series = poisson_binomial_fourth();
    const double mismatch = r.diagnostics.at("branch_mismatch");
    v.detail = fmt("C_4=%.12f oracle=%.12f series-oracle=%.12f branch mismatch=%.2e (tol 1e-9)", r.value, oracle,
                   series, mismatch);
    v.require(std::fabs(r.value - std::sqrt(2.0)) <= 1e-9, "value");
    v.require(std::fabs(r.value - oracle) <= 1e-9, "lower-branch oracle");
    v.require(std::fabs(std::pow(r.value, 4.0) - series) <= 4e-9, "series oracle");
    v.require(mismatch <= 1e-9, "branch agreement");
    return v;
}

Verdict ac2() {
    Verdict v;
    const auto U = BaseDistribution::uniform(1.0);
    SupOptions grid, cum;
    grid.path = SeriesPath::grid;
    cum.path = SeriesPath::cumulant;
    const auto g = mixture_sup(4.0, U, 1.0, 1.0, 1e-7, grid);
    const auto c = mixture_sup(4.0, U, 1.0, 1.0, 1e-12, cum);
    const double lambda = 1.8, m2 = 1.0 / 3.0, m4 = 0.2;
    const double cp_oracle = lambda * m4 + 3.0 * lambda * lambda * m2 * m2;
    const double lower = 1.0 + 3.0;
    const double mm_grid = rel(g.value, lower), mm_cum = rel(c.value, lower);
    v.detail = fmt("grid=%.10f cumulant=%.14f lower=%.1f lambda=%.6f prefactor=%.6f cp=%.10f (oracle %.4f); "
                   "mismatch grid=%.1e (tol 1e-6) cumulant=%.1e (tol 1e-12)",
                   g.value, c.value, lower, g.diagnostics.at("lambda"), g.diagnostics.at("prefactor"),
                   g.diagnostics.at("cp_moment"), cp_oracle, mm_grid, mm_cum);
    v.require(std::fabs(g.diagnostics.at("lambda") - lambda) < 1e-12, "lambda");
    v.require(std::fabs(g.diagnostics.at("prefactor") - 25.0 / 9.0) < 1e-12, "prefactor");
    v.require(rel(g.diagnostics.at("cp_moment"), cp_oracle) <= 1e-6, "grid cp moment");
    v.require(rel(c.diagnostics.at("cp_moment"), cp_oracle) <= 1e-12, "cumulant cp moment");
    v.require(mm_grid <= 1e-6, "grid branch mismatch");
    v.require(mm_cum <= 1e-12, "cumulant branch mismatch");
    return v;
}

Verdict ac3() {
    Verdict v;
    const double s2 = positive_sum_sup(2.0, 1.0, 1.0, 1e-13).value;
    const double s3 = positive_sum_sup(3.0, 1.0, 1.0, 1e-12).value;
    const double touchard3 = 1.0 + 3.0 + 1.0;
    double bridge[2];
    for (int i = 0; i < 2; ++i) {
        const double p = 2.0 + i;
        const double z = specfun::gaussian_abs_moment(2.0 * p);
        bridge[i] = mixture_sup(2.0 * p, BaseDistribution::gaussian(), 1.0, std::pow(z, 1.0 / (2.0 * p)), 1e-10).value / z;
    }
    v.detail = fmt("S(2)=%.14f S(3)=%.12f (Touchard %.0f) bridge: %.10f %.10f (tol 1e-6)", s2, s3, touchard3,
                   bridge[0], bridge[1]);
    v.require(std::fabs(s2 - 2.0) <= 1e-12, "p=2");
    v.require(std::fabs(s3 - touchard3) <= 1e-9, "p=3");
    v.require(rel(bridge[0], 2.0) <= 1e-6, "bridge p=2");
    v.require(rel(bridge[1], 5.0) <= 1e-6, "bridge p=3");
    return v;
}

Verdict ac4() {
    Verdict v;
    const auto r = complex_constant(4.0, 1e-6);
    const double target = std::pow(3.0, 0.25);
    const double beta4 = 8.0 / 3.0;
    const double lower = std::pow(1.0 + beta4 * 0.25 * 3.0, 0.25);
    const double formula = std::pow(r.diagnostics.at("branch_lower"), 0.25);
    v.detail = fmt("lower-branch=%.10f (oracle %.10f, target %.10f) cp-path=%.10f mismatch=%.1e (tol 1e-4)", formula,
                   lower, target, r.value, rel(r.value, target));
    v.require(std::fabs(formula - target) <= 1e-6, "lower branch");
    v.require(std::fabs(lower - target) <= 1e-12, "oracle");
    v.require(r.method.find("grid") != std::string::npos, "grid method");
    v.require(rel(r.value, target) <= 1e-4, "compound Poisson path");
    return v;
}

Verdict ac5() {
    Verdict v;
    Rng rng(20260501);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst[4] = {0, 0, 0, 0};
    auto track = [&](int family, double second, double pth, const MatchTarget& t) {
        worst[family] = std::max({worst[family], rel(second, t.a * t.a), rel(pth, std::pow(t.b, t.p))});
    };
    for (int i = 0; i < 500; ++i) {
        for (int tail = 0; tail < 2; ++tail) {
            const double p = 10.0 - 6.0 * unit(rng);  // (4, 10]
            const auto [lo, hi] = tail ? feasibility_interval_tail(p) : feasibility_interval_density(p);
            double u = unit(rng);
            while (u == 0.0) u = unit(rng);
            const double a = std::exp(std::log(0.2) + unit(rng) * std::log(25.0));
            const MatchTarget t{p, a, a * (lo + (hi - lo) * u)};
            if (!tail) {
                const auto fm = match_density_minus(t);
                track(0, density_abs_moment(fm, 2.0), density_abs_moment(fm, p), t);
                const auto fp = match_density_plus(t);
                track(1, density_abs_moment(fp, 2.0), density_abs_moment(fp, p), t);
            } else {
                const auto gm = match_tail_minus(t);
                track(2, tail_abs_moment(gm, 2.0), tail_abs_moment(gm, p), t);
                const auto gp = match_tail_plus(t);
                track(3, tail_abs_moment(gp, 2.0), tail_abs_moment(gp, p), t);
            }
        }
    }
    bool limits = true;
    for (double p : {4.5, 7.0, 10.0}) {
        const auto [lo, hi] = feasibility_interval_density(p);
        const auto [tlo, thi] = feasibility_interval_tail(p);
        const auto a = match_density_minus({p, 1.0, lo});
        const auto b = match_density_minus({p, 1.0, hi});
        const auto c = match_density_plus({p, 1.0, lo});
        const auto d = match_density_plus({p, 1.0, hi});
        const auto e = match_tail_minus({p, 1.0, tlo});
        const auto f = match_tail_minus({p, 1.0, thi});
        const auto g = match_tail_plus({p, 1.0, tlo});
        const auto h = match_tail_plus({p, 1.0, thi});
        limits = limits && a.form() == LimitForm::uniform && !a.gamma && a.alpha == std::sqrt(3.0) &&
                 b.form() == LimitForm::exponential && b.alpha == 0.0 && *b.gamma == std::sqrt(2.0) &&
                 c.form() == LimitForm::uniform && c.gamma == 0.0 && d.form() == LimitForm::exponential && !d.alpha &&
                 e.form() == LimitForm::two_point && !e.a && e.b == 1.0 && f.form() == LimitForm::exponential &&
                 f.b == 0.0 && g.form() == LimitForm::two_point && g.a == 0.0 && h.form() == LimitForm::exponential &&
                 !h.b;
    }
    v.detail = fmt("500 targets per family, worst relative moment error F-=%.1e F+=%.1e G-=%.1e G+=%.1e (tol 1e-7); "
                   "boundary members exact: %s",
                   worst[0], worst[1], worst[2], worst[3], limits ? "yes" : "no");
    for (double w : worst) v.require(w < 1e-7, "round trip");
    v.require(limits, "boundary members");
    return v;
}

Verdict ac6() {
    Verdict v;
    std::string parts;
    std::uint64_t seed = 600;
    for (double p : {3.0, 5.0}) {
        for (const auto& V : {BaseDistribution::rademacher(), BaseDistribution::uniform(1.0)}) {
            const auto r = search_sup_U(p, V, 1.0, 1.0, 6, 500, seed++);
            parts += fmt("p=%g %s best=%.6f theorem=%.6f violations=%zu; ", p, V.spec_string().c_str(), r.best_value,
                         r.theorem_value, r.violations.size());
            v.require(r.ok() && r.best_value <= r.theorem_value * (1.0 + 1e-6), "search");
        }
    }
    const auto w = witness_construction(3.0, BaseDistribution::rademacher(), 1.0, 1.0, 10000, 0.98, 1'000'000, 601);
    const double target = 0.95 * (1.0 + specfun::gaussian_abs_moment(3.0));
    v.detail = parts + fmt("witness=%.5f +- %.5f, needs >= %.5f after the error", w.estimate.value,
                           w.estimate.error_bound, target);
    v.require(w.estimate.value - w.estimate.error_bound >= target, "witness");
    return v;
}

Verdict ac7() {
    Verdict v;
    const auto o = check_logconcave_ordering(2, SymmetricLaw::gaussian(), 5.0, 1e-7);
    const double combined = (o.lower.error_bound + o.source.error_bound + o.upper.error_bound) / o.source.value;
    const auto t = check_tail_ordering(2, to_law(TailLawMinus::make(2.0, 0.4)), 5.0, 1e-7);
    const double tcombined = (t.lower.error_bound + t.source.error_bound + t.upper.error_bound) / t.source.value;
    v.detail = fmt("density: %.8f <= %.8f <= %.8f error=%.1e (tol 1e-5) strict=%d; tail G-(2,0.4): %.8f ~ %.8f <= %.8f "
                   "error=%.1e upper gap=%.4f",
                   o.lower.value, o.source.value, o.upper.value, combined, o.strict, t.lower.value, t.source.value,
                   t.upper.value, tcombined, t.upper_gap);
    v.require(o.ok && o.strict, "density ordering");
    v.require(combined < 1e-5, "density error");
    v.require(t.ok, "tail ordering");
    v.require(t.upper_gap > t.upper.error_bound + t.source.error_bound, "strict upper tail gap");
    v.require(tcombined < 1e-5, "tail error");
    return v;
}

Verdict ac8() {
    Verdict v;
    std::vector<double> grid(2000);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = 1e-3 * std::pow(1e6, static_cast<double>(i) / 1999.0);
    bool psi_ok = true;
    for (double p : {4.5, 5.0, 7.0, 10.0}) psi_ok = psi_ok && check_psi_convexity(p, grid).ok;

    Rng rng(801);
    int max_roots = 0, bad_h = 0;
    for (double p : {4.5, 6.0}) {
        for (int i = 0; i < 1000; ++i) {
            const auto [a, b, g] = random_h_coefficients(rng, p, i % 2 == 0);
            const auto h = check_h_signature(p, a, b, g);
            max_roots = std::max(max_roots, h.roots);
            bad_h += !h.ok;
        }
    }
    int det_fail = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto phi = random_convex_function(rng);
        const auto [x1, x2, x3] = random_increasing_triple(rng, 1e-2, 1e2);
        const auto d = check_det_inequality(phi.phi, x1, x2, x3);
        det_fail += !d.ok || (phi.strict && !(d.det > d.rounding));
    }
    const double b = std::pow(specfun::gaussian_abs_moment(5.0), 0.2);
    const auto fm = match_density_minus({5.0, 1.0, b});
    std::vector<double> x(10000);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = 8.0 * static_cast<double>(i + 1) / 10000.0;
    const auto sc = difference_sign_changes(
        [](double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); },
        [&](double u) { return density_eval(fm, u); }, x);
    const bool signature = sc.count == 3 && sc.signature == std::vector<int>{1, -1, 1, -1};
    v.detail = fmt("psi convex: %s; h-signature: max roots %d, failures %d of 2000; det failures %d of 1000; "
                   "Gaussian - F- sign changes %d with signature %s",
                   psi_ok ? "yes" : "no", max_roots, bad_h, det_fail, sc.count, signature ? "+,-,+,-" : "other");
    v.require(psi_ok, "psi");
    v.require(max_roots <= 3 && bad_h == 0, "h signature");
    v.require(det_fail == 0, "determinant");
    v.require(signature, "sign changes");
    return v;
}

Verdict ac9() {
    Verdict v;
    const std::vector<BaseDistribution> pair(2, BaseDistribution::rademacher());
    const auto exact = check_poissonisation(pair, 4.0, 1e-9);
    Rng rng(901);
    int fails = 0;
    double worst_slack = INFINITY;
    const double ps[3] = {4.0, 5.0, 6.0};
    for (int i = 0; i < 100; ++i) {
        const auto tuple = random_atomic_tuple(rng, 5);
        const auto c = check_poissonisation(tuple, ps[i % 3], 1e-9);
        fails += !c.ok;
        worst_slack = std::min(worst_slack, (c.right - c.left) / std::max(c.right, 1e-300));
    }
    v.detail = fmt("two Rademachers at p=4: left=%.12f right=%.12f; 100 random tuples: %d failures, "
                   "smallest relative slack %.3f",
                   exact.left, exact.right, fails, worst_slack);
    v.require(exact.ok && std::fabs(exact.left - 8.0) < 1e-12 && std::fabs(exact.right - 14.0) < 1e-8, "pair");
    v.require(fails == 0, "random tuples");
    return v;
}

Verdict ac10() {
    Verdict v;
    const std::vector<std::vector<std::string>> invocations{
        {"constant", "--p", "5.5", "--V", "gaussian"},
        {"sup", "--p", "4", "--V", "gaussian", "--a", "1,0.7", "--b", "1.5,1.0", "--seed", "3"},
        {"extremal", "--p", "3", "--n", "2000", "--trials", "50000", "--seed", "4"},
        {"match", "--family", "gplus", "--p", "7", "--a", "1", "--b", "1.9"},
        {"verify", "search", "--p", "5", "--n", "5", "--trials", "50", "--seed", "5"},
        {"verify", "poissonisation", "--trials", "20", "--seed", "6"},
        {"verify", "h-signature", "--p", "4.5", "--trials", "50", "--seed", "7"},
        {"table", "--p-min", "3", "--p-max", "6", "--p-step", "0.5", "--format", "csv"},
    };
    int identical = 0;
    for (auto args : invocations) {
        args.insert(args.begin(), "roskit");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::string outputs[2];
        int codes[2];
        for (int k = 0; k < 2; ++k) {
            std::ostringstream out, err;
            codes[k] = cli::run(cli::parse_args(static_cast<int>(argv.size()), argv.data()), out, err);
            outputs[k] = out.str() + "\x1f" + err.str();
        }
        const bool same = codes[0] == 0 && codes[0] == codes[1] && outputs[0] == outputs[1];
        identical += same;
        if (!same) v.require(false, args[1] + " (exit " + std::to_string(codes[0]) + ")");
    }
    v.detail = fmt("%d of %zu invocations byte-identical across two runs", identical, invocations.size()) + v.detail;
    return v;
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        double limit_seconds;
        std::function<Verdict()> check;
    };
    const std::vector<Criterion> criteria{
        {"AC1", "sharp constant at p=4", 1.0, ac1},
        {"AC2", "branch continuity, uniform V", 30.0, ac2},
        {"AC3", "nonnegative-sum constants", 5.0, ac3},
        {"AC4", "complex constant", 60.0, ac4},
        {"AC5", "moment-matching round trips", 60.0, ac5},
        {"AC6", "extremality never violated", 180.0, ac6},
        {"AC7", "log-concave ordering", 60.0, ac7},
        {"AC8", "lemma suite", 60.0, ac8},
        {"AC9", "Poissonisation", 30.0, ac9},
        {"AC10", "CLI determinism", INFINITY, ac10},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::string timing = std::isinf(c.limit_seconds) ? fmt("%.2f s", secs) : fmt("%.2f s, limit %.0f s", secs, c.limit_seconds);
        if (!in_time) timing += ", too slow";
        std::printf("%-4s %s  %s: %s  (%s)\n", c.id, pass ? "PASS" : "FAIL", c.title, v.detail.c_str(), timing.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
