#include "roskit/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "roskit/basedist.hpp"
#include "roskit/constants.hpp"
#include "roskit/errors.hpp"
#include "roskit/logconcave.hpp"
#include "roskit/parallel.hpp"
#include "roskit/verify.hpp"

namespace roskit::cli {

using json = nlohmann::json;

namespace {

constexpr double kClosedFormTol = 1e-9;
constexpr double kNumericTol = 1e-6;

json to_json(const ConstantResult& r) {
    json diag = json::object();
    for (const auto& [k, v] : r.diagnostics) diag[k] = v;
    return {{"value", r.value}, {"error_bound", r.error_bound}, {"method", r.method}, {"diagnostics", diag}};
}

json to_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// Closed-form or exact routes get the tight default tolerance.
bool closed_form_route(const RunConfig& c, double p) {
    if (c.positive || p < 4.0) return true;
    if (c.V == "steinhaus") return false;
    const BaseDistribution v = BaseDistribution::parse(c.V);
    return v.kind() == BaseKind::rademacher || v.kind() == BaseKind::gaussian;
}

double tolerance(const RunConfig& c, double p) {
    return c.tol.value_or(closed_form_route(c, p) ? kClosedFormTol : kNumericTol);
}

double require_p(const RunConfig& c) {
    if (!c.p) throw UsageError("--p is required for '" + c.command + "'");
    return *c.p;
}

json base_record(const RunConfig& c, double p, double tol) {
    return {{"command", c.command}, {"p", p}, {"V", c.V}, {"A", c.A}, {"B", c.B}, {"seed", c.seed}, {"tol", tol}};
}

void merge(json& into, const json& from) {
    for (auto it = from.begin(); it != from.end(); ++it) into[it.key()] = it.value();
}

json thinned_record(const ThinnedExtremal& t) {
    json r = to_json(t.result);
    r["c"] = t.c;
    r["mu"] = t.mu;
    return r;
}

// ---------------------------------------------------------------------------
// constant / sup / table / extremal

json constant_record(const RunConfig& c, double p) {
    const double tol = tolerance(c, p);
    json rec = base_record(c, p, tol);
    rec["A"] = 1.0;
    rec["B"] = 1.0;
    ConstantResult r;
    if (c.V == "steinhaus") {
        r = complex_constant(p, tol);
    } else {
        const BaseDistribution v = BaseDistribution::parse(c.V);
        r = v.kind() == BaseKind::rademacher ? rosenthal_constant_symmetric(p, tol) : mixture_constant(p, v, tol);
    }
    merge(rec, to_json(r));
    return rec;
}

json sup_record(const RunConfig& c, double p) {
    const double tol = tolerance(c, p);
    json rec = base_record(c, p, tol);
    if (c.positive) {
        rec["V"] = "positive";
        merge(rec, to_json(positive_sum_sup(p, c.A, c.B, tol)));
        return rec;
    }
    const BaseDistribution v = BaseDistribution::parse(c.V);
    if (!c.a.empty() || !c.b.empty()) {
        const MomentBudget budget = MomentBudget::per_summand(p, c.a, c.b);
        EnumOptions options;
        options.seed = c.seed;
        if (c.trials) options.mc_samples = *c.trials;
        const bool large = budget.size() > 12;
        const EnumMode mode = large ? EnumMode::monte_carlo : EnumMode::exact_enum;
        const ThinnedExtremal t = v.kind() == BaseKind::rademacher ? utev_3point_sup(budget, mode, tol, options)
                                                                   : mixture_individual_sup(v, budget, mode, tol, options);
        rec.erase("A");
        rec.erase("B");
        rec["a"] = c.a;
        rec["b"] = c.b;
        merge(rec, thinned_record(t));
        return rec;
    }
    merge(rec, to_json(mixture_sup(p, v, c.A, c.B, tol)));
    return rec;
}

json extremal_record(const RunConfig& c, double p) {
    if (!c.a.empty() || !c.b.empty() || c.positive) {
        json rec = sup_record(c, p);
        rec["form"] = c.positive ? "poisson" : "thinned";
        return rec;
    }
    const BaseDistribution v = BaseDistribution::parse(c.V);
    if (p >= 4.0) {
        json rec = sup_record(c, p);
        rec["form"] = "compound_poisson";
        return rec;
    }
    // Two-block witness with the Gaussian block at 98% of its maximal share.
    const long n = c.n.value_or(10000);
    const double alpha = 0.98 * c.A / std::sqrt(abs_moment(v, 2.0));
    const std::size_t samples = c.trials.value_or(1'000'000);
    const Witness w = witness_construction(p, v, c.A, c.B, n, alpha, samples, c.seed);
    json rec = base_record(c, p, 0.0);
    rec.erase("tol");
    rec["form"] = "two_block";
    rec["n"] = w.n;
    rec["alpha"] = w.alpha;
    rec["gamma"] = w.gamma;
    rec["lambda"] = w.lambda;
    rec["theta_prob"] = w.theta_prob;
    rec["second_moment_sum"] = w.second_moment_sum;
    rec["pth_moment_sum"] = w.pth_moment_sum;
    rec["theorem_value"] = w.theorem_value;
    rec["estimate"] = to_json(w.estimate);
    return rec;
}

std::vector<double> p_grid(const RunConfig& c) {
    if (!c.p_min || !c.p_max || !c.p_step) throw UsageError("table requires --p-min, --p-max and --p-step");
    const double lo = *c.p_min, hi = *c.p_max, step = *c.p_step;
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step) || !(step > 0.0) || hi < lo) {
        throw UsageError("bad grid: need finite p-min <= p-max and p-step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) throw UsageError("bad grid: more than 100000 points");
    std::vector<double> ps(count);
    for (std::size_t i = 0; i < count; ++i) ps[i] = lo + static_cast<double>(i) * step;
    return ps;
}

// ---------------------------------------------------------------------------
// match

json match_record(const RunConfig& c) {
    const double p = require_p(c);
    if (c.a.size() != 1 || c.b.size() != 1) throw UsageError("match requires single values for --a and --b");
    const MatchTarget target{p, c.a[0], c.b[0]};
    json rec = {{"command", "match"}, {"family", c.family}, {"p", p},  {"target_a", target.a},
                {"target_b", target.b}, {"seed", c.seed}};
    SymmetricLaw law;
    if (c.family == "fminus") {
        const PlateauExpDensity f = match_density_minus(target);
        rec["alpha"] = f.alpha;
        rec["gamma"] = to_json(f.gamma);
        rec["form"] = to_string(f.form());
        law = to_law(f);
    } else if (c.family == "fplus") {
        const TruncatedExpDensity f = match_density_plus(target);
        rec["alpha"] = to_json(f.alpha);
        rec["gamma"] = f.gamma;
        rec["form"] = to_string(f.form());
        law = to_law(f);
    } else if (c.family == "gminus") {
        const TailLawMinus t = match_tail_minus(target);
        rec["a"] = to_json(t.a);
        rec["b"] = t.b;
        rec["form"] = to_string(t.form());
        law = to_law(t);
    } else if (c.family == "gplus") {
        const TailLawPlus t = match_tail_plus(target);
        rec["a"] = t.a;
        rec["b"] = to_json(t.b);
        rec["form"] = to_string(t.form());
        law = to_law(t);
    } else {
        throw UsageError("--family must be one of fminus, fplus, gminus, gplus");
    }
    rec["achieved_a"] = std::sqrt(law.abs_moment(2.0));
    rec["achieved_b"] = std::pow(law.abs_moment(p), 1.0 / p);
    return rec;
}

// ---------------------------------------------------------------------------
// verify suites

std::vector<double> ps_or(const RunConfig& c, std::vector<double> defaults) {
    return c.p ? std::vector<double>{*c.p} : defaults;
}

json grid_spec(const std::string& spacing, double lo, double hi, std::size_t points) {
    return {{"spacing", spacing}, {"lo", lo}, {"hi", hi}, {"points", points}};
}

std::vector<json> suite_search(const RunConfig& c) {
    const double p = require_p(c);
    const BaseDistribution v = BaseDistribution::parse(c.V);
    const int n_max = static_cast<int>(c.n.value_or(6));
    const SearchReport r = search_sup_U(p, v, c.A, c.B, n_max, c.trials.value_or(500), c.seed);
    return {{{"suite", "search"},
             {"p", r.p},
             {"V", r.V},
             {"A", r.A},
             {"B", r.B},
             {"n_max", n_max},
             {"trials", r.trials},
             {"seed", r.seed},
             {"best_value", r.best_value},
             {"best_error", r.best_error},
             {"best_config", r.best_config.describe()},
             {"best_method", r.best_method},
             {"theorem_value", r.theorem_value},
             {"gap", r.gap},
             {"violations", r.violations},
             {"iid_values", r.iid_values},
             {"candidate_tol", r.candidate_tol},
             {"ok", r.ok()}}};
}

std::vector<json> suite_poissonisation(const RunConfig& c) {
    const std::vector<double> ps = ps_or(c, {4.0, 5.0, 6.0});
    const std::size_t trials = c.trials.value_or(100);
    const int n_max = static_cast<int>(c.n.value_or(5));
    std::vector<json> out(trials);
    parallel_for(trials, [&](std::size_t t) {
        Rng rng(derive_seed(c.seed, t));
        const double p = ps[t % ps.size()];
        const auto tuple = random_atomic_tuple(rng, n_max);
        const ComparisonCheck chk = check_poissonisation(tuple, p, 1e-9);
        std::vector<std::string> specs;
        for (const auto& v : tuple) specs.push_back(v.spec_string());
        out[t] = {{"suite", "poissonisation"}, {"trial", t},        {"seed", c.seed},
                  {"p", p},                    {"tuple", specs},     {"left", chk.left},
                  {"right", chk.right},        {"left_error", chk.left_error}, {"right_error", chk.right_error},
                  {"ok", chk.ok}};
    });
    std::size_t passed = 0;
    for (const json& j : out) passed += j["ok"].get<bool>() ? 1 : 0;
    out.push_back({{"suite", "poissonisation"}, {"summary", true}, {"trials", trials}, {"passed", passed},
                   {"seed", c.seed}, {"ok", passed == trials}});
    return out;
}

std::vector<json> suite_easy_bound(const RunConfig& c) {
    const std::vector<double> ps = ps_or(c, {4.0, 5.0, 6.0});
    const std::size_t trials = c.trials.value_or(100);
    const int n_max = static_cast<int>(c.n.value_or(5));
    std::vector<json> out;
    std::size_t passed = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(c.seed, t));
        const double p = ps[t % ps.size()];
        const EasyBoundCheck chk = check_easy_lower_bound(random_atomic_tuple(rng, n_max), p);
        passed += chk.ok ? 1 : 0;
        out.push_back({{"suite", "easy-bound"}, {"trial", t}, {"seed", c.seed}, {"p", p}, {"value", chk.value},
                       {"second_term", chk.second_term}, {"pth_term", chk.pth_term}, {"ok", chk.ok}});
    }
    out.push_back({{"suite", "easy-bound"}, {"summary", true}, {"trials", trials}, {"passed", passed},
                   {"seed", c.seed}, {"ok", passed == trials}});
    return out;
}

std::vector<json> suite_psi(const RunConfig& c) {
    const std::size_t points = static_cast<std::size_t>(c.n.value_or(2000));
    std::vector<double> x(points);
    for (std::size_t i = 0; i < points; ++i) x[i] = 1e-3 * std::pow(1e6, static_cast<double>(i) / (points - 1.0));
    std::vector<json> out;
    for (double p : ps_or(c, {4.5, 5.0, 7.0, 10.0})) {
        const ConvexityCheck chk = check_psi_convexity(p, x);
        out.push_back({{"suite", "psi"}, {"p", p}, {"grid", grid_spec("geometric", 1e-3, 1e3, points)},
                       {"min_scaled_difference", chk.min_scaled_difference}, {"failures", chk.failures},
                       {"seed", c.seed}, {"ok", chk.ok}});
    }
    return out;
}

std::vector<json> suite_h_signature(const RunConfig& c) {
    const std::size_t trials = c.trials.value_or(1000);
    std::vector<json> out;
    const std::vector<double> ps = ps_or(c, {4.5, 6.0});
    for (std::size_t k = 0; k < ps.size(); ++k) {
        const double p = ps[k];
        std::vector<HSignature> res(trials);
        std::vector<std::array<double, 3>> coef(trials);
        parallel_for(trials, [&](std::size_t t) {
            Rng rng(derive_seed(derive_seed(c.seed, k), t));
            coef[t] = random_h_coefficients(rng, p, t % 2 == 0);
            res[t] = check_h_signature(p, coef[t][0], coef[t][1], coef[t][2]);
        });
        std::vector<std::size_t> by_roots(5, 0);
        json failures = json::array();
        int max_roots = 0;
        for (std::size_t t = 0; t < trials; ++t) {
            max_roots = std::max(max_roots, res[t].roots);
            ++by_roots[static_cast<std::size_t>(std::min(res[t].roots, 4))];
            if (!res[t].ok) failures.push_back({{"trial", t}, {"coefficients", coef[t]}, {"roots", res[t].roots}});
        }
        out.push_back({{"suite", "h-signature"}, {"p", p}, {"trials", trials}, {"seed", c.seed},
                       {"max_roots", max_roots}, {"count_by_roots", by_roots}, {"failures", failures},
                       {"points", 20000}, {"ok", failures.empty()}});
    }
    return out;
}

std::vector<json> suite_det(const RunConfig& c) {
    const std::size_t trials = c.trials.value_or(1000);
    std::size_t failures = 0, strict_failures = 0;
    double min_strict = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(c.seed, t));
        const ConvexSample s = random_convex_function(rng);
        const auto x = random_increasing_triple(rng, 0.01, 10.0);
        const DetCheck chk = check_det_inequality(s.phi, x[0], x[1], x[2]);
        if (!chk.ok) ++failures;
        if (s.strict) {
            if (!(chk.det > 0.0L)) ++strict_failures;
            min_strict = std::min(min_strict, static_cast<double>(chk.det));
        }
    }
    return {{{"suite", "det"}, {"trials", trials}, {"seed", c.seed}, {"failures", failures},
             {"strict_failures", strict_failures}, {"min_strict_det", min_strict},
             {"ok", failures == 0 && strict_failures == 0}}};
}

std::vector<json> suite_sign_changes(const RunConfig& c) {
    std::vector<json> out;
    const std::size_t points = 10000;
    std::vector<double> x(points);
    for (std::size_t i = 0; i < points; ++i) x[i] = 8.0 * static_cast<double>(i + 1) / points;
    const SymmetricLaw g = SymmetricLaw::gaussian();
    for (double p : ps_or(c, {5.0})) {
        const MatchTarget target{p, 1.0, std::pow(g.abs_moment(p), 1.0 / p)};
        const SymmetricLaw fm = to_law(match_density_minus(target));
        const SignChanges sc = difference_sign_changes([&](double t) { return g.density(t); },
                                                       [&](double t) { return fm.density(t); }, x);
        out.push_back({{"suite", "sign-changes"}, {"case", "gaussian-fminus"}, {"p", p},
                       {"grid", grid_spec("uniform", x.front(), x.back(), points)}, {"count", sc.count},
                       {"signature", sc.signature}, {"locations", sc.locations}, {"seed", c.seed},
                       {"ok", sc.count == 3 && sc.signature == std::vector<int>{1, -1, 1, -1}}});
    }
    // Two distinct F- members differ with at most two sign changes; a matched
    // F+ member, being log-concave, differs from its F- partner at most 3 times.
    const std::size_t trials = c.trials.value_or(200);
    std::size_t worst_pair = 0, worst_matched = 0;
    json failures = json::array();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < trials; ++t) {
        Rng rng(derive_seed(c.seed, t));
        const PlateauExpDensity f1 = PlateauExpDensity::make(0.05 + 3.0 * unit(rng), 0.2 + 5.0 * unit(rng));
        const PlateauExpDensity f2 = PlateauExpDensity::make(0.05 + 3.0 * unit(rng), 0.2 + 5.0 * unit(rng));
        const double reach = std::max(f1.alpha, f2.alpha) + 40.0 / std::min(*f1.gamma, *f2.gamma);
        std::vector<double> xs(points);
        for (std::size_t i = 0; i < points; ++i) xs[i] = reach * static_cast<double>(i + 1) / points;
        const SignChanges pair = difference_sign_changes([&](double s) { return density_eval(f1, s); },
                                                         [&](double s) { return density_eval(f2, s); }, xs);

        const double p = std::uniform_real_distribution<double>(4.0, 10.0)(rng);
        const auto [lo, hi] = feasibility_interval_density(p);
        const double ratio = lo + (hi - lo) * std::uniform_real_distribution<double>(0.01, 0.99)(rng);
        const MatchTarget target{p, 1.0, ratio};
        const PlateauExpDensity fm = match_density_minus(target);
        const TruncatedExpDensity fp = match_density_plus(target);
        const double span = 1.5 * std::max(fp.alpha.value_or(0.0), fm.alpha + 40.0 / fm.gamma.value_or(1.0));
        for (std::size_t i = 0; i < points; ++i) xs[i] = span * static_cast<double>(i + 1) / points;
        const SignChanges matched = difference_sign_changes([&](double s) { return density_eval(fp, s); },
                                                            [&](double s) { return density_eval(fm, s); }, xs);

        worst_pair = std::max(worst_pair, static_cast<std::size_t>(pair.count));
        worst_matched = std::max(worst_matched, static_cast<std::size_t>(matched.count));
        if (pair.count > 2 || matched.count > 3) {
            failures.push_back({{"trial", t}, {"pair_count", pair.count}, {"matched_count", matched.count},
                                {"p", p}, {"ratio", ratio}});
        }
    }
    out.push_back({{"suite", "sign-changes"}, {"case", "fminus-pairs"}, {"trials", trials}, {"seed", c.seed},
                   {"max_count", worst_pair}, {"points", points}});
    out.push_back({{"suite", "sign-changes"}, {"case", "fplus-fminus"}, {"trials", trials}, {"seed", c.seed},
                   {"max_count", worst_matched}, {"points", points}});
    out.push_back({{"suite", "sign-changes"}, {"summary", true}, {"failures", failures}, {"seed", c.seed},
                   {"ok", failures.empty()}});
    return out;
}

SymmetricLaw ordering_source(const RunConfig& c) {
    const std::string fam = c.family.empty() ? "gaussian" : c.family;
    if (fam == "gaussian") return SymmetricLaw::gaussian();
    if (fam == "logistic") return SymmetricLaw::logistic();
    if (fam == "uniform") return SymmetricLaw::uniform(1.0);
    throw UsageError("ordering source --family must be gaussian, logistic or uniform");
}

json ordering_json(const std::string& suite, int n, double p, double tol, const OrderingCheck& o, const RunConfig& c) {
    return {{"suite", suite},          {"n", n},
            {"p", p},                  {"tol", tol},
            {"lower", to_json(o.lower)}, {"source", to_json(o.source)},
            {"upper", to_json(o.upper)}, {"lower_gap", o.lower_gap},
            {"upper_gap", o.upper_gap}, {"strict", o.strict},
            {"seed", c.seed},          {"ok", o.ok}};
}

std::vector<json> suite_ordering(const RunConfig& c) {
    const double p = c.p.value_or(5.0);
    const int n = static_cast<int>(c.n.value_or(2));
    const double tol = c.tol.value_or(1e-7);
    json rec = ordering_json("ordering", n, p, tol, check_logconcave_ordering(n, ordering_source(c), p, tol), c);
    rec["source_family"] = c.family.empty() ? "gaussian" : c.family;
    return {rec};
}

std::vector<json> suite_tail_ordering(const RunConfig& c) {
    const double p = c.p.value_or(5.0);
    const int n = static_cast<int>(c.n.value_or(2));
    const double tol = c.tol.value_or(1e-7);
    const double a = c.a.empty() ? 2.0 : c.a[0];
    const double b = c.b.empty() ? 0.4 : c.b[0];
    const SymmetricLaw source = to_law(TailLawMinus::make(a, b));
    json rec = ordering_json("tail-ordering", n, p, tol, check_tail_ordering(n, source, p, tol), c);
    rec["source"]["a"] = a;
    rec["source"]["b"] = b;
    return {rec};
}

std::vector<json> suite_interlacing(const RunConfig& c) {
    const double p = c.p.value_or(5.0);
    const SymmetricLaw source = ordering_source(c);
    const MatchTarget target{p, std::sqrt(source.abs_moment(2.0)), std::pow(source.abs_moment(p), 1.0 / p)};
    const SymmetricLaw minus = to_law(match_density_minus(target));
    const SymmetricLaw plus = to_law(match_density_plus(target));
    std::vector<json> out;
    for (double z : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        const ComparisonCheck lo = check_interlacing(source, minus, MemberSide::minus, z, p);
        const ComparisonCheck hi = check_interlacing(source, plus, MemberSide::plus, z, p);
        out.push_back({{"suite", "interlacing"}, {"p", p}, {"z", z}, {"source", lo.left},
                       {"minus_member", lo.right}, {"plus_member", hi.right},
                       {"error", lo.left_error + lo.right_error + hi.right_error}, {"seed", c.seed},
                       {"ok", lo.ok && hi.ok}});
    }
    return out;
}

std::vector<json> run_suite(const RunConfig& c) {
    const std::string& s = c.suite;
    if (s == "search") return suite_search(c);
    if (s == "poissonisation") return suite_poissonisation(c);
    if (s == "easy-bound") return suite_easy_bound(c);
    if (s == "psi") return suite_psi(c);
    if (s == "h-signature") return suite_h_signature(c);
    if (s == "det") return suite_det(c);
    if (s == "sign-changes") return suite_sign_changes(c);
    if (s == "ordering") return suite_ordering(c);
    if (s == "tail-ordering") return suite_tail_ordering(c);
    if (s == "interlacing") return suite_interlacing(c);
    throw UsageError("unknown verify suite '" + s +
                     "'; expected search, poissonisation, easy-bound, psi, h-signature, det, sign-changes, "
                     "ordering, tail-ordering or interlacing");
}

// ---------------------------------------------------------------------------
// Emission

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string quoted = "\"";
        for (char ch : s) {
            if (ch == '"') quoted += '"';
            quoted += ch;
        }
        return quoted + "\"";
    }
    return v.dump();
}

json csv_value(const json& rec, const std::string& key) {
    if (rec.contains(key)) return rec[key];
    if (rec.contains("diagnostics") && rec["diagnostics"].contains(key)) return rec["diagnostics"][key];
    return nullptr;
}

void emit(const std::vector<json>& records, Format format, bool tabular, std::ostream& out) {
    switch (format) {
        case Format::json:
            for (const json& r : records) out << r.dump() << '\n';
            break;
        case Format::csv: {
            if (!tabular) throw UsageError("csv output is available for constant, sup and table");
            const auto& cols = csv_columns();
            for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
            out << '\n';
            for (const json& r : records) {
                for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << csv_cell(csv_value(r, cols[i]));
                out << '\n';
            }
            break;
        }
        case Format::text:
            for (const json& r : records) {
                bool first = true;
                for (auto it = r.begin(); it != r.end(); ++it) {
                    if (it.value().is_object()) continue;
                    out << (first ? "" : " ") << it.key() << '=' << (it.value().is_string() ? it.value().get<std::string>() : it.value().dump());
                    first = false;
                }
                out << '\n';
            }
            break;
    }
}

std::vector<json> execute(const RunConfig& c, bool* tabular) {
    *tabular = c.command == "constant" || c.command == "sup" || c.command == "table";
    if (c.command == "constant") return {constant_record(c, require_p(c))};
    if (c.command == "sup") return {sup_record(c, require_p(c))};
    if (c.command == "extremal") return {extremal_record(c, require_p(c))};
    if (c.command == "match") return {match_record(c)};
    if (c.command == "verify") return run_suite(c);
    if (c.command == "table") {
        const std::vector<double> ps = p_grid(c);
        RunConfig row = c;
        row.command = "table";
        std::vector<json> out(ps.size());
        parallel_for(ps.size(), [&](std::size_t i) { out[i] = sup_record(row, ps[i]); });
        return out;
    }
    throw UsageError("unknown command '" + c.command + "'");
}

void report(std::ostream& err, const std::string& kind, const std::string& message) {
    err << json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {"p",     "V",           "A",      "B",      "value",
                                                  "error_bound", "method", "lambda", "prefactor", "seed"};
    return cols;
}

RunConfig parse_args(int argc, const char* const* argv) {
    RunConfig c;
    CLI::App app{"Sharp Rosenthal-type constants, extremal laws and verification suites", "roskit"};
    double p = 0, p_min = 0, p_max = 0, p_step = 0, tol = 0;
    long n = 0;
    std::size_t trials = 0;
    std::string format = "json";
    app.add_option("command", c.command, "constant, sup, extremal, match, verify or table")->required();
    app.add_option("suite", c.suite, "verify suite name");
    auto* op = app.add_option("--p", p, "moment order");
    auto* opmin = app.add_option("--p-min", p_min, "table grid start");
    auto* opmax = app.add_option("--p-max", p_max, "table grid end");
    auto* opstep = app.add_option("--p-step", p_step, "table grid step");
    app.add_option("--V", c.V, "base law: rademacher, uniform:w=1, gaussian, cosine, atoms:x:m,..., steinhaus");
    app.add_option("--A", c.A, "global second-moment budget");
    app.add_option("--B", c.B, "global p-th moment budget");
    app.add_option("--a", c.a, "per-summand second-moment budgets (comma list)")->delimiter(',');
    app.add_option("--b", c.b, "per-summand p-th moment budgets (comma list)")->delimiter(',');
    app.add_option("--family", c.family, "match family or ordering source");
    auto* on = app.add_option("--n", n, "summand count or grid size");
    auto* otrials = app.add_option("--trials", trials, "trials or Monte Carlo samples");
    app.add_option("--seed", c.seed, "run seed");
    auto* otol = app.add_option("--tol", tol, "accuracy target");
    app.add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--out", c.out, "output file");
    app.add_flag("--positive", c.positive, "nonnegative summands (sup, table)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }
    if (op->count()) c.p = p;
    if (opmin->count()) c.p_min = p_min;
    if (opmax->count()) c.p_max = p_max;
    if (opstep->count()) c.p_step = p_step;
    if (on->count()) c.n = n;
    if (otrials->count()) c.trials = trials;
    if (otol->count()) c.tol = tol;
    c.format = format == "csv" ? Format::csv : format == "text" ? Format::text : Format::json;
    return c;
}

void validate(const RunConfig& c) {
    static const std::vector<std::string> commands = {"constant", "sup", "extremal", "match", "verify", "table"};
    if (std::find(commands.begin(), commands.end(), c.command) == commands.end()) {
        throw UsageError("unknown command '" + c.command + "'");
    }
    if (c.command == "verify" && c.suite.empty()) throw UsageError("verify requires a suite name");
    if (c.command != "verify" && !c.suite.empty()) throw UsageError("unexpected argument '" + c.suite + "'");
    if (c.tol && !(*c.tol > 0.0 && *c.tol < 1.0)) throw UsageError("--tol must lie in (0, 1)");
    if (c.p) {
        if (!std::isfinite(*c.p)) throw UsageError("--p must be finite");
        const bool positive = c.positive && (c.command == "sup" || c.command == "table");
        const double floor = positive ? 1.0 : 2.0;
        if (c.command != "verify" && !(*c.p > floor)) {
            throw UsageError(positive ? "--p must exceed 1 for nonnegative sums" : "--p must exceed 2");
        }
    }
    if (c.command == "table") {
        for (const auto& v : {c.p_min, c.p_max, c.p_step}) {
            if (v && !std::isfinite(*v)) throw UsageError("bad grid: bounds must be finite");
        }
        if (c.p_min && !(*c.p_min > (c.positive ? 1.0 : 2.0))) throw UsageError("bad grid: p-min too small");
        if (c.p_min && c.p_max && *c.p_max < *c.p_min) throw UsageError("bad grid: p-max below p-min");
        if (c.p_step && !(*c.p_step > 0.0)) throw UsageError("bad grid: p-step must be positive");
    }
    if (c.n && *c.n < 1) throw UsageError("--n must be positive");
    if (c.trials && *c.trials < 1) throw UsageError("--trials must be positive");
    if (c.a.size() != c.b.size() && c.command != "match" && c.command != "verify") {
        throw UsageError("--a and --b must have the same length");
    }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        validate(config);
        bool tabular = false;
        const std::vector<json> records = execute(config, &tabular);
        std::ostringstream buffer;
        emit(records, config.format, tabular, buffer);
        if (config.out.empty()) {
            out << buffer.str();
        } else {
            std::ofstream file(config.out, std::ios::binary);
            if (!file) throw UsageError("cannot open output file '" + config.out + "'");
            file << buffer.str();
        }
        return 0;
    } catch (const UsageError& e) {
        report(err, "usage", e.what());
    } catch (const FeasibilityError& e) {
        report(err, "infeasible", e.what());
    } catch (const DomainError& e) {
        report(err, "domain", e.what());
    } catch (const UnsupportedMethodError& e) {
        report(err, "unsupported", e.what());
    } catch (const InvalidComparisonError& e) {
        report(err, "invalid_comparison", e.what());
    } catch (const std::exception& e) {
        report(err, "internal", e.what());
        return 1;
    }
    return 2;
}

int main_entry(int argc, const char* const* argv) {
    RunConfig config;
    try {
        config = parse_args(argc, argv);
    } catch (const HelpRequested& h) {
        std::cout << h.what();
        return 0;
    } catch (const UsageError& e) {
        report(std::cerr, "usage", e.what());
        return 2;
    }
    return run(config, std::cout, std::cerr);
}

}  // namespace roskit::cli
