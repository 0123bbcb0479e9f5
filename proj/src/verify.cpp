#include "roskit/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "roskit/constants.hpp"
#include "roskit/cpoisson.hpp"
#include "roskit/errors.hpp"
#include "roskit/logconcave.hpp"
#include "roskit/parallel.hpp"
#include "roskit/quadrature.hpp"

namespace roskit {

namespace {

// Piecewise linear density on [0, m h] (half-line), normalized so that the
// two-sided continuous component has unit mass.
struct HalfLinear {
    double h = 1.0;
    std::vector<double> f;   // node values, already divided by the two-sided mass
    std::vector<double> su;  // su[i] = integral of f over [x_i, x_m]
    std::vector<double> sw;  // sw[i] = integral of t f(t) over [x_i, x_m]

    HalfLinear(double step, std::vector<double> values) : h(step), f(std::move(values)) {
        const std::size_t m = f.size() - 1;
        su.assign(m + 1, 0.0);
        sw.assign(m + 1, 0.0);
        for (std::size_t i = m; i-- > 0;) {
            su[i] = su[i + 1] + segment_mass(i, 0.0);
            sw[i] = sw[i + 1] + segment_mean(i, 0.0);
        }
    }

    [[nodiscard]] double support() const { return h * static_cast<double>(f.size() - 1); }

    // Integrals over [x_i + u, x_{i+1}].
    [[nodiscard]] double segment_mass(std::size_t i, double u) const {
        const double d = f[i + 1] - f[i];
        return f[i] * (h - u) + d * (h * h - u * u) / (2.0 * h);
    }
    [[nodiscard]] double segment_mean(std::size_t i, double u) const {
        const double d = f[i + 1] - f[i];
        const double xi = h * static_cast<double>(i);
        return xi * segment_mass(i, u) + f[i] * (h * h - u * u) / 2.0 + d * (h * h * h - u * u * u) / (3.0 * h);
    }

    [[nodiscard]] std::pair<std::size_t, double> locate(double x) const {
        const auto m = f.size() - 1;
        auto i = static_cast<std::size_t>(std::floor(x / h));
        if (i >= m) i = m - 1;
        return {i, x - h * static_cast<double>(i)};
    }

    [[nodiscard]] double pdf(double x) const {
        if (x >= support()) return 0.0;
        const auto [i, u] = locate(x);
        return f[i] + (f[i + 1] - f[i]) * u / h;
    }
    [[nodiscard]] double upper_tail(double x) const {
        if (x >= support()) return 0.0;
        const auto [i, u] = locate(x);
        return segment_mass(i, u) + su[i + 1];
    }
    [[nodiscard]] double upper_mean(double x) const {
        if (x >= support()) return 0.0;
        const auto [i, u] = locate(x);
        return segment_mean(i, u) + sw[i + 1];
    }
    // Two-sided E|X|^r of the normalized component.
    [[nodiscard]] double abs_moment(double r) const {
        if (r == 0.0) return 1.0;
        double total = 0.0;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            const double a = h * static_cast<double>(i);
            const double b = a + h;
            const double i0 = (std::pow(b, r + 1.0) - std::pow(a, r + 1.0)) / (r + 1.0);
            const double i1 = (std::pow(b, r + 2.0) - std::pow(a, r + 2.0)) / (r + 2.0);
            total += f[i] * i0 + (f[i + 1] - f[i]) / h * (i1 - a * i0);
        }
        return 2.0 * total;
    }
};

DiscreteLaw discrete(const BaseDistribution& v) { return DiscreteLaw::from_atoms(v.law().atoms()); }

double relative_gap(double x, double y) { return std::fabs(x - y) / std::max(std::fabs(x), std::fabs(y)); }

// (1 + u)^p + (1 - u)^p - 2 for 0 <= u < 1.
long double even_excess(long double p, long double u) {
    return std::expm1(p * std::log1p(u)) + std::expm1(p * std::log1p(-u));
}

// h(x) / (1 + |alpha| + |beta| x^2 + (2 + |gamma|) x^p).
double h_scaled(double p, double alpha, double beta, double gamma, double x) {
    const long double lx = x;
    const long double xp = std::pow(lx, static_cast<long double>(p));
    long double value;
    if (x > 1.0) {
        value = xp * (2.0L + even_excess(p, 1.0L / lx) - gamma) - alpha - beta * lx * lx;
    } else {
        value = std::pow(lx + 1.0L, static_cast<long double>(p)) + std::pow(1.0L - lx, static_cast<long double>(p)) -
                alpha - beta * lx * lx - gamma * xp;
    }
    const long double scale = 1.0L + std::fabs(alpha) + std::fabs(beta) * lx * lx + (2.0L + std::fabs(gamma)) * xp;
    return static_cast<double>(value / scale);
}

OrderingCheck compare_orderings(int n, const SymmetricLaw& source, const SymmetricLaw& minus,
                                const SymmetricLaw& plus, double p, double tol, const KfoldOptions& options) {
    if (n < 1) throw DomainError("ordering check: requires n >= 1");
    OrderingCheck out;
    auto nfold = [&](const SymmetricLaw& law) {
        return sum_abs_moment_grid(std::vector<SymmetricLaw>(static_cast<std::size_t>(n), law), p, tol, options);
    };
    out.lower = nfold(minus);
    out.source = nfold(source);
    out.upper = nfold(plus);
    out.lower_gap = out.source.value - out.lower.value;
    out.upper_gap = out.upper.value - out.source.value;
    const double lower_err = out.lower.error_bound + out.source.error_bound;
    const double upper_err = out.upper.error_bound + out.source.error_bound;
    out.ok = out.lower_gap >= -lower_err && out.upper_gap >= -upper_err;
    out.strict = out.lower_gap > lower_err && out.upper_gap > upper_err;
    return out;
}

MatchTarget target_of(const SymmetricLaw& source, double p) {
    return {p, std::sqrt(source.abs_moment(2.0)), std::pow(source.abs_moment(p), 1.0 / p)};
}

}  // namespace

// ---------------------------------------------------------------------------
// Grid densities

GridDensity GridDensity::from_law(const SymmetricLaw& law, double step, double extent) {
    if (!(step > 0.0) || !(extent > 0.0) || !std::isfinite(extent)) {
        throw GridError("GridDensity::from_law: requires step > 0 and a finite extent");
    }
    const auto m = static_cast<std::size_t>(std::ceil(extent / step - 1e-9));
    GridDensity g;
    g.step = step;
    g.lower = -static_cast<double>(m) * step;
    g.upper = static_cast<double>(m) * step;
    g.values.resize(2 * m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
        const double v = law.density(static_cast<double>(i) * step);
        g.values[m + i] = v;
        g.values[m - i] = v;
    }
    for (const Atom& a : law.atoms()) {
        if (a.mass == 0.0) continue;
        if (a.location == 0.0) {
            g.atom_list.emplace_back(0.0, a.mass);
        } else {
            g.atom_list.emplace_back(-a.location, 0.5 * a.mass);
            g.atom_list.emplace_back(a.location, 0.5 * a.mass);
        }
    }
    return g;
}

double GridDensity::total_mass() const {
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) mass += 0.5 * step * (values[i] + values[i + 1]);
    for (const auto& [x, w] : atom_list) mass += w;
    return mass;
}

double GridDensity::asymmetry() const {
    double worst = 0.0;
    const std::size_t n = values.size();
    for (std::size_t i = 0; i < n / 2 + 1; ++i) worst = std::max(worst, std::fabs(values[i] - values[n - 1 - i]));
    std::map<double, double> signed_mass;
    for (const auto& [x, w] : atom_list) signed_mass[std::fabs(x)] += x >= 0.0 ? w : -w;
    for (const auto& [x, w] : atom_list) {
        if (x == 0.0) signed_mass[0.0] -= w;
    }
    for (const auto& [x, w] : signed_mass) worst = std::max(worst, std::fabs(w));
    return worst;
}

void GridDensity::validate() const {
    if (values.size() < 3 || values.size() % 2 == 0) throw GridError("GridDensity: need an odd number >= 3 of nodes");
    if (!(step > 0.0)) throw GridError("GridDensity: step must be positive");
    const double m = static_cast<double>(values.size() / 2);
    if (std::fabs(lower + m * step) > 1e-9 * step || std::fabs(upper - m * step) > 1e-9 * step) {
        throw GridError("GridDensity: grid must be symmetric with a node at 0");
    }
    if (std::any_of(values.begin(), values.end(), [](double v) { return !(v >= 0.0) || !std::isfinite(v); })) {
        throw GridError("GridDensity: values must be finite and nonnegative");
    }
    if (std::fabs(total_mass() - 1.0) > 1e-8) throw GridError("GridDensity: total mass differs from 1 by more than 1e-8");
    if (asymmetry() > 1e-10) throw GridError("GridDensity: not symmetric within 1e-10");
}

SymmetricLaw GridDensity::to_law() const {
    validate();
    const std::size_t m = values.size() / 2;
    std::vector<double> half(m + 1);
    for (std::size_t i = 0; i <= m; ++i) half[i] = 0.5 * (values[m + i] + values[m - i]);
    double weight = 0.0;
    for (std::size_t i = 0; i < m; ++i) weight += step * (half[i] + half[i + 1]);

    std::map<double, double> atom_mass;
    for (const auto& [x, w] : atom_list) atom_mass[std::fabs(x)] += w;
    std::vector<Atom> atoms;
    for (const auto& [x, w] : atom_mass) atoms.push_back({x, w});

    std::optional<ContinuousPart> part;
    std::shared_ptr<const HalfLinear> shape;
    if (weight > 0.0) {
        for (double& v : half) v /= weight;
        shape = std::make_shared<const HalfLinear>(step, std::move(half));
        ContinuousPart cp;
        cp.pdf = [shape](double x) { return shape->pdf(x); };
        cp.upper_tail = [shape](double x) { return shape->upper_tail(x); };
        cp.upper_mean = [shape](double x) { return shape->upper_mean(x); };
        cp.support = shape->support();
        part = std::move(cp);
    }
    SymmetricLaw law(std::move(part), weight, atoms);
    law.set_closed_moment([shape, weight, atoms](double r) {
        double total = shape ? weight * shape->abs_moment(r) : 0.0;
        for (const Atom& a : atoms) {
            if (r == 0.0) {
                total += a.mass;
            } else if (a.location > 0.0) {
                total += a.mass * std::pow(a.location, r);
            }
        }
        return total;
    });
    return law;
}

ConstantResult nfold_moment(std::span<const GridDensity> densities, double p, double tol, const KfoldOptions& options) {
    if (densities.empty()) throw DomainError("nfold_moment: requires at least one density");
    std::vector<SymmetricLaw> laws;
    laws.reserve(densities.size());
    for (const GridDensity& g : densities) laws.push_back(g.to_law());
    return sum_abs_moment_grid(laws, p, tol, options);
}

// ---------------------------------------------------------------------------
// Randomized search

ConstantResult uniform_sum_abs_moment(std::span<const double> w, double p) {
    if (!(p > 0.0)) throw DomainError("uniform_sum_abs_moment: requires p > 0");
    if (w.size() > 24) throw DomainError("uniform_sum_abs_moment: at most 24 summands");
    ConstantResult r;
    r.method = "exact:uniform_difference";
    const std::size_t n = w.size();
    if (n == 0) return r;
    long double scale = 1.0L;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(w[j] > 0.0)) throw DomainError("uniform_sum_abs_moment: half-widths must be positive");
        scale /= 2.0L * w[j] * (static_cast<long double>(p) + static_cast<long double>(j + 1));
    }
    const long double q = static_cast<long double>(p) + static_cast<long double>(n);
    long double total = 0.0L;
    long double magnitude = 0.0L;
    // The pattern and its negation contribute equally; fix eps_0 = +1.
    const std::uint64_t patterns = std::uint64_t{1} << (n - 1);
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        long double x = w[0];
        int sign = 1;
        for (std::size_t j = 1; j < n; ++j) {
            if (mask >> (j - 1) & 1U) {
                x -= w[j];
                sign = -sign;
            } else {
                x += w[j];
            }
        }
        long double term = std::pow(std::fabs(x), q);
        if (n % 2 == 1 && x < 0.0L) term = -term;
        total += sign * term;
        magnitude += term < 0.0L ? -term : term;
    }
    r.value = static_cast<double>(2.0L * scale * total);
    const long double eps = std::numeric_limits<long double>::epsilon();
    r.error_bound = static_cast<double>(2.0L * scale * magnitude * eps * static_cast<long double>(4 * n + 4)) +
                    std::numeric_limits<double>::epsilon() * std::fabs(r.value);
    return r;
}

std::string ThinnedConfig::describe() const {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (j) out << ';';
        out << c[j] << '@' << mu[j];
    }
    return out.str();
}

SearchReport search_sup_U(double p, const BaseDistribution& V, double A, double B, int n_max, std::size_t trials,
                          std::uint64_t seed, double candidate_tol) {
    if (!(p > 2.0)) throw DomainError("search_sup_U: requires p > 2");
    if (n_max < 1) throw DomainError("search_sup_U: requires n_max >= 1");
    if (!(A > 0.0) || !(B > 0.0)) throw FeasibilityError("search_sup_U: budgets must be positive");
    const double v2 = abs_moment(V, 2.0);
    const double vp = abs_moment(V, p);
    const SymmetricLaw base = V.law();

    SearchReport report;
    report.p = p;
    report.V = V.spec_string();
    report.A = A;
    report.B = B;
    report.trials = trials;
    report.seed = seed;
    report.candidate_tol = candidate_tol;
    report.theorem_value = mixture_sup(p, V, A, B, 1e-8).value;

    // Budget shares s (second moment) and t (p-th moment), met with equality
    // unless the activation probability would exceed 1.
    auto build = [&](const std::vector<double>& s, const std::vector<double>& t) {
        ThinnedConfig cfg;
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double second = s[j] * A * A / v2;          // c^2 mu
            const double pth = t[j] * std::pow(B, p) / vp;    // c^p mu
            double c = std::pow(pth / second, 1.0 / (p - 2.0));
            double mu = second / (c * c);
            if (mu > 1.0) {
                mu = 1.0;
                c = std::min(std::sqrt(second), std::pow(pth, 1.0 / p));
            }
            cfg.c.push_back(c);
            cfg.mu.push_back(mu);
        }
        return cfg;
    };
    auto evaluate = [&](const ThinnedConfig& cfg) {
        const std::size_t n = cfg.c.size();
        if (V.kind() == BaseKind::uniform || V.kind() == BaseKind::gaussian) {
            // Sum over the active subsets of the exact moment given activity.
            ConstantResult total;
            total.method = V.kind() == BaseKind::uniform ? "exact:uniform_difference" : "exact:gaussian_scaling";
            const double zp = abs_moment(BaseDistribution::gaussian(), p);
            for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
                double weight = 1.0;
                std::vector<double> widths;
                double variance = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (mask >> j & 1U) {
                        weight *= cfg.mu[j];
                        widths.push_back(cfg.c[j] * V.half_width());
                        variance += cfg.c[j] * cfg.c[j];
                    } else {
                        weight *= 1.0 - cfg.mu[j];
                    }
                }
                if (weight == 0.0) continue;
                if (V.kind() == BaseKind::gaussian) {
                    total.value += weight * zp * std::pow(variance, 0.5 * p);
                    continue;
                }
                const ConstantResult part = uniform_sum_abs_moment(widths, p);
                total.value += weight * part.value;
                total.error_bound += weight * part.error_bound;
            }
            total.error_bound += 1e-15 * static_cast<double>(std::uint64_t{1} << n) * total.value;
            if (total.error_bound <= candidate_tol * total.value) return total;
        }
        std::vector<SymmetricLaw> laws;
        for (std::size_t j = 0; j < cfg.c.size(); ++j) laws.push_back(base.scaled(cfg.c[j]).thinned(cfg.mu[j]));
        return sum_abs_moment_grid(laws, p, candidate_tol);
    };

    std::vector<ConstantResult> results(trials);
    std::vector<ThinnedConfig> configs(trials);
    parallel_for(trials, [&](std::size_t trial) {
        Rng rng(derive_seed(seed, trial));
        const int n = std::uniform_int_distribution<int>(1, n_max)(rng);
        std::exponential_distribution<double> expo(1.0);
        std::vector<double> s(static_cast<std::size_t>(n)), t(static_cast<std::size_t>(n));
        double ss = 0.0, ts = 0.0;
        for (int j = 0; j < n; ++j) {
            s[static_cast<std::size_t>(j)] = expo(rng);
            t[static_cast<std::size_t>(j)] = expo(rng);
            ss += s[static_cast<std::size_t>(j)];
            ts += t[static_cast<std::size_t>(j)];
        }
        for (double& x : s) x /= ss;
        for (double& x : t) x /= ts;
        configs[trial] = build(s, t);
        results[trial] = evaluate(configs[trial]);
    });

    report.iid_values.assign(static_cast<std::size_t>(n_max), 0.0);
    parallel_for(static_cast<std::size_t>(n_max), [&](std::size_t k) {
        const std::size_t n = k + 1;
        const std::vector<double> share(n, 1.0 / static_cast<double>(n));
        report.iid_values[k] = evaluate(build(share, share)).value;
    });

    const double limit = report.theorem_value * (1.0 + 1e-6);
    std::size_t best = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        if (results[i].value > limit) report.violations.push_back(i);
        if (best == trials || results[i].value > results[best].value) best = i;
    }
    if (best < trials) {
        report.best_value = results[best].value;
        report.best_error = results[best].error_bound;
        report.best_config = configs[best];
        report.best_method = results[best].method;
    }
    report.gap = report.theorem_value - report.best_value;
    return report;
}

// ---------------------------------------------------------------------------
// Poissonisation and the easy lower bound

ComparisonCheck check_poissonisation(std::span<const BaseDistribution> tuple, double p, double tol) {
    if (!(p >= 3.0)) throw DomainError("check_poissonisation: requires p >= 3");
    if (!(tol >= 0.0)) throw DomainError("check_poissonisation: requires tol >= 0");
    ComparisonCheck out;
    if (tuple.empty()) {
        out.ok = true;
        return out;
    }
    std::map<double, double> jumps;  // |location| -> nu mass
    double lambda = 0.0;
    DiscreteLaw sum;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
        if (!tuple[j].is_atomic()) throw UnsupportedMethodError("check_poissonisation: summands must be atomic");
        const DiscreteLaw one = discrete(tuple[j]);
        sum = j == 0 ? one : convolve(sum, one);
        const SymmetricLaw law = tuple[j].law();
        for (const Atom& a : law.atoms()) {
            if (a.location > 0.0 && a.mass > 0.0) {
                jumps[a.location] += a.mass;
                lambda += a.mass;
            }
        }
    }
    out.left = sum.abs_moment(p);
    out.left_error = 2e-12 * std::max(1.0, p) * out.left;
    if (lambda > 0.0) {
        std::vector<Atom> atoms;
        for (const auto& [x, w] : jumps) atoms.push_back({x, w / lambda});
        double total = 0.0;
        for (const Atom& a : atoms) total += a.mass;
        for (Atom& a : atoms) a.mass /= total;
        const CompoundPoissonSpec spec{lambda, condition_nonzero(BaseDistribution::atoms(std::move(atoms)))};
        const double budget = 1e-10 * std::max(1.0, cp_moment_lower_bound(spec, p));
        CpOptions options;
        options.kfold = KfoldMethod::grid;
        const ConstantResult right = cp_abs_moment(spec, p, budget, options);
        out.right = right.value;
        out.right_error = right.error_bound;
    }
    out.ok = out.left <= out.right + tol + out.left_error + out.right_error;
    return out;
}

EasyBoundCheck check_easy_lower_bound(std::span<const BaseDistribution> tuple, double p) {
    if (!(p >= 2.0)) throw DomainError("check_easy_lower_bound: requires p >= 2");
    EasyBoundCheck out;
    if (tuple.empty()) {
        out.ok = true;
        return out;
    }
    DiscreteLaw sum;
    double second = 0.0;
    for (std::size_t j = 0; j < tuple.size(); ++j) {
        if (!tuple[j].is_atomic()) throw UnsupportedMethodError("check_easy_lower_bound: summands must be atomic");
        const DiscreteLaw one = discrete(tuple[j]);
        sum = j == 0 ? one : convolve(sum, one);
        second += abs_moment(tuple[j], 2.0);
        out.pth_term += abs_moment(tuple[j], p);
    }
    out.value = sum.abs_moment(p);
    out.second_term = std::pow(second, 0.5 * p);
    out.ok = out.value >= std::max(out.second_term, out.pth_term) - 1e-12 * std::max(1.0, out.value);
    return out;
}

// ---------------------------------------------------------------------------
// Sign changes, convexity, root signatures

SignChanges count_sign_changes(std::span<const double> x, std::span<const double> values, double zero_band) {
    if (values.size() < 3) throw DomainError("count_sign_changes: requires at least 3 samples");
    if (x.size() != values.size()) throw DomainError("count_sign_changes: x and values differ in length");
    if (zero_band < 0.0) {
        double peak = 0.0;
        for (double v : values) peak = std::max(peak, std::fabs(v));
        zero_band = 1e-9 * peak;
    }
    SignChanges out;
    int last = 0;
    std::size_t last_index = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(std::fabs(values[i]) > zero_band)) continue;
        const int sign = values[i] > 0.0 ? 1 : -1;
        if (sign != last) {
            if (last != 0) {
                ++out.count;
                out.locations.push_back(0.5 * (x[last_index] + x[i]));
            }
            out.signature.push_back(sign);
            last = sign;
        }
        last_index = i;
    }
    out.indeterminate = out.signature.empty();
    return out;
}

SignChanges difference_sign_changes(const std::function<double(double)>& f, const std::function<double(double)>& g,
                                    std::span<const double> x, double zero_band) {
    std::vector<double> d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) d[i] = f(x[i]) - g(x[i]);
    return count_sign_changes(x, d, zero_band);
}

long double psi(double p, long double x) {
    if (!(x >= 0.0L)) throw DomainError("psi: requires x >= 0");
    const long double s = std::sqrt(x);
    const long double lp = p;
    if (s > 1.0L) return std::pow(s, lp) * even_excess(lp, 1.0L / s);
    return std::pow(1.0L + s, lp) + std::pow(1.0L - s, lp) - 2.0L * std::pow(s, lp);
}

ConvexityCheck check_psi_convexity(double p, std::span<const double> x) {
    if (!(p > 4.0)) throw DomainError("check_psi_convexity: requires p > 4");
    if (x.size() < 3) throw DomainError("check_psi_convexity: requires at least 3 points");
    ConvexityCheck out;
    out.min_scaled_difference = std::numeric_limits<double>::infinity();
    std::vector<long double> f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = psi(p, x[i]);
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
        const long double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        if (!(x0 < x1 && x1 < x2)) throw DomainError("check_psi_convexity: grid must be increasing");
        const long double dd = ((f[i + 1] - f[i]) / (x2 - x1) - (f[i] - f[i - 1]) / (x1 - x0)) / (x2 - x0);
        // Scale by psi(x) / x^2, the natural size of psi'' away from 0.
        const long double scale = f[i] / std::max(1.0L, x1 * x1);
        const double scaled = static_cast<double>(dd / scale);
        out.min_scaled_difference = std::min(out.min_scaled_difference, scaled);
        if (!(dd > 0.0L)) ++out.failures;
    }
    out.ok = out.failures == 0;
    return out;
}

HSignature check_h_signature(double p, double alpha, double beta, double gamma, std::size_t points) {
    if (!(p > 4.0)) throw DomainError("check_h_signature: requires p > 4");
    if (points < 3) throw DomainError("check_h_signature: requires at least 3 points");
    // Beyond x_max, h(x) / x^p = 2 + excess(1/x) - gamma - alpha x^-p - beta x^(2-p)
    // carries the sign of 2 - gamma: every correction decreases in magnitude.
    const double lead = std::fabs(2.0 - gamma);
    double x_max = 4.0;
    while (x_max < 1e8) {
        const double rest = static_cast<double>(even_excess(p, 1.0L / x_max)) + std::fabs(alpha) * std::pow(x_max, -p) +
                            std::fabs(beta) * std::pow(x_max, 2.0 - p);
        if (rest < 0.5 * lead) break;
        x_max *= 2.0;
    }
    const double x_min = 1e-6;
    std::vector<double> x(points), v(points);
    const double ratio = std::log(x_max / x_min) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) {
        x[i] = x_min * std::exp(ratio * static_cast<double>(i));
        v[i] = h_scaled(p, alpha, beta, gamma, x[i]);
    }
    const SignChanges sc = count_sign_changes(x, v);
    HSignature out;
    out.roots = sc.count;
    out.signature = sc.signature;
    out.locations = sc.locations;
    out.x_max = x_max;
    out.ok = out.roots <= 3 && (out.roots < 3 || out.signature == std::vector<int>{1, -1, 1, -1});
    return out;
}

std::array<double, 3> h_coefficients_through(double p, double x1, double x2, double x3) {
    if (!(0.0 < x1 && x1 < x2 && x2 < x3)) throw DomainError("h_coefficients_through: requires 0 < x1 < x2 < x3");
    const long double lp = p;
    long double m[3][4];
    const double xs[3] = {x1, x2, x3};
    for (int i = 0; i < 3; ++i) {
        const long double xi = xs[i];
        m[i][0] = 1.0L;
        m[i][1] = xi * xi;
        m[i][2] = std::pow(xi, lp);
        m[i][3] = std::pow(xi + 1.0L, lp) + std::pow(std::fabs(xi - 1.0L), lp);
    }
    // Gaussian elimination with partial pivoting on [M | g].
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int r = col + 1; r < 3; ++r) {
            if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
        }
        for (int k = 0; k < 4; ++k) std::swap(m[col][k], m[piv][k]);
        for (int r = col + 1; r < 3; ++r) {
            const long double f = m[r][col] / m[col][col];
            for (int k = col; k < 4; ++k) m[r][k] -= f * m[col][k];
        }
    }
    long double sol[3];
    for (int r = 2; r >= 0; --r) {
        long double acc = m[r][3];
        for (int k = r + 1; k < 3; ++k) acc -= m[r][k] * sol[k];
        sol[r] = acc / m[r][r];
    }
    return {static_cast<double>(sol[0]), static_cast<double>(sol[1]), static_cast<double>(sol[2])};
}

DetCheck check_det_inequality(const std::function<long double(long double)>& phi, double x1, double x2, double x3) {
    if (!(0.0 < x1 && x1 < x2 && x2 < x3)) throw DomainError("check_det_inequality: requires 0 < x1 < x2 < x3");
    const long double a = x1, b = x2, c = x3;
    DetCheck out;
    const long double fa = phi(a), fb = phi(b), fc = phi(c);
    out.det = fa * (c - b) - fb * (c - a) + fc * (b - a);
    out.rounding = 16.0L * std::numeric_limits<long double>::epsilon() *
                   (std::fabs(fa) * (c - b) + std::fabs(fb) * (c - a) + std::fabs(fc) * (b - a));
    out.ok = out.det >= -out.rounding;
    return out;
}

// ---------------------------------------------------------------------------
// Interlacing and ordering

ConstantResult shifted_abs_moment(const SymmetricLaw& law, double z, double p) {
    if (!(p > 0.0)) throw DomainError("shifted_abs_moment: requires p > 0");
    ConstantResult r;
    r.method = "quadrature";
    for (const Atom& a : law.atoms()) {
        if (a.mass == 0.0) continue;
        if (a.location == 0.0) {
            r.value += a.mass * std::pow(std::fabs(z), p);
        } else {
            r.value += 0.5 * a.mass * (std::pow(std::fabs(a.location + z), p) + std::pow(std::fabs(a.location - z), p));
        }
    }
    if (const auto& part = law.continuous_part(); part && law.continuous_weight() > 0.0) {
        std::vector<double> breaks = part->breaks;
        breaks.push_back(std::fabs(z));
        std::sort(breaks.begin(), breaks.end());
        auto integrand = [&](double x) {
            return (std::pow(std::fabs(x + z), p) + std::pow(std::fabs(x - z), p)) * part->pdf(x);
        };
        const auto est = quad::integrate_pieces(integrand, 0.0, part->support, breaks,
                                                {.abs_tol = 0.0, .rel_tol = 1e-13, .max_intervals = 20000});
        r.value += law.continuous_weight() * est.value;
        r.error_bound += law.continuous_weight() * est.error;
    }
    r.error_bound += 1e-14 * std::fabs(r.value);
    return r;
}

ComparisonCheck check_interlacing(const SymmetricLaw& source, const SymmetricLaw& member, MemberSide side, double z,
                                  double p) {
    for (double r : {2.0, p}) {
        const double gap = relative_gap(source.abs_moment(r), member.abs_moment(r));
        if (gap > 1e-6) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "check_interlacing: moment of order %g differs by %.3g relative", r, gap);
            throw InvalidComparisonError(buf);
        }
    }
    const ConstantResult s = shifted_abs_moment(source, z, p);
    const ConstantResult m = shifted_abs_moment(member, z, p);
    ComparisonCheck out;
    out.left = s.value;
    out.right = m.value;
    out.left_error = s.error_bound;
    out.right_error = m.error_bound;
    const double slack = s.error_bound + m.error_bound;
    out.ok = side == MemberSide::minus ? s.value >= m.value - slack : s.value <= m.value + slack;
    return out;
}

OrderingCheck check_logconcave_ordering(int n, const SymmetricLaw& source, double p, double tol,
                                        const KfoldOptions& options) {
    const MatchTarget target = target_of(source, p);
    return compare_orderings(n, source, to_law(match_density_minus(target)), to_law(match_density_plus(target)), p,
                             tol, options);
}

OrderingCheck check_tail_ordering(int n, const SymmetricLaw& source, double p, double tol, const KfoldOptions& options) {
    const MatchTarget target = target_of(source, p);
    return compare_orderings(n, source, to_law(match_tail_minus(target)), to_law(match_tail_plus(target)), p, tol,
                             options);
}

// ---------------------------------------------------------------------------
// Generators

std::vector<BaseDistribution> random_atomic_tuple(Rng& rng, int n_max) {
    if (n_max < 1) throw DomainError("random_atomic_tuple: requires n_max >= 1");
    std::uniform_int_distribution<int> count(1, n_max);
    std::uniform_int_distribution<int> atoms_per(1, 3);
    std::uniform_int_distribution<int> slot(1, 16);
    std::exponential_distribution<double> expo(1.0);
    std::vector<BaseDistribution> tuple;
    const int n = count(rng);
    for (int j = 0; j < n; ++j) {
        std::map<int, double> picked;
        const int k = atoms_per(rng);
        while (static_cast<int>(picked.size()) < k) picked.emplace(slot(rng), 0.0);
        if (rng() & 1ULL) picked.emplace(0, 0.0);
        double total = 0.0;
        for (auto& [loc, w] : picked) total += (w = expo(rng));
        std::vector<Atom> atoms;
        for (const auto& [loc, w] : picked) atoms.push_back({loc / 8.0, w / total});
        tuple.push_back(BaseDistribution::atoms(std::move(atoms)));
    }
    return tuple;
}

std::array<double, 3> random_increasing_triple(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
    std::array<double, 3> x{};
    do {
        for (double& v : x) v = std::exp(u(rng));
        std::sort(x.begin(), x.end());
    } while (!(x[1] > x[0] * 1.01 && x[2] > x[1] * 1.01));
    return x;
}

std::array<double, 3> random_h_coefficients(Rng& rng, double p, bool pinned) {
    if (pinned) {
        const auto x = random_increasing_triple(rng, 0.05, 20.0);
        return h_coefficients_through(p, x[0], x[1], x[2]);
    }
    std::uniform_real_distribution<double> alpha(-2.0, 6.0), beta(-40.0, 40.0), gamma(0.0, 6.0);
    return {alpha(rng), beta(rng), gamma(rng)};
}

ConvexSample random_convex_function(Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double quad = unit(rng) < 0.5 ? 0.0 : unit(rng);
    const double expo_w = unit(rng) < 0.5 ? 0.0 : unit(rng);
    const double rate = 0.1 + unit(rng);
    const double kink_w = unit(rng) < 0.5 ? 0.0 : unit(rng);
    const double kink_at = 5.0 * unit(rng);
    const double power_w = unit(rng) < 0.5 ? 0.0 : unit(rng);
    const double power = 1.0 + 4.0 * unit(rng);
    const double psi_w = unit(rng) < 0.5 ? 0.0 : unit(rng);
    const double psi_p = 4.0 + 6.0 * unit(rng);
    const double slope = 4.0 * unit(rng) - 2.0;
    const double offset = 4.0 * unit(rng) - 2.0;

    ConvexSample s;
    std::ostringstream name;
    name.precision(6);
    name << offset << " + " << slope << " x";
    if (quad > 0.0) name << " + " << quad << " x^2";
    if (expo_w > 0.0) name << " + " << expo_w << " exp(" << rate << " x)";
    if (kink_w > 0.0) name << " + " << kink_w << " |x - " << kink_at << "|";
    if (power_w > 0.0) name << " + " << power_w << " x^" << power;
    if (psi_w > 0.0) name << " + " << psi_w << " psi_" << psi_p << "(x)";
    s.name = name.str();
    s.strict = quad > 0.0 || expo_w > 0.0 || power_w > 0.0 || psi_w > 0.0;
    s.phi = [=](long double x) {
        long double v = offset + slope * x;
        if (quad > 0.0) v += quad * x * x;
        if (expo_w > 0.0) v += expo_w * std::exp(rate * x);
        if (kink_w > 0.0) v += kink_w * std::fabs(x - kink_at);
        if (power_w > 0.0) v += power_w * std::pow(x, static_cast<long double>(power));
        if (psi_w > 0.0) v += psi_w * psi(psi_p, x);
        return v;
    };
    return s;
}

}  // namespace roskit
