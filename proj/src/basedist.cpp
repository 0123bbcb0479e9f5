#include "roskit/basedist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "roskit/errors.hpp"
#include "roskit/quadrature.hpp"
#include "roskit/specfun.hpp"

namespace roskit {

namespace {

double parse_number(std::string_view text, std::string_view context) {
    const std::string owned(text);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (owned.empty() || end != owned.c_str() + owned.size() || !std::isfinite(v)) {
        throw DomainError("unknown V spec: bad number '" + owned + "' in " + std::string(context));
    }
    return v;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// E[|X|^p ; |X| > cut] for the continuous part of a law.
double tail_moment(const SymmetricLaw& law, double p, double cut) {
    const auto& part = law.continuous_part();
    if (!part || law.continuous_weight() == 0.0 || cut >= part->support) return 0.0;
    auto integrand = [&](double x) { return std::pow(x, p) * part->pdf(x); };
    const auto est = quad::integrate_pieces(integrand, cut, part->support, part->breaks,
                                            {.abs_tol = 1e-300, .rel_tol = 1e-8});
    return 2.0 * law.continuous_weight() * est.value;
}

KfoldTable atomic_table(const SymmetricLaw& law, int k_max, double p) {
    constexpr std::size_t kMaxSupport = 2'000'000;
    KfoldTable table;
    table.method = "grid:atomic";
    table.values.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    table.errors.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    const DiscreteLaw one = DiscreteLaw::from_atoms(law.atoms());
    DiscreteLaw sum = one;
    std::size_t largest = one.size();
    for (int k = 1; k <= k_max; ++k) {
        if (k > 1) sum = convolve(sum, one);
        largest = std::max(largest, sum.size());
        if (sum.size() > kMaxSupport) {
            throw GridError("atomic k-fold support exceeds " + std::to_string(kMaxSupport) +
                            " points; use monte_carlo");
        }
        const double v = sum.abs_moment(p);
        table.values[static_cast<std::size_t>(k)] = v;
        // Support points are merged at 12 significant digits.
        table.errors[static_cast<std::size_t>(k)] = 2e-12 * std::max(1.0, p) * v;
    }
    table.diagnostics["support_points"] = static_cast<double>(largest);
    return table;
}

struct GridPrep {
    double extent = 0.0;
    double truncated_mass = 0.0;
    double tail_p = 0.0;  // E[|X|^p; |X| > extent]
};

// Lattice extent per summand: the support for bounded laws, otherwise a point
// L beyond which the mass is below tol / (10 L^p).
GridPrep prepare(const SymmetricLaw& law, double p, double tol) {
    GridPrep g;
    const double bound = law.support_bound();
    if (std::isfinite(bound)) {
        g.extent = bound;
        return g;
    }
    double mass = 1e-12;
    g.extent = law.truncation_point(mass);
    for (int i = 0; i < 4; ++i) {
        mass = std::min(1e-12, tol / (10.0 * std::pow(g.extent, p)));
        g.extent = law.truncation_point(mass);
    }
    g.truncated_mass = law.abs_tail(g.extent);
    g.tail_p = tail_moment(law, p, g.extent);
    return g;
}

// Crude bound on the moment lost by cutting k summands at the extent.
double truncation_error(const GridPrep& g, double p, int k, double rest_moment) {
    if (g.truncated_mass == 0.0 && g.tail_p == 0.0) return 0.0;
    return k * std::pow(2.0, p) * (g.tail_p + g.truncated_mass * rest_moment);
}

// Starting step: 1/64 of the smallest scale, aligned so that the smallest
// nonzero atom sits on a node (halving keeps it there).
double initial_step(const std::vector<SymmetricLaw>& laws) {
    double scale = std::numeric_limits<double>::infinity();
    double atom = std::numeric_limits<double>::infinity();
    for (const SymmetricLaw& l : laws) {
        const double bound = l.support_bound();
        scale = std::min(scale, std::isfinite(bound) ? bound : std::sqrt(l.abs_moment(2.0)));
        for (const Atom& a : l.atoms()) {
            if (a.location > 0.0 && a.mass > 0.0) atom = std::min(atom, a.location);
        }
    }
    double step = scale / 64.0;
    if (std::isfinite(atom)) step = atom / std::ceil(atom / step);
    return step;
}

// E|S_k|^p for Rademacher (binomial walk) and Gaussian (sqrt(k) Z) laws.
double exact_kfold(const BaseDistribution& v, int k, double p) {
    if (v.kind() == BaseKind::gaussian) {
        return std::pow(static_cast<double>(k), 0.5 * p) * specfun::gaussian_abs_moment(p);
    }
    const double lgk = specfun::log_gamma(k + 1.0) - k * std::numbers::ln2;
    double total = 0.0;
    for (int i = 0; i <= k; ++i) {
        const int d = std::abs(2 * i - k);
        if (d == 0) continue;
        total += std::exp(lgk - specfun::log_gamma(i + 1.0) - specfun::log_gamma(k - i + 1.0) +
                          p * std::log(static_cast<double>(d)));
    }
    return total;
}

double richardson(double fine, double coarse) { return (4.0 * fine - coarse) / 3.0; }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

BaseDistribution BaseDistribution::rademacher() {
    BaseDistribution v;
    v.kind_ = BaseKind::rademacher;
    return v;
}

BaseDistribution BaseDistribution::uniform(double half_width) {
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
        throw DomainError("uniform base law: half-width must be positive");
    }
    BaseDistribution v;
    v.kind_ = BaseKind::uniform;
    v.half_width_ = half_width;
    return v;
}

BaseDistribution BaseDistribution::gaussian() {
    BaseDistribution v;
    v.kind_ = BaseKind::gaussian;
    return v;
}

BaseDistribution BaseDistribution::cosine() {
    BaseDistribution v;
    v.kind_ = BaseKind::cosine;
    return v;
}

BaseDistribution BaseDistribution::atoms(std::vector<Atom> atoms) {
    if (atoms.empty()) throw DomainError("atoms base law: no atoms given");
    double total = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        const Atom& a = atoms[i];
        if (!(a.location >= 0.0) || !std::isfinite(a.location)) {
            throw DomainError("atoms base law: locations must be finite and nonnegative");
        }
        if (!(a.mass >= 0.0 && a.mass <= 1.0)) {
            throw DomainError("atoms base law: masses must lie in [0, 1]");
        }
        if (i > 0 && !(a.location > atoms[i - 1].location)) {
            throw DomainError("atoms base law: locations must be strictly increasing");
        }
        total += a.mass;
    }
    if (std::fabs(total - 1.0) > 1e-12) {
        throw DomainError("atoms base law: masses must sum to 1");
    }
    BaseDistribution v;
    v.kind_ = BaseKind::atoms;
    v.atoms_ = std::move(atoms);
    if (v.zero_mass() >= 1.0) {
        throw DomainError("atoms base law: V must not be identically 0");
    }
    return v;
}

BaseDistribution BaseDistribution::parse(std::string_view text) {
    if (text == "rademacher") return rademacher();
    if (text == "gaussian") return gaussian();
    if (text == "cosine") return cosine();
    if (text == "uniform") return uniform(1.0);
    if (text.starts_with("uniform:")) {
        std::string_view rest = text.substr(8);
        if (!rest.starts_with("w=")) throw DomainError("unknown V spec: expected uniform:w=<half-width>");
        return uniform(parse_number(rest.substr(2), "uniform"));
    }
    if (text.starts_with("atoms:")) {
        std::vector<Atom> atoms;
        std::string_view rest = text.substr(6);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = rest.substr(0, comma);
            const auto colon = item.find(':');
            if (colon == std::string_view::npos) {
                throw DomainError("unknown V spec: atom '" + std::string(item) + "' must be location:mass");
            }
            atoms.push_back({parse_number(item.substr(0, colon), "atoms"),
                             parse_number(item.substr(colon + 1), "atoms")});
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
        return BaseDistribution::atoms(std::move(atoms));
    }
    throw DomainError("unknown V spec: '" + std::string(text) + "'");
}

double BaseDistribution::zero_mass() const {
    if (kind_ != BaseKind::atoms) return 0.0;
    for (const Atom& a : atoms_) {
        if (a.location == 0.0) return a.mass;
    }
    return 0.0;
}

std::string BaseDistribution::spec_string() const {
    switch (kind_) {
        case BaseKind::rademacher: return "rademacher";
        case BaseKind::gaussian: return "gaussian";
        case BaseKind::cosine: return "cosine";
        case BaseKind::uniform: return "uniform:w=" + format_double(half_width_);
        case BaseKind::atoms: {
            std::string out = "atoms:";
            for (std::size_t i = 0; i < atoms_.size(); ++i) {
                if (i) out += ',';
                out += format_double(atoms_[i].location) + ":" + format_double(atoms_[i].mass);
            }
            return out;
        }
    }
    return {};
}

SymmetricLaw BaseDistribution::law() const {
    switch (kind_) {
        case BaseKind::rademacher: return SymmetricLaw::point_masses({{1.0, 1.0}});
        case BaseKind::uniform: return SymmetricLaw::uniform(half_width_);
        case BaseKind::gaussian: return SymmetricLaw::gaussian();
        case BaseKind::cosine: return SymmetricLaw::arcsine();
        case BaseKind::atoms: return SymmetricLaw::point_masses(atoms_);
    }
    return {};
}

bool BaseDistribution::operator==(const BaseDistribution& o) const {
    if (kind_ != o.kind_ || half_width_ != o.half_width_ || atoms_.size() != o.atoms_.size()) return false;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (atoms_[i].location != o.atoms_[i].location || atoms_[i].mass != o.atoms_[i].mass) return false;
    }
    return true;
}

double abs_moment(const BaseDistribution& v, double r) {
    if (!(r >= 0.0)) throw DomainError("abs_moment: requires r >= 0");
    if (r == 0.0) return 1.0;
    switch (v.kind()) {
        case BaseKind::rademacher: return 1.0;
        case BaseKind::uniform: return std::pow(v.half_width(), r) / (r + 1.0);
        case BaseKind::gaussian: return specfun::gaussian_abs_moment(r);
        case BaseKind::cosine: return 1.0 / specfun::steinhaus_beta(r);
        case BaseKind::atoms: {
            double total = 0.0;
            for (const Atom& a : v.atom_list()) {
                if (a.location > 0.0) total += a.mass * std::pow(a.location, r);
            }
            return total;
        }
    }
    return 0.0;
}

ConditionedBase condition_nonzero(const BaseDistribution& v) {
    const double z = v.zero_mass();
    if (z >= 1.0) throw DomainError("condition_nonzero: degenerate law, P(V = 0) = 1");
    if (z == 0.0) return ConditionedBase(v);
    std::vector<Atom> kept;
    for (const Atom& a : v.atom_list()) {
        if (a.location > 0.0) kept.push_back({a.location, a.mass / (1.0 - z)});
    }
    // Renormalize exactly so the constructor's sum check holds.
    double total = 0.0;
    for (const Atom& a : kept) total += a.mass;
    for (Atom& a : kept) a.mass /= total;
    return ConditionedBase(BaseDistribution::atoms(std::move(kept)));
}

std::vector<double> sample_abs(const BaseDistribution& v, Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    switch (v.kind()) {
        case BaseKind::rademacher:
            std::fill(out.begin(), out.end(), 1.0);
            break;
        case BaseKind::uniform:
            for (double& x : out) x = v.half_width() * unit(rng);
            break;
        case BaseKind::gaussian: {
            std::normal_distribution<double> normal(0.0, 1.0);
            for (double& x : out) x = std::fabs(normal(rng));
            break;
        }
        case BaseKind::cosine:
            for (double& x : out) x = std::fabs(std::cos(2.0 * std::numbers::pi * unit(rng)));
            break;
        case BaseKind::atoms: {
            const auto& atoms = v.atom_list();
            for (double& x : out) {
                const double u = unit(rng);
                double acc = 0.0;
                x = atoms.back().location;
                for (const Atom& a : atoms) {
                    acc += a.mass;
                    if (u < acc) {
                        x = a.location;
                        break;
                    }
                }
            }
            break;
        }
    }
    return out;
}

double sample_signed(const BaseDistribution& v, Rng& rng) {
    const double magnitude = sample_abs(v, rng, 1)[0];
    return (rng() & 1ULL) ? magnitude : -magnitude;
}

KfoldMethod default_kfold_method(const BaseDistribution& v) {
    if (v.kind() == BaseKind::rademacher || v.kind() == BaseKind::gaussian) return KfoldMethod::exact;
    return KfoldMethod::grid;
}

KfoldTable kfold_abs_moments_grid(const SymmetricLaw& law, int k_max, double p, double tol,
                                  const KfoldOptions& options) {
    if (law.continuous_weight() == 0.0) return atomic_table(law, k_max, p);

    KfoldTable table;
    table.method = "grid:lattice";
    const std::size_t count = static_cast<std::size_t>(k_max) + 1;
    table.values.assign(count, 0.0);
    table.errors.assign(count, 0.0);
    if (k_max == 0) return table;

    const GridPrep prep = prepare(law, p, tol);
    const double step0 = initial_step({law});

    auto moments_at = [&](double step, std::size_t* nodes) {
        const Lattice one = discretize(law, step, prep.extent).lattice;
        std::vector<double> out(count, 0.0);
        Lattice sum = one;
        for (int k = 1; k <= k_max; ++k) {
            if (k > 1) sum = convolve(sum, one);
            out[static_cast<std::size_t>(k)] = sum.abs_moment(p);
        }
        *nodes = sum.mass.size();
        return out;
    };

    std::size_t nodes = 0;
    std::vector<double> coarse = moments_at(step0, &nodes);
    double step = step0;
    bool converged = false;
    int levels = 1;
    while (2 * nodes <= options.max_nodes) {
        step *= 0.5;
        std::vector<double> fine = moments_at(step, &nodes);
        ++levels;
        converged = true;
        for (int k = 1; k <= k_max; ++k) {
            const auto i = static_cast<std::size_t>(k);
            const double value = richardson(fine[i], coarse[i]);
            const double prev = k > 1 ? table.values[i - 1] : 0.0;
            table.values[i] = value;
            table.errors[i] = std::fabs(fine[i] - coarse[i]) / 3.0 + truncation_error(prep, p, k, prev);
            if (table.errors[i] > tol * std::fabs(value)) converged = false;
        }
        coarse = std::move(fine);
        if (converged) break;
    }
    if (levels == 1) {
        // No refinement fit in the node budget: no error estimate is available.
        for (std::size_t i = 1; i < count; ++i) {
            table.values[i] = coarse[i];
            table.errors[i] = std::fabs(coarse[i]);
        }
    }
    table.diagnostics["grid_step"] = step;
    table.diagnostics["grid_extent"] = prep.extent;
    table.diagnostics["grid_levels"] = levels;
    table.diagnostics["grid_converged"] = converged ? 1.0 : 0.0;
    table.diagnostics["grid_truncated_mass"] = prep.truncated_mass;
    return table;
}

ConstantResult sum_abs_moment_grid(const std::vector<SymmetricLaw>& laws, double p, double tol,
                                   const KfoldOptions& options) {
    if (laws.empty()) return {0.0, "grid", 0.0, {}};
    if (!(p > 0.0)) throw DomainError("sum_abs_moment_grid: requires p > 0");
    const bool atomic = std::all_of(laws.begin(), laws.end(),
                                    [](const SymmetricLaw& l) { return l.continuous_weight() == 0.0; });
    ConstantResult r;
    r.diagnostics["summands"] = static_cast<double>(laws.size());
    if (atomic) {
        constexpr std::size_t kMaxSupport = 2'000'000;
        DiscreteLaw sum = DiscreteLaw::from_atoms(laws[0].atoms());
        for (std::size_t j = 1; j < laws.size(); ++j) {
            sum = convolve(sum, DiscreteLaw::from_atoms(laws[j].atoms()));
            if (sum.size() > kMaxSupport) {
                throw GridError("exact enumeration support exceeds " + std::to_string(kMaxSupport) +
                                " points; use monte_carlo");
            }
        }
        r.value = sum.abs_moment(p);
        r.error_bound = 2e-12 * std::max(1.0, p) * r.value;
        r.method = "grid:atomic";
        r.diagnostics["support_points"] = static_cast<double>(sum.size());
        return r;
    }

    std::vector<GridPrep> preps;
    double truncated_mass = 0.0;
    for (const SymmetricLaw& l : laws) {
        preps.push_back(prepare(l, p, tol));
        truncated_mass += preps.back().truncated_mass;
    }
    const double step0 = initial_step(laws);

    auto moment_at = [&](double step, std::size_t* nodes) {
        Lattice sum = discretize(laws[0], step, preps[0].extent).lattice;
        for (std::size_t j = 1; j < laws.size(); ++j) {
            sum = convolve(sum, discretize(laws[j], step, preps[j].extent).lattice);
        }
        *nodes = sum.mass.size();
        return sum.abs_moment(p);
    };

    std::size_t nodes = 0;
    double coarse = moment_at(step0, &nodes);
    double step = step0;
    int levels = 1;
    bool converged = false;
    r.value = coarse;
    r.error_bound = std::fabs(coarse);
    while (2 * nodes <= options.max_nodes) {
        step *= 0.5;
        const double fine = moment_at(step, &nodes);
        ++levels;
        r.value = richardson(fine, coarse);
        double trunc = 0.0;
        for (const GridPrep& g : preps) trunc += truncation_error(g, p, 1, r.value);
        r.error_bound = std::fabs(fine - coarse) / 3.0 + trunc;
        coarse = fine;
        if (r.error_bound <= tol * std::fabs(r.value)) {
            converged = true;
            break;
        }
    }
    r.method = "grid:lattice";
    r.diagnostics["grid_step"] = step;
    r.diagnostics["grid_levels"] = levels;
    r.diagnostics["grid_converged"] = converged ? 1.0 : 0.0;
    r.diagnostics["grid_truncated_mass"] = truncated_mass;
    return r;
}

KfoldTable kfold_abs_moments(const ConditionedBase& cv, int k_max, double p, KfoldMethod method,
                             double tol, const KfoldOptions& options) {
    if (k_max < 0) throw DomainError("kfold_abs_moments: k must be nonnegative");
    if (!(p > 0.0)) throw DomainError("kfold_abs_moments: requires p > 0");
    const BaseDistribution& v = cv.base();
    const std::size_t count = static_cast<std::size_t>(k_max) + 1;

    switch (method) {
        case KfoldMethod::exact: {
            KfoldTable table;
            table.values.assign(count, 0.0);
            table.errors.assign(count, 0.0);
            if (v.kind() == BaseKind::rademacher || v.kind() == BaseKind::gaussian) {
                table.method = v.kind() == BaseKind::rademacher ? "exact:binomial" : "exact:gaussian_scaling";
                for (int k = 1; k <= k_max; ++k) {
                    const double val = exact_kfold(v, k, p);
                    table.values[static_cast<std::size_t>(k)] = val;
                    table.errors[static_cast<std::size_t>(k)] = 1e-14 * (k + 1) * val;
                }
                return table;
            }
            throw UnsupportedMethodError("kfold_abs_moment: exact method requires a Rademacher or Gaussian base law, got " +
                                         v.spec_string());
        }
        case KfoldMethod::grid:
            return kfold_abs_moments_grid(v.law(), k_max, p, tol, options);
        case KfoldMethod::monte_carlo: {
            KfoldTable table;
            table.method = "monte_carlo";
            table.values.assign(count, 0.0);
            table.errors.assign(count, 0.0);
            if (k_max == 0) return table;
            const std::size_t n = std::max<std::size_t>(options.mc_samples, 2);
            std::vector<double> sum(count, 0.0), sum_sq(count, 0.0);
            double max_term = 0.0;
            Rng rng(options.seed);
            std::uniform_int_distribution<int> coin(0, 1);
            for (std::size_t s = 0; s < n; ++s) {
                double running = 0.0;
                const std::vector<double> draws = sample_abs(v, rng, static_cast<std::size_t>(k_max));
                for (int k = 1; k <= k_max; ++k) {
                    const double x = draws[static_cast<std::size_t>(k - 1)];
                    running += coin(rng) ? x : -x;
                    const double term = std::pow(std::fabs(running), p);
                    sum[static_cast<std::size_t>(k)] += term;
                    sum_sq[static_cast<std::size_t>(k)] += term * term;
                    max_term = std::max(max_term, term);
                }
            }
            const double dn = static_cast<double>(n);
            for (int k = 1; k <= k_max; ++k) {
                const auto i = static_cast<std::size_t>(k);
                const double mean = sum[i] / dn;
                const double var = std::max(0.0, (sum_sq[i] - dn * mean * mean) / (dn - 1.0));
                table.values[i] = mean;
                table.errors[i] = 3.0 * std::sqrt(var / dn);
            }
            table.diagnostics["mc_samples"] = dn;
            table.diagnostics["mc_max_term"] = max_term;
            table.diagnostics["seed"] = static_cast<double>(options.seed);
            return table;
        }
    }
    throw UnsupportedMethodError("kfold_abs_moments: unknown method");
}

ConstantResult kfold_abs_moment(const ConditionedBase& v, int k, double p, KfoldMethod method, double tol,
                                const KfoldOptions& options) {
    if (k < 0) throw DomainError("kfold_abs_moment: k must be nonnegative");
    if (k == 0) {
        // Validate the method/law pairing even for the empty sum.
        if (method == KfoldMethod::exact && v.base().kind() != BaseKind::rademacher &&
            v.base().kind() != BaseKind::gaussian) {
            throw UnsupportedMethodError("kfold_abs_moment: exact method requires a Rademacher or Gaussian base law");
        }
        return {0.0, to_string(method), 0.0, {{"k", 0.0}}};
    }
    if (method == KfoldMethod::exact &&
        (v.base().kind() == BaseKind::rademacher || v.base().kind() == BaseKind::gaussian)) {
        const double val = exact_kfold(v.base(), k, p);
        return {val,
                v.base().kind() == BaseKind::rademacher ? "exact:binomial" : "exact:gaussian_scaling",
                1e-14 * (k + 1) * val,
                {{"k", static_cast<double>(k)}, {"p", p}}};
    }
    const KfoldTable table = kfold_abs_moments(v, k, p, method, tol, options);
    ConstantResult r;
    r.value = table.values.back();
    r.error_bound = table.errors.back();
    r.method = table.method;
    r.diagnostics = table.diagnostics;
    r.diagnostics["k"] = k;
    r.diagnostics["p"] = p;
    return r;
}

std::string to_string(KfoldMethod method) {
    switch (method) {
        case KfoldMethod::exact: return "exact";
        case KfoldMethod::grid: return "grid";
        case KfoldMethod::monte_carlo: return "monte_carlo";
    }
    return "unknown";
}

KfoldMethod parse_kfold_method(std::string_view text) {
    if (text == "exact") return KfoldMethod::exact;
    if (text == "grid") return KfoldMethod::grid;
    if (text == "monte_carlo" || text == "mc") return KfoldMethod::monte_carlo;
    throw DomainError("unknown k-fold method: '" + std::string(text) + "'");
}

}  // namespace roskit
