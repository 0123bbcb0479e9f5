#include "roskit/constants.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "roskit/errors.hpp"
#include "roskit/specfun.hpp"

namespace roskit {

namespace {

void require_tol(double tol, const char* where) {
    if (!(tol > 0.0 && tol < 1.0)) throw DomainError(std::string(where) + ": tol must lie in (0, 1)");
}

void require_positive(double x, const char* name, const char* where) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw DomainError(std::string(where) + ": " + name + " must be positive and finite");
    }
}

// Sum over a thinned sequence c_j theta_j V_j sampled directly.
ConstantResult monte_carlo_thinned(const BaseDistribution& V, const std::vector<double>& c,
                                   const std::vector<double>& mu, double p, const EnumOptions& options) {
    Rng rng(options.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t n = std::max<std::size_t>(options.mc_samples, 2);
    double sum = 0.0, sum_sq = 0.0, max_term = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        double total = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (unit(rng) < mu[j]) total += c[j] * sample_signed(V, rng);
        }
        const double term = std::pow(std::fabs(total), p);
        sum += term;
        sum_sq += term * term;
        max_term = std::max(max_term, term);
    }
    const double dn = static_cast<double>(n);
    const double mean = sum / dn;
    const double var = std::max(0.0, (sum_sq - dn * mean * mean) / (dn - 1.0));
    ConstantResult r{mean, "monte_carlo", 3.0 * std::sqrt(var / dn), {}};
    r.diagnostics["mc_samples"] = dn;
    r.diagnostics["mc_max_term"] = max_term;
    r.diagnostics["seed"] = static_cast<double>(options.seed);
    return r;
}

// E|sum_j c_j theta_j Z_j|^p: conditionally on the active set the sum is
// Gaussian with variance sum c_j^2.
ConstantResult gaussian_thinned_exact(const std::vector<double>& c, const std::vector<double>& mu, double p) {
    constexpr std::size_t kMaxSummands = 20;
    if (c.size() > kMaxSummands) {
        throw UnsupportedMethodError("exact_enum with Gaussian V supports at most 20 summands; use monte_carlo");
    }
    const std::size_t subsets = std::size_t{1} << c.size();
    double total = 0.0;
    for (std::size_t mask = 1; mask < subsets; ++mask) {
        double prob = 1.0, var = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            if (mask & (std::size_t{1} << j)) {
                prob *= mu[j];
                var += c[j] * c[j];
            } else {
                prob *= 1.0 - mu[j];
            }
        }
        total += prob * std::pow(var, 0.5 * p);
    }
    const double value = total * specfun::gaussian_abs_moment(p);
    ConstantResult r{value, "exact:gaussian_subsets", 1e-14 * static_cast<double>(subsets) * value, {}};
    r.diagnostics["subsets"] = static_cast<double>(subsets);
    return r;
}

// One draw of V_1 + ... + V_m; Rademacher and Gaussian sums are drawn from
// their exact laws.
double sample_sum(const BaseDistribution& V, long m, Rng& rng) {
    if (m == 0) return 0.0;
    if (V.kind() == BaseKind::rademacher) {
        std::binomial_distribution<long> heads(m, 0.5);
        return static_cast<double>(2 * heads(rng) - m);
    }
    if (V.kind() == BaseKind::gaussian) {
        std::normal_distribution<double> normal(0.0, 1.0);
        return std::sqrt(static_cast<double>(m)) * normal(rng);
    }
    double total = 0.0;
    for (long j = 0; j < m; ++j) total += sample_signed(V, rng);
    return total;
}

}  // namespace

MomentBudget MomentBudget::global(double p, double A, double B) {
    if (!(p > 1.0)) throw DomainError("MomentBudget: requires p > 1");
    require_positive(A, "A", "MomentBudget");
    require_positive(B, "B", "MomentBudget");
    MomentBudget m;
    m.p_ = p;
    m.global_ = std::make_pair(A, B);
    return m;
}

MomentBudget MomentBudget::per_summand(double p, std::vector<double> a, std::vector<double> b) {
    if (!(p > 2.0)) throw DomainError("MomentBudget: requires p > 2");
    if (a.empty() || a.size() != b.size()) {
        throw DomainError("MomentBudget: a and b must be nonempty lists of equal length");
    }
    for (std::size_t j = 0; j < a.size(); ++j) {
        require_positive(a[j], "a_j", "MomentBudget");
        require_positive(b[j], "b_j", "MomentBudget");
        if (a[j] > b[j]) {
            throw FeasibilityError("MomentBudget: infeasible budget, a_" + std::to_string(j + 1) + " > b_" +
                                   std::to_string(j + 1) + " (need ||X||_2 <= ||X||_p)");
        }
    }
    MomentBudget m;
    m.p_ = p;
    m.a_ = std::move(a);
    m.b_ = std::move(b);
    return m;
}

double MomentBudget::A() const {
    if (!global_) throw DomainError("MomentBudget: no global budget");
    return global_->first;
}

double MomentBudget::B() const {
    if (!global_) throw DomainError("MomentBudget: no global budget");
    return global_->second;
}

MomentBudget MomentBudget::scaled(double t) const {
    require_positive(t, "t", "MomentBudget::scaled");
    MomentBudget m = *this;
    if (m.global_) m.global_ = std::make_pair(t * m.global_->first, t * m.global_->second);
    for (double& x : m.a_) x *= t;
    for (double& x : m.b_) x *= t;
    return m;
}

ConstantResult rosenthal_constant_symmetric(double p, double tol) {
    if (!(p > 2.0)) throw DomainError("rosenthal_constant_symmetric: requires p > 2");
    require_tol(tol, "rosenthal_constant_symmetric");
    const double zp = specfun::gaussian_abs_moment(p);
    const double lower = 1.0 + zp;
    if (p < 4.0) {
        ConstantResult r{lower, "closed_form:gaussian", 4e-16 * lower, {{"gaussian_moment", zp}}};
        return pth_root(r, p);
    }
    const CompoundPoissonSpec spec{1.0, condition_nonzero(BaseDistribution::rademacher())};
    ConstantResult r = cp_abs_moment(spec, p, tol * cp_moment_lower_bound(spec, p));
    r.diagnostics["gaussian_moment"] = zp;
    if (p == 4.0) {
        const double mismatch = std::fabs(lower - r.value) / r.value;
        r.diagnostics["branch_lower"] = lower;
        r.diagnostics["branch_upper"] = r.value;
        r.diagnostics["branch_mismatch"] = mismatch;
        if (mismatch > tol + r.error_bound / r.value) {
            throw BranchMismatchError("rosenthal_constant_symmetric: branches disagree at p = 4 (relative mismatch " +
                                      std::to_string(mismatch) + ")");
        }
    }
    return pth_root(r, p);
}

ConstantResult mixture_sup(double p, const BaseDistribution& V, double A, double B, double tol,
                           const SupOptions& options) {
    if (!(p > 2.0)) throw DomainError("mixture_sup: requires p > 2");
    require_positive(A, "A", "mixture_sup");
    require_positive(B, "B", "mixture_sup");
    require_tol(tol, "mixture_sup");
    const double zp = specfun::gaussian_abs_moment(p);
    const double lower = std::pow(B, p) + zp * std::pow(A, p);
    if (p < 4.0) {
        ConstantResult r{lower, "closed_form:gaussian", 4e-16 * lower, {}};
        r.diagnostics["gaussian_moment"] = zp;
        return r;
    }

    const double v2 = abs_moment(V, 2.0);
    const double vp = abs_moment(V, p);
    const double zero = V.zero_mass();
    const double expo = p / (p - 2.0);
    const double prefactor = std::pow(std::pow(B, p) * v2 / (A * A * vp), expo);
    const double lambda = std::pow(A * std::pow(vp, 1.0 / p) / (B * std::sqrt(v2)), 2.0 * expo) * (1.0 - zero);
    const CompoundPoissonSpec spec{lambda, condition_nonzero(V)};

    ConstantResult cp;
    switch (options.path) {
        case SeriesPath::cumulant: {
            const double rounded = std::round(p);
            if (rounded != p || (p != 4.0 && p != 6.0 && p != 8.0)) {
                throw UnsupportedMethodError("mixture_sup: the cumulant path requires p in {4, 6, 8}");
            }
            cp.value = cp_even_moment_cumulant(spec, static_cast<int>(p));
            cp.error_bound = 1e-14 * cp.value;
            cp.method = "cumulant";
            break;
        }
        case SeriesPath::automatic:
        case SeriesPath::grid:
        case SeriesPath::monte_carlo: {
            CpOptions cp_options;
            cp_options.kfold_options = options.kfold;
            if (options.path == SeriesPath::grid) cp_options.kfold = KfoldMethod::grid;
            if (options.path == SeriesPath::monte_carlo) cp_options.kfold = KfoldMethod::monte_carlo;
            cp = cp_abs_moment(spec, p, tol * cp_moment_lower_bound(spec, p), cp_options);
            break;
        }
    }

    ConstantResult r;
    r.value = prefactor * cp.value;
    r.error_bound = prefactor * cp.error_bound;
    r.method = "compound_poisson:" + cp.method;
    r.diagnostics = cp.diagnostics;
    r.diagnostics["lambda"] = lambda;
    r.diagnostics["prefactor"] = prefactor;
    r.diagnostics["cp_moment"] = cp.value;
    r.diagnostics["cp_error_bound"] = cp.error_bound;
    r.diagnostics["v_norm2_sq"] = v2;
    r.diagnostics["v_normp_p"] = vp;
    r.diagnostics["zero_mass"] = zero;
    if (p == 4.0) {
        const double mismatch = std::fabs(lower - r.value) / r.value;
        r.diagnostics["branch_lower"] = lower;
        r.diagnostics["branch_mismatch"] = mismatch;
        if (mismatch > std::max(tol, 1e-6) + r.error_bound / r.value) {
            throw BranchMismatchError("mixture_sup: branches disagree at p = 4 (relative mismatch " +
                                      std::to_string(mismatch) + ")");
        }
    }
    return r;
}

ConstantResult mixture_constant(double p, const BaseDistribution& V, double tol, const SupOptions& options) {
    return pth_root(mixture_sup(p, V, 1.0, 1.0, tol, options), p);
}

ConstantResult positive_sum_sup(double p, double A, double B, double tol) {
    if (!(p > 1.0)) throw DomainError("positive_sum_sup: requires p > 1");
    require_positive(A, "A", "positive_sum_sup");
    require_positive(B, "B", "positive_sum_sup");
    require_tol(tol, "positive_sum_sup");
    if (p < 2.0) {
        const double value = std::pow(A, p) + std::pow(B, p);
        return {value, "closed_form", 4e-16 * value, {}};
    }
    const double expo = p / (p - 1.0);
    const double lambda = std::pow(A / B, expo);
    const double prefactor = std::pow(std::pow(B, p) / A, expo);
    // E xi^p >= max(lambda^p, P(xi = 1)).
    const double floor = std::max(std::pow(lambda, p), lambda * std::exp(-lambda));
    const ConstantResult m = poisson_moment(lambda, p, tol * floor);
    ConstantResult r;
    r.value = prefactor * m.value;
    r.error_bound = prefactor * m.error_bound;
    r.method = "poisson_series";
    r.diagnostics = m.diagnostics;
    r.diagnostics["lambda"] = lambda;
    r.diagnostics["prefactor"] = prefactor;
    r.diagnostics["poisson_moment"] = m.value;
    return r;
}

ConstantResult complex_constant(double p, double tol, const SupOptions& options) {
    if (!(p > 2.0)) throw DomainError("complex_constant: requires p > 2");
    require_tol(tol, "complex_constant");
    const double beta = specfun::steinhaus_beta(p);
    const double zp = specfun::gaussian_abs_moment(p);
    const double lower = 1.0 + beta * std::pow(2.0, -0.5 * p) * zp;
    if (p < 4.0) {
        ConstantResult r{lower, "closed_form:gaussian", 4e-16 * lower, {}};
        r.diagnostics["beta"] = beta;
        r.diagnostics["gaussian_moment"] = zp;
        return pth_root(r, p);
    }
    const CompoundPoissonSpec spec{1.0, condition_nonzero(BaseDistribution::cosine())};
    ConstantResult cp;
    if (options.path == SeriesPath::cumulant) {
        if (p != 4.0 && p != 6.0 && p != 8.0) {
            throw UnsupportedMethodError("complex_constant: the cumulant path requires p in {4, 6, 8}");
        }
        cp.value = cp_even_moment_cumulant(spec, static_cast<int>(p));
        cp.error_bound = 1e-14 * cp.value;
        cp.method = "cumulant";
    } else {
        CpOptions cp_options;
        cp_options.kfold_options = options.kfold;
        cp_options.kfold = options.path == SeriesPath::monte_carlo ? KfoldMethod::monte_carlo : KfoldMethod::grid;
        cp = cp_abs_moment(spec, p, tol * cp_moment_lower_bound(spec, p), cp_options);
    }
    ConstantResult r;
    r.value = beta * cp.value;
    r.error_bound = beta * cp.error_bound;
    r.method = "compound_poisson:" + cp.method;
    r.diagnostics = cp.diagnostics;
    r.diagnostics["beta"] = beta;
    r.diagnostics["cp_moment"] = cp.value;
    r.diagnostics["lambda"] = 1.0;
    if (p == 4.0) {
        const double mismatch = std::fabs(lower - r.value) / r.value;
        r.diagnostics["branch_lower"] = lower;
        r.diagnostics["branch_mismatch"] = mismatch;
        if (mismatch > std::max(tol, 1e-6) + r.error_bound / r.value) {
            throw BranchMismatchError("complex_constant: branches disagree at p = 4 (relative mismatch " +
                                      std::to_string(mismatch) + ")");
        }
    }
    return pth_root(r, p);
}

ThinnedExtremal utev_3point_sup(const MomentBudget& budget, EnumMode mode, double tol, const EnumOptions& options) {
    return mixture_individual_sup(BaseDistribution::rademacher(), budget, mode, tol, options);
}

ThinnedExtremal mixture_individual_sup(const BaseDistribution& V, const MomentBudget& budget, EnumMode mode,
                                       double tol, const EnumOptions& options) {
    if (budget.is_global()) throw DomainError("mixture_individual_sup: requires per-summand budgets");
    const double p = budget.p();
    if (!(p >= 4.0)) throw DomainError("mixture_individual_sup: requires p >= 4");
    require_tol(tol, "mixture_individual_sup");
    const bool rademacher = V.kind() == BaseKind::rademacher;
    if (rademacher && mode == EnumMode::exact_enum && budget.size() > 12) {
        throw UnsupportedMethodError("utev_3point_sup: exact_enum supports at most 12 summands; use monte_carlo");
    }

    const double v2 = abs_moment(V, 2.0);
    const double vp = abs_moment(V, p);
    ThinnedExtremal out;
    for (std::size_t j = 0; j < budget.size(); ++j) {
        const double a = budget.a()[j];
        const double b = budget.b()[j];
        const double c = std::pow(std::pow(b, p) * v2 / (a * a * vp), 1.0 / (p - 2.0));
        double mu = std::pow(a * std::pow(vp, 1.0 / p) / (b * std::sqrt(v2)), 2.0 * p / (p - 2.0));
        if (mu > 1.0 + 1e-12) {
            throw FeasibilityError("mixture_individual_sup: infeasible budget for summand " + std::to_string(j + 1) +
                                   ", activation probability " + std::to_string(mu) + " > 1");
        }
        mu = std::min(mu, 1.0);
        out.c.push_back(c);
        out.mu.push_back(mu);
    }

    if (mode == EnumMode::monte_carlo) {
        out.result = monte_carlo_thinned(V, out.c, out.mu, p, options);
    } else if (V.kind() == BaseKind::gaussian) {
        out.result = gaussian_thinned_exact(out.c, out.mu, p);
    } else {
        std::vector<SymmetricLaw> laws;
        const SymmetricLaw base = V.law();
        for (std::size_t j = 0; j < out.c.size(); ++j) laws.push_back(base.scaled(out.c[j]).thinned(out.mu[j]));
        out.result = sum_abs_moment_grid(laws, p, tol, options.kfold);
        if (V.is_atomic()) out.result.method = "exact_enum";
    }
    out.result.diagnostics["summands"] = static_cast<double>(out.c.size());
    out.result.diagnostics["v_norm2_sq"] = v2;
    out.result.diagnostics["v_normp_p"] = vp;
    return out;
}

Witness witness_construction(double p, const BaseDistribution& V, double A, double B, long n, double alpha,
                             std::size_t samples, std::uint64_t seed) {
    if (!(p > 2.0 && p < 4.0)) throw DomainError("witness_construction: requires 2 < p < 4");
    require_positive(A, "A", "witness_construction");
    require_positive(B, "B", "witness_construction");
    if (n < 1) throw DomainError("witness_construction: requires n >= 1");
    const double v2 = abs_moment(V, 2.0);
    const double vp = abs_moment(V, p);
    const double alpha_max = A / std::sqrt(v2);
    if (!(alpha > 0.0 && alpha < alpha_max)) {
        throw FeasibilityError("witness_construction: alpha must lie in (0, A/||V||_2) = (0, " +
                               std::to_string(alpha_max) + ")");
    }
    const double dn = static_cast<double>(n);
    const double r2 = A * A / v2 - alpha * alpha;
    const double rp = std::pow(B, p) / vp - std::pow(alpha, p) * std::pow(dn, 1.0 - 0.5 * p);
    if (!(rp > 0.0)) {
        throw FeasibilityError("witness_construction: B^p/||V||_p^p - alpha^p n^(1-p/2) must be positive; increase n");
    }
    Witness w;
    w.p = p;
    w.A = A;
    w.B = B;
    w.n = n;
    w.alpha = alpha;
    w.gamma = std::pow(rp / r2, 1.0 / (p - 2.0));
    w.lambda = std::pow(r2, p / (p - 2.0)) * std::pow(rp, -2.0 / (p - 2.0));
    w.theta_prob = w.lambda / dn;
    if (!(w.theta_prob <= 1.0)) {
        throw FeasibilityError("witness_construction: activation probability lambda/n exceeds 1; increase n");
    }
    w.second_moment_sum = v2 * (alpha * alpha + w.gamma * w.gamma * w.lambda);
    w.pth_moment_sum = vp * (std::pow(alpha, p) * std::pow(dn, 1.0 - 0.5 * p) + std::pow(w.gamma, p) * w.lambda);
    w.theorem_value = std::pow(B, p) + specfun::gaussian_abs_moment(p) * std::pow(A, p);

    // Strata over the number N ~ Bin(n, lambda/n) of active spikes. Beyond
    // stratum K the contribution is bounded via Minkowski:
    // ||Y + gamma S_k||_p <= ||V||_p (alpha sqrt(n) + gamma k).
    const double q = w.theta_prob;
    const double log_q = std::log(q);
    const double log_1mq = std::log1p(-q);
    const double lg_n = specfun::log_gamma(dn + 1.0);
    auto log_pmf = [&](long k) {
        if (q == 1.0) return k == n ? 0.0 : -INFINITY;
        return lg_n - specfun::log_gamma(k + 1.0) - specfun::log_gamma(dn - k + 1.0) + k * log_q + (dn - k) * log_1mq;
    };
    const double norm_vp = std::pow(vp, 1.0 / p);
    std::vector<double> bound_terms(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) {
        bound_terms[static_cast<std::size_t>(k)] =
            std::exp(log_pmf(k) + p * std::log(norm_vp * (alpha * std::sqrt(dn) + w.gamma * k)));
    }
    std::vector<double> suffix(static_cast<std::size_t>(n) + 2, 0.0);
    for (long k = n; k >= 0; --k) {
        suffix[static_cast<std::size_t>(k)] = suffix[static_cast<std::size_t>(k) + 1] + bound_terms[static_cast<std::size_t>(k)];
    }
    long K = 0;
    const long k_cap = std::min<long>(n, 64);
    while (K < k_cap && suffix[static_cast<std::size_t>(K) + 1] > 1e-12 * w.theorem_value) ++K;
    const double tail = suffix[static_cast<std::size_t>(K) + 1];

    // Neyman allocation: a pilot run estimates each stratum's spread, then the
    // budget is split in proportion to P(N = k) * sd_k.
    const double scale1 = alpha / std::sqrt(dn);
    auto draw = [&](long k, Rng& rng) {
        const double x = scale1 * sample_sum(V, n, rng) + w.gamma * sample_sum(V, k, rng);
        return std::pow(std::fabs(x), p);
    };
    constexpr std::size_t kPilot = 2000;
    std::vector<double> weight(static_cast<std::size_t>(K) + 1);
    double weight_total = 0.0;
    for (long k = 0; k <= K; ++k) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(K + 1 + k)));
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t s = 0; s < kPilot; ++s) {
            const double t = draw(k, rng);
            sum += t;
            sum_sq += t * t;
        }
        const double mean = sum / kPilot;
        const double sd = std::sqrt(std::max(0.0, (sum_sq - kPilot * mean * mean) / (kPilot - 1.0)));
        weight[static_cast<std::size_t>(k)] = std::exp(log_pmf(k)) * sd;
        weight_total += weight[static_cast<std::size_t>(k)];
    }

    double estimate = 0.0, variance = 0.0, max_term = 0.0;
    std::size_t used = 0;
    for (long k = 0; k <= K; ++k) {
        const double share = weight_total > 0.0 ? weight[static_cast<std::size_t>(k)] / weight_total
                                                : 1.0 / static_cast<double>(K + 1);
        const std::size_t count = std::max<std::size_t>(kPilot, static_cast<std::size_t>(share * samples));
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t s = 0; s < count; ++s) {
            const double term = draw(k, rng);
            sum += term;
            sum_sq += term * term;
            max_term = std::max(max_term, term);
        }
        used += count;
        const double m = static_cast<double>(count);
        const double mean = sum / m;
        const double var = std::max(0.0, (sum_sq - m * mean * mean) / (m - 1.0));
        const double prob = std::exp(log_pmf(k));
        estimate += prob * mean;
        variance += prob * prob * var / m;
    }
    w.estimate.value = estimate;
    w.estimate.error_bound = 3.0 * std::sqrt(variance) + tail;
    w.estimate.method = "monte_carlo:stratified";
    auto& d = w.estimate.diagnostics;
    d["strata"] = static_cast<double>(K + 1);
    d["mc_samples"] = static_cast<double>(used);
    d["stratum_tail_bound"] = tail;
    d["mc_max_term"] = max_term;
    d["seed"] = static_cast<double>(seed);
    d["theorem_value"] = w.theorem_value;
    if (V.kind() == BaseKind::rademacher || V.kind() == BaseKind::gaussian) {
        // E|sum X_j|^p >= E|block 1|^p + sum over block 2 of E|X_j|^p.
        const ConstantResult clt =
            kfold_abs_moment(condition_nonzero(V), static_cast<int>(n), p, KfoldMethod::exact, 1e-9);
        d["analytic_lower_bound"] =
            std::pow(alpha, p) * clt.value / std::pow(dn, 0.5 * p) + std::pow(w.gamma, p) * w.lambda * vp;
    }
    return w;
}

}  // namespace roskit
