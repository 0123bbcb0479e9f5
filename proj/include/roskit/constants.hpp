#pragma once

// Sharp Rosenthal-type constants and suprema, and the two-block witness for
// the 2 < p < 4 regime.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "roskit/basedist.hpp"
#include "roskit/cpoisson.hpp"
#include "roskit/result.hpp"

namespace roskit {

/// Moment budgets: global (sum ||X_j||_2^2 <= A^2, sum ||X_j||_p^p <= B^p) or
/// per summand (||X_j||_2 <= a_j, ||X_j||_p <= b_j).
class MomentBudget {
public:
    static MomentBudget global(double p, double A, double B);
    static MomentBudget per_summand(double p, std::vector<double> a, std::vector<double> b);

    [[nodiscard]] double p() const { return p_; }
    [[nodiscard]] bool is_global() const { return global_.has_value(); }
    [[nodiscard]] double A() const;
    [[nodiscard]] double B() const;
    [[nodiscard]] const std::vector<double>& a() const { return a_; }
    [[nodiscard]] const std::vector<double>& b() const { return b_; }
    [[nodiscard]] std::size_t size() const { return a_.size(); }
    /// Every budget multiplied by t.
    [[nodiscard]] MomentBudget scaled(double t) const;

private:
    MomentBudget() = default;
    double p_ = 0.0;
    std::optional<std::pair<double, double>> global_;
    std::vector<double> a_, b_;
};

/// How the compound Poisson moment in the p >= 4 branch is evaluated.
enum class SeriesPath { automatic, grid, cumulant, monte_carlo };

struct SupOptions {
    SeriesPath path = SeriesPath::automatic;
    KfoldOptions kfold;
};

/// C_p for symmetric summands.
ConstantResult rosenthal_constant_symmetric(double p, double tol);

/// sup E|X_1 + ... + X_n|^p over V-mixtures under global budgets (A, B).
ConstantResult mixture_sup(double p, const BaseDistribution& V, double A, double B, double tol,
                           const SupOptions& options = {});

/// mixture_sup(p, V, 1, 1)^(1/p).
ConstantResult mixture_constant(double p, const BaseDistribution& V, double tol, const SupOptions& options = {});

/// sup E(X_1 + ... + X_n)^p over nonnegative summands, p > 1.
ConstantResult positive_sum_sup(double p, double A, double B, double tol);

/// Best constant for Steinhaus (uniform on the circle) weighted sums.
ConstantResult complex_constant(double p, double tol, const SupOptions& options = {});

enum class EnumMode { exact_enum, monte_carlo };

struct EnumOptions {
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    KfoldOptions kfold;
};

/// A supremum together with the scales c_j and activation probabilities mu_j
/// of the extremal thinned summands c_j theta_j V_j.
struct ThinnedExtremal {
    ConstantResult result;
    std::vector<double> c;
    std::vector<double> mu;
};

/// Three-point extremal problem under per-summand budgets, p >= 4.
ThinnedExtremal utev_3point_sup(const MomentBudget& budget, EnumMode mode, double tol, const EnumOptions& options = {});

/// Individually constrained V-mixtures, p >= 4.
ThinnedExtremal mixture_individual_sup(const BaseDistribution& V, const MomentBudget& budget, EnumMode mode,
                                       double tol, const EnumOptions& options = {});

/// Two-block near-extremal sequence for 2 < p < 4: n summands (alpha/sqrt n) V_j
/// followed by n summands gamma theta_j V_j, theta_j ~ Bernoulli(lambda/n).
struct Witness {
    double p = 0.0;
    double A = 0.0;
    double B = 0.0;
    long n = 0;
    double alpha = 0.0;
    double gamma = 0.0;
    double lambda = 0.0;
    double theta_prob = 0.0;
    /// sum_j ||X_j||_2^2 and sum_j ||X_j||_p^p from exact bookkeeping.
    double second_moment_sum = 0.0;
    double pth_moment_sum = 0.0;
    double theorem_value = 0.0;
    /// Monte Carlo estimate of E|sum X_j|^p, stratified over the number of
    /// active spikes; error_bound is three standard errors plus the tail.
    ConstantResult estimate;
};

Witness witness_construction(double p, const BaseDistribution& V, double A, double B, long n, double alpha,
                             std::size_t samples = 1'000'000, std::uint64_t seed = 0);

}  // namespace roskit
