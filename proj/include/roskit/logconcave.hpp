#pragma once

// Two-parameter extremal families of symmetric log-concave laws and the
// solvers matching them to a prescribed second and p-th moment.
//
//   F-  f(x) ~ exp(-gamma (|x| - alpha)_+)          plateau, exponential tail
//   F+  g(x) ~ exp(-gamma |x|) on [-alpha, alpha]    truncated exponential
//   G-  P(|X| > t) = exp(-a (t - b)_+)               shifted exponential tail
//   G+  P(|X| > t) = exp(-a t) for t < b, 0 after    capped exponential tail
//
// Infinite parameters are stored as std::nullopt and evaluated through the
// closed forms of the corresponding limit law.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roskit/basedist.hpp"
#include "roskit/law.hpp"

namespace roskit {

enum class LimitForm { interior, uniform, exponential, two_point };
std::string to_string(LimitForm form);

struct PlateauExpDensity {
    double alpha = 0.0;
    std::optional<double> gamma;  // nullopt: gamma = +inf (uniform on [-alpha, alpha])

    static PlateauExpDensity make(double alpha, std::optional<double> gamma);
    [[nodiscard]] LimitForm form() const;
};

struct TruncatedExpDensity {
    std::optional<double> alpha;  // nullopt: alpha = +inf (two-sided exponential)
    double gamma = 0.0;           // 0: uniform on [-alpha, alpha]

    static TruncatedExpDensity make(std::optional<double> alpha, double gamma);
    [[nodiscard]] LimitForm form() const;
};

struct TailLawMinus {
    std::optional<double> a;  // nullopt: a = +inf (two-point law at +-b)
    double b = 0.0;

    static TailLawMinus make(std::optional<double> a, double b);
    [[nodiscard]] LimitForm form() const;
};

struct TailLawPlus {
    double a = 0.0;              // 0: two-point law at +-b
    std::optional<double> b;     // nullopt: b = +inf (exponential tail)

    static TailLawPlus make(double a, std::optional<double> b);
    [[nodiscard]] LimitForm form() const;
};

/// EX^2 = a^2 and E|X|^p = b^p.
struct MatchTarget {
    double p = 0.0;
    double a = 0.0;
    double b = 0.0;
};

/// Admissible ratios b/a for symmetric log-concave densities:
/// [sqrt(3) (p+1)^(-1/p), Gamma(p+1)^(1/p) / sqrt(2)].
std::pair<double, double> feasibility_interval_density(double p);
/// Admissible ratios for laws with log-concave tails: [1, Gamma(p+1)^(1/p) / sqrt(2)].
std::pair<double, double> feasibility_interval_tail(double p);

double density_abs_moment(const PlateauExpDensity& f, double r);
double density_abs_moment(const TruncatedExpDensity& f, double r);
double tail_abs_moment(const TailLawMinus& law, double r);
double tail_abs_moment(const TailLawPlus& law, double r);

/// Ratio of the p-th moment root to the second moment root along each
/// family's one-parameter curve (scale removed): rho = alpha gamma for F-,
/// kappa = alpha gamma for F+, sigma = a b for G-, tau = a b for G+.
double fminus_ratio(double rho, double p);
double fplus_ratio(double kappa, double p);
double gminus_ratio(double sigma, double p);
double gplus_ratio(double tau, double p);

PlateauExpDensity match_density_minus(const MatchTarget& target);
TruncatedExpDensity match_density_plus(const MatchTarget& target);
TailLawMinus match_tail_minus(const MatchTarget& target);
TailLawPlus match_tail_plus(const MatchTarget& target);

double density_eval(const PlateauExpDensity& f, double x);
double density_eval(const TruncatedExpDensity& f, double x);
/// P(|X| > t).
double tail_eval(const TailLawMinus& law, double t);
double tail_eval(const TailLawPlus& law, double t);

std::vector<double> sample(const PlateauExpDensity& f, Rng& rng, std::size_t n);
std::vector<double> sample(const TruncatedExpDensity& f, Rng& rng, std::size_t n);
std::vector<double> sample(const TailLawMinus& law, Rng& rng, std::size_t n);
std::vector<double> sample(const TailLawPlus& law, Rng& rng, std::size_t n);

/// The members as generic symmetric laws (closed-form moments installed).
SymmetricLaw to_law(const PlateauExpDensity& f);
SymmetricLaw to_law(const TruncatedExpDensity& f);
SymmetricLaw to_law(const TailLawMinus& law);
SymmetricLaw to_law(const TailLawPlus& law);

}  // namespace roskit
