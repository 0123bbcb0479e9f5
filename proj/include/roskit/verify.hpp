#pragma once

// Numerical oracles and property checks for the extremal inequalities:
// n-fold convolution moments, randomized search over thinned candidates,
// sign-change counting, convexity and root-signature checks, interlacing and
// Poissonisation comparisons.

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roskit/basedist.hpp"
#include "roskit/law.hpp"
#include "roskit/result.hpp"

namespace roskit {

/// Density sampled on the symmetric grid lower + i * step, i = 0..values.size()-1,
/// read as piecewise linear, plus signed point masses.
struct GridDensity {
    double lower = 0.0;
    double upper = 0.0;
    double step = 1.0;
    std::vector<double> values;
    std::vector<std::pair<double, double>> atom_list;  // (location, mass)

    /// Samples the continuous part of `law` on [-extent, extent]; atoms are
    /// copied as symmetric pairs.
    static GridDensity from_law(const SymmetricLaw& law, double step, double extent);

    /// Trapezoid mass plus atom mass.
    [[nodiscard]] double total_mass() const;
    /// Largest |f(x) - f(-x)| over nodes and unmatched atom mass.
    [[nodiscard]] double asymmetry() const;
    /// Throws GridError unless total mass is 1 within 1e-8 and the density is
    /// symmetric within 1e-10.
    void validate() const;
    /// The piecewise linear density as a symmetric law with exact U, W and moments.
    [[nodiscard]] SymmetricLaw to_law() const;
};

/// E|X_1 + ... + X_n|^p for independent X_j with the given grid densities,
/// by lattice convolution at two resolutions. `tol` is relative.
ConstantResult nfold_moment(std::span<const GridDensity> densities, double p, double tol,
                            const KfoldOptions& options = {});

/// E|U_1 + ... + U_n|^p for independent U_j uniform on [-w_j, w_j], as the
/// n-th central difference of |x|^(p+n) sgn(x)^n / ((p+1)...(p+n)) in long
/// double; error_bound accounts for cancellation across the 2^n terms.
ConstantResult uniform_sum_abs_moment(std::span<const double> half_widths, double p);

/// One candidate of the search: summand j is c[j] theta_j V_j with
/// theta_j ~ Bernoulli(mu[j]).
struct ThinnedConfig {
    std::vector<double> c;
    std::vector<double> mu;

    [[nodiscard]] std::string describe() const;
};

struct SearchReport {
    double p = 0.0;
    std::string V;
    double A = 0.0;
    double B = 0.0;
    double best_value = 0.0;
    double best_error = 0.0;
    ThinnedConfig best_config;
    std::string best_method;
    double theorem_value = 0.0;
    double gap = 0.0;  // theorem_value - best_value
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    /// Trial indices whose moment exceeded theorem_value * (1 + 1e-6).
    std::vector<std::size_t> violations;
    /// Equal-budget i.i.d. candidates with n = 1..n_max summands.
    std::vector<double> iid_values;
    double candidate_tol = 0.0;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

/// Random search over thinned V-candidates with n <= n_max summands whose
/// budget shares are drawn at random and met with equality (activation
/// probabilities clipped at 1). Moments are exact for atomic, uniform and
/// Gaussian V (enumeration over active subsets for the latter two) and grid
/// convolutions (relative accuracy `candidate_tol`) otherwise; trials run in
/// parallel with seeds derive_seed(seed, trial).
SearchReport search_sup_U(double p, const BaseDistribution& V, double A, double B, int n_max,
                          std::size_t trials, std::uint64_t seed, double candidate_tol = 1e-7);

struct ComparisonCheck {
    double left = 0.0;
    double right = 0.0;
    double left_error = 0.0;
    double right_error = 0.0;
    bool ok = false;
};

/// E|X_1 + ... + X_n|^p against E|T_nu|^p with nu = sum_j P(X_j in . \ {0}),
/// both for atomic X_j given by the laws of |X_j|. Requires p >= 3; holds
/// when left <= right + tol (absolute, in addition to both error bounds).
ComparisonCheck check_poissonisation(std::span<const BaseDistribution> tuple, double p, double tol);

struct SignChanges {
    int count = 0;
    /// Midpoints between the grid points bracketing each change.
    std::vector<double> locations;
    /// Sign (+1 or -1) of each run that survives the zero band.
    std::vector<int> signature;
    bool indeterminate = false;
};

/// Sign alternations of a sampled function after dropping samples with
/// |value| <= zero_band. A negative zero_band selects 1e-9 max |value|.
SignChanges count_sign_changes(std::span<const double> x, std::span<const double> values,
                               double zero_band = -1.0);

/// Sign changes of f - g sampled at x.
SignChanges difference_sign_changes(const std::function<double(double)>& f,
                                    const std::function<double(double)>& g, std::span<const double> x,
                                    double zero_band = -1.0);

/// psi_p(x) = |sqrt x + 1|^p + |sqrt x - 1|^p - 2 x^(p/2), evaluated without
/// cancellation for large x.
long double psi(double p, long double x);

struct ConvexityCheck {
    bool ok = false;
    /// Smallest second divided difference, relative to the local value of psi.
    double min_scaled_difference = 0.0;
    std::size_t failures = 0;
};

/// Second divided differences of psi_p are positive on the increasing grid x.
ConvexityCheck check_psi_convexity(double p, std::span<const double> x);

struct HSignature {
    int roots = 0;
    std::vector<int> signature;
    std::vector<double> locations;
    double x_max = 0.0;
    bool ok = false;  // roots <= 3, and signature +,-,+,- when roots == 3
};

/// Sign changes of h(x) = |x+1|^p + |x-1|^p - alpha - beta x^2 - gamma x^p on
/// (0, x_max], with x_max chosen so that the sign of h is settled beyond it.
HSignature check_h_signature(double p, double alpha, double beta, double gamma, std::size_t points = 20000);

/// (alpha, beta, gamma) with h vanishing at the three given points.
std::array<double, 3> h_coefficients_through(double p, double x1, double x2, double x3);

struct DetCheck {
    long double det = 0.0L;
    /// Magnitude of the rounding in det.
    long double rounding = 0.0L;
    bool ok = false;  // det >= -rounding
};

/// det [[1, x1, phi(x1)], [1, x2, phi(x2)], [1, x3, phi(x3)]] for 0 < x1 < x2 < x3.
DetCheck check_det_inequality(const std::function<long double(long double)>& phi, double x1, double x2,
                              double x3);

/// E|X + z|^p by quadrature; error_bound from the quadrature estimate.
ConstantResult shifted_abs_moment(const SymmetricLaw& law, double z, double p);

enum class MemberSide { minus, plus };

/// E|X + z|^p for the source against the matched member: source >= member
/// for the minus side, source <= member for the plus side. Throws
/// InvalidComparisonError when the second or p-th moments differ by more than
/// 1e-6 relative.
ComparisonCheck check_interlacing(const SymmetricLaw& source, const SymmetricLaw& member, MemberSide side,
                                  double z, double p);

struct OrderingCheck {
    ConstantResult lower;   // n copies of the minus member
    ConstantResult source;  // n copies of the source
    ConstantResult upper;   // n copies of the plus member
    double lower_gap = 0.0;  // source - lower
    double upper_gap = 0.0;  // upper - source
    bool ok = false;
    /// Both gaps exceed their combined error bounds.
    bool strict = false;
};

/// n-fold p-th moments of the source and of its matched F- and F+ members.
OrderingCheck check_logconcave_ordering(int n, const SymmetricLaw& source, double p, double tol,
                                        const KfoldOptions& options = {});
/// Same with the matched G- and G+ members.
OrderingCheck check_tail_ordering(int n, const SymmetricLaw& source, double p, double tol,
                                  const KfoldOptions& options = {});

struct EasyBoundCheck {
    double value = 0.0;
    double second_term = 0.0;  // (sum ||X_j||_2^2)^(p/2)
    double pth_term = 0.0;     // sum ||X_j||_p^p
    bool ok = false;
};

/// E|X_1 + ... + X_n|^p by enumeration against max of the two budget terms.
EasyBoundCheck check_easy_lower_bound(std::span<const BaseDistribution> tuple, double p);

// Seeded generators shared by the property tests, the acceptance suite and
// the command line.

/// 1..n_max laws of |X_j|, each with 1 to 3 atoms on multiples of 1/8 in
/// (0, 2] and, half of the time, an atom at 0.
std::vector<BaseDistribution> random_atomic_tuple(Rng& rng, int n_max);

/// (alpha, beta, gamma): with `pinned`, h vanishes at three random points
/// log-uniform in [0.05, 20]; otherwise the coefficients are drawn directly.
std::array<double, 3> random_h_coefficients(Rng& rng, double p, bool pinned);

struct ConvexSample {
    std::string name;
    std::function<long double(long double)> phi;
    bool strict = false;
};

/// Nonnegative combination of convex functions on (0, inf), possibly with an
/// affine part; `strict` marks samples with a strictly convex component.
ConvexSample random_convex_function(Rng& rng);

/// Three increasing points log-uniform in [lo, hi].
std::array<double, 3> random_increasing_triple(Rng& rng, double lo, double hi);

}  // namespace roskit
