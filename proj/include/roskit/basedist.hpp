#pragma once

// The symmetric base law V of a mixture and the moments of its k-fold sums.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "roskit/law.hpp"
#include "roskit/result.hpp"

namespace roskit {

using Rng = std::mt19937_64;

/// Per-task seed derived from a run seed and an index (splitmix64 mix).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

enum class BaseKind { rademacher, uniform, gaussian, cosine, atoms };

/// Symmetric base law. Only the law of |V| is stored; V itself carries an
/// independent fair sign.
class BaseDistribution {
public:
    static BaseDistribution rademacher();
    static BaseDistribution uniform(double half_width);
    static BaseDistribution gaussian();
    /// cos(2 pi U) with U uniform on [0, 1].
    static BaseDistribution cosine();
    /// Finite law of |V|: strictly increasing nonnegative locations, masses
    /// summing to 1. An atom at 0 defines zero_mass().
    static BaseDistribution atoms(std::vector<Atom> atoms);

    /// Parses `rademacher`, `uniform:w=1`, `gaussian`, `cosine`,
    /// `atoms:0:0.5,1:0.5`.
    static BaseDistribution parse(std::string_view text);

    [[nodiscard]] BaseKind kind() const { return kind_; }
    [[nodiscard]] double half_width() const { return half_width_; }
    [[nodiscard]] const std::vector<Atom>& atom_list() const { return atoms_; }
    /// P(V = 0).
    [[nodiscard]] double zero_mass() const;
    /// Inverse of parse().
    [[nodiscard]] std::string spec_string() const;
    /// The law of V as a generic symmetric law.
    [[nodiscard]] SymmetricLaw law() const;
    /// Whether the law is purely atomic (Rademacher or atoms).
    [[nodiscard]] bool is_atomic() const { return kind_ == BaseKind::rademacher || kind_ == BaseKind::atoms; }

    bool operator==(const BaseDistribution&) const;

private:
    BaseDistribution() = default;
    BaseKind kind_ = BaseKind::rademacher;
    double half_width_ = 0.0;
    std::vector<Atom> atoms_;
};

/// V conditioned on {V != 0}.
class ConditionedBase {
public:
    [[nodiscard]] const BaseDistribution& base() const { return base_; }

private:
    explicit ConditionedBase(BaseDistribution base) : base_(std::move(base)) {}
    friend ConditionedBase condition_nonzero(const BaseDistribution& v);
    BaseDistribution base_;
};

/// E|V|^r in closed form.
double abs_moment(const BaseDistribution& v, double r);
inline double abs_moment(const ConditionedBase& v, double r) { return abs_moment(v.base(), r); }

ConditionedBase condition_nonzero(const BaseDistribution& v);

/// n i.i.d. draws of |V|.
std::vector<double> sample_abs(const BaseDistribution& v, Rng& rng, std::size_t n);
/// One draw of V (with its fair sign).
double sample_signed(const BaseDistribution& v, Rng& rng);

enum class KfoldMethod { exact, grid, monte_carlo };

struct KfoldOptions {
    std::size_t mc_samples = 1'000'000;
    std::uint64_t seed = 0;
    /// Upper bound on lattice nodes for one convolution before giving up refining.
    std::size_t max_nodes = std::size_t{1} << 22;
};

/// E|S_k|^p for k = 0..k_max, with per-k error bounds.
struct KfoldTable {
    std::vector<double> values;
    std::vector<double> errors;
    std::string method;
    std::map<std::string, double> diagnostics;
};

/// Exact where available (Rademacher binomial walk, Gaussian scaling), grid
/// otherwise.
KfoldMethod default_kfold_method(const BaseDistribution& v);

/// E|V_1 + ... + V_k|^p. `tol` is a relative accuracy target for the grid
/// method; it is ignored by the exact and Monte Carlo methods.
ConstantResult kfold_abs_moment(const ConditionedBase& v, int k, double p, KfoldMethod method,
                                double tol, const KfoldOptions& options = {});

KfoldTable kfold_abs_moments(const ConditionedBase& v, int k_max, double p, KfoldMethod method,
                             double tol, const KfoldOptions& options = {});

/// Same as kfold_abs_moments for an arbitrary symmetric law, grid method
/// (lattice for continuous parts, exact supports for purely atomic laws).
KfoldTable kfold_abs_moments_grid(const SymmetricLaw& law, int k_max, double p, double tol,
                                  const KfoldOptions& options = {});

/// E|X_1 + ... + X_n|^p for independent symmetric laws. Purely atomic inputs
/// are enumerated exactly; otherwise a common lattice is refined with
/// Richardson extrapolation until the relative error estimate is below tol.
ConstantResult sum_abs_moment_grid(const std::vector<SymmetricLaw>& laws, double p, double tol,
                                   const KfoldOptions& options = {});

std::string to_string(KfoldMethod method);
KfoldMethod parse_kfold_method(std::string_view text);

}  // namespace roskit
