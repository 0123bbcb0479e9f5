#pragma once

// Symmetric laws on the real line and the two numeric representations used to
// convolve them: uniform lattices (continuous parts) and exact atomic supports.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace roskit {

/// A symmetric atom pair: mass/2 at each of +location and -location, or the
/// whole mass at 0 when location == 0.
struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

/// Continuous part of a symmetric law, described on the half-line through its
/// upper tail U(x) = P(X > x) and upper partial mean W(x) = E[X; X > x] of the
/// normalized continuous component (so U(0) = 1/2).
struct ContinuousPart {
    std::function<double(double)> pdf;         // two-sided density at |x|
    std::function<double(double)> upper_tail;  // U(x), x >= 0
    std::function<double(double)> upper_mean;  // W(x), x >= 0
    double support = std::numeric_limits<double>::infinity();
    std::vector<double> breaks;  // kinks and jumps of pdf on (0, support)
};

class SymmetricLaw {
public:
    SymmetricLaw() = default;
    SymmetricLaw(std::optional<ContinuousPart> continuous, double continuous_weight,
                 std::vector<Atom> atoms);

    static SymmetricLaw point_masses(std::vector<Atom> atoms);
    static SymmetricLaw continuous(ContinuousPart part);

    // Named continuous laws.
    static SymmetricLaw uniform(double half_width);
    static SymmetricLaw gaussian(double sd = 1.0);
    static SymmetricLaw arcsine();  // law of cos(2 pi U)
    static SymmetricLaw logistic(double scale = 1.0);

    [[nodiscard]] const std::optional<ContinuousPart>& continuous_part() const { return continuous_; }
    [[nodiscard]] double continuous_weight() const { return weight_; }
    [[nodiscard]] const std::vector<Atom>& atoms() const { return atoms_; }

    /// Law of c X, c > 0.
    [[nodiscard]] SymmetricLaw scaled(double c) const;
    /// Law of theta X with theta ~ Bernoulli(mu) independent of X.
    [[nodiscard]] SymmetricLaw thinned(double mu) const;

    /// E|X|^r; uses the installed closed form when present, else quadrature.
    [[nodiscard]] double abs_moment(double r) const;
    void set_closed_moment(std::function<double(double)> moment) { closed_moment_ = std::move(moment); }

    /// Density of the continuous component (weighted); atoms contribute nothing.
    [[nodiscard]] double density(double x) const;
    /// P(|X| > t).
    [[nodiscard]] double abs_tail(double t) const;
    /// Largest |x| carrying mass (infinity for unbounded laws).
    [[nodiscard]] double support_bound() const;
    /// Smallest L with P(|X| > L) <= mass (bounded laws return their support).
    [[nodiscard]] double truncation_point(double mass) const;

private:
    std::optional<ContinuousPart> continuous_;
    double weight_ = 0.0;
    std::vector<Atom> atoms_;
    std::function<double(double)> closed_moment_;
};

/// Masses on the symmetric lattice {i * step : -half <= i <= half}.
struct Lattice {
    double step = 1.0;
    std::int64_t half = 0;
    std::vector<double> mass;  // size 2 * half + 1, index i + half

    [[nodiscard]] double abs_moment(double p) const;
    [[nodiscard]] double total_mass() const;
    [[nodiscard]] double node(std::int64_t index) const { return static_cast<double>(index - half) * step; }
};

struct LatticeBuild {
    Lattice lattice;
    double truncated_mass = 0.0;  // mass of |X| beyond the lattice range
};

/// Linear-split discretization: each point x of the law sends mass to its two
/// neighbouring nodes with weights making the split mean-preserving. The
/// lattice spans [-extent, extent] rounded outward to whole steps.
LatticeBuild discretize(const SymmetricLaw& law, double step, double extent);

/// Same split applied to a coarser lattice (step doubled); exact for the
/// linear split, so discretize(law, 2h) == coarsen(discretize(law, h)).
Lattice coarsen(const Lattice& fine);

/// Distribution of the sum of two independent lattice variables.
Lattice convolve(const Lattice& a, const Lattice& b);

/// Finite signed support with masses, for exact enumeration of sums.
struct DiscreteLaw {
    std::vector<double> points;  // strictly increasing
    std::vector<double> masses;

    static DiscreteLaw from_atoms(std::span<const Atom> atoms);
    [[nodiscard]] double abs_moment(double p) const;
    [[nodiscard]] std::size_t size() const { return points.size(); }
};

/// Law of the sum of independent variables, merging support points that agree
/// to 12 significant digits.
DiscreteLaw convolve(const DiscreteLaw& a, const DiscreteLaw& b);

}  // namespace roskit
