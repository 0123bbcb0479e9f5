#pragma once

// Compound Poisson variables T = V_1 + ... + V_xi, xi ~ Poisson(lambda).

#include <optional>
#include <vector>

#include "roskit/basedist.hpp"
#include "roskit/result.hpp"

namespace roskit {

struct CompoundPoissonSpec {
    double lambda = 0.0;
    ConditionedBase jump;
};

struct CpOptions {
    /// Method for E|S_k|^p; defaults to default_kfold_method(jump).
    std::optional<KfoldMethod> kfold;
    KfoldOptions kfold_options;
    /// Hard cap on the number of series terms.
    int max_terms = 4000;
};

/// E|T|^p by the Poisson-weighted series over E|S_k|^p. The series tail is
/// bounded through ||S_k||_p <= k ||V||_p; `tol` is an absolute budget split
/// between that tail and the k-fold moment errors.
ConstantResult cp_abs_moment(const CompoundPoissonSpec& spec, double p, double tol, const CpOptions& options = {});

/// A positive lower bound on E|T|^p (p >= 2), used to turn relative
/// tolerances into absolute ones.
double cp_moment_lower_bound(const CompoundPoissonSpec& spec, double p);

/// E T^p for p in {4, 6, 8} from the cumulants kappa_r = lambda E V^r.
double cp_even_moment_cumulant(const CompoundPoissonSpec& spec, int p);

/// n i.i.d. draws of T.
std::vector<double> cp_sample(const CompoundPoissonSpec& spec, Rng& rng, std::size_t n);

/// E xi^p, xi ~ Poisson(lambda), by series with a certified tail bound.
ConstantResult poisson_moment(double lambda, double p, double tol);

/// Number of Poisson terms K with the certified tail of sum_{k>K} w_k k^p m
/// below tol, where w_k are the Poisson(lambda) weights.
int poisson_truncation(double lambda, double p, double m, double tol, int max_terms, double* tail_bound);

}  // namespace roskit
