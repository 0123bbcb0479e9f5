#include "roskit/logconcave.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "roskit/errors.hpp"
#include "roskit/quadrature.hpp"
#include "roskit/specfun.hpp"

namespace roskit {

namespace {

constexpr double kBoundaryRel = 1e-12;
constexpr double kLogParamLo = -27.631021115928547;  // ln 1e-12
constexpr double kLogParamHi = 27.631021115928547;   // ln 1e12

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }

// ln J_r(rho), J_r(rho) = int_0^inf (rho + t)^r e^{-t} dt.
double log_j(double r, double rho) {
    if (rho == 0.0) return specfun::log_gamma(r + 1.0);
    return specfun::log_scaled_upper_inc_gamma(r + 1.0, rho);
}

// F-: E|X|^r = gamma^{-r} M_r(rho), M_r = (rho^{r+1}/(r+1) + J_r(rho)) / (rho + 1).
double log_m_minus(double r, double rho) {
    if (rho == 0.0) return specfun::log_gamma(r + 1.0);
    return specfun::log_add_exp((r + 1.0) * std::log(rho) - std::log(r + 1.0), log_j(r, rho)) - std::log1p(rho);
}

// F+: E|X|^r = gamma^{-r} N_r(kappa), N_r = gamma_inc(r+1, kappa) / (1 - e^{-kappa}).
double log_n_plus(double r, double kappa) {
    return specfun::log_lower_inc_gamma(r + 1.0, kappa) - std::log(-std::expm1(-kappa));
}

// G+: E|X|^r = a^{-r} Q_r(tau), Q_r = r gamma_inc(r, tau).
double log_q_plus(double r, double tau) {
    return std::log(r) + specfun::log_lower_inc_gamma(r, tau);
}

double ratio_from_logs(double log_mp, double log_m2, double p) {
    return std::exp((log_mp - 0.5 * p * log_m2) / p);
}

void check_target(const MatchTarget& t, const char* who) {
    if (!(t.p > 2.0) || !std::isfinite(t.p)) throw DomainError(std::string(who) + ": requires p > 2");
    if (!positive_finite(t.a) || !positive_finite(t.b)) {
        throw DomainError(std::string(who) + ": moment roots a and b must be positive");
    }
}

enum class Edge { low, high, inside };

// Classifies the target ratio against [lo, hi]; outside (beyond the boundary
// tolerance) is infeasible.
Edge classify(double ratio, std::pair<double, double> interval, const char* who) {
    const auto [lo, hi] = interval;
    if (std::fabs(ratio / lo - 1.0) <= kBoundaryRel) return Edge::low;
    if (std::fabs(ratio / hi - 1.0) <= kBoundaryRel) return Edge::high;
    if (ratio < lo || ratio > hi) {
        throw FeasibilityError(std::string(who) + ": infeasible ratio b/a = " + std::to_string(ratio) +
                               ", must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return Edge::inside;
}

// Solves ratio_fn(exp(s)) = target over s in [ln 1e-12, ln 1e12] by bisection
// on the sign of the monotone difference. Targets beyond the bracket values
// (within the boundary tolerance of a limit law) return the bracket end.
template <class F>
double solve_log_param(const F& ratio_fn, double target) {
    auto g = [&](double s) { return std::log(ratio_fn(std::exp(s))) - std::log(target); };
    const double glo = g(kLogParamLo);
    const double ghi = g(kLogParamHi);
    if ((glo < 0.0) == (ghi < 0.0)) {
        return std::fabs(glo) < std::fabs(ghi) ? std::exp(kLogParamLo) : std::exp(kLogParamHi);
    }
    return std::exp(quad::bisect(g, kLogParamLo, kLogParamHi, 200));
}

double unit_draw(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

double with_sign(double magnitude, Rng& rng) { return (rng() & 1ULL) ? magnitude : -magnitude; }

// e^y - 1 - y without cancellation for small y.
double expm1_minus_x(double y) {
    if (std::fabs(y) < 1e-2) {
        return y * y * (0.5 + y * (1.0 / 6.0 + y * (1.0 / 24.0 + y * (1.0 / 120.0 + y / 720.0))));
    }
    return std::expm1(y) - y;
}

}  // namespace

std::string to_string(LimitForm form) {
    switch (form) {
        case LimitForm::interior: return "interior";
        case LimitForm::uniform: return "uniform";
        case LimitForm::exponential: return "exponential";
        case LimitForm::two_point: return "two_point";
    }
    return "unknown";
}

PlateauExpDensity PlateauExpDensity::make(double alpha, std::optional<double> gamma) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("F- member: alpha must be finite and >= 0");
    if (gamma && !positive_finite(*gamma)) throw DomainError("F- member: gamma must be positive");
    if (!gamma && alpha == 0.0) throw DomainError("F- member: the uniform limit requires alpha > 0");
    return {alpha, gamma};
}

LimitForm PlateauExpDensity::form() const {
    if (!gamma) return LimitForm::uniform;
    return alpha == 0.0 ? LimitForm::exponential : LimitForm::interior;
}

TruncatedExpDensity TruncatedExpDensity::make(std::optional<double> alpha, double gamma) {
    if (alpha && !positive_finite(*alpha)) throw DomainError("F+ member: alpha must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw DomainError("F+ member: gamma must be finite and >= 0");
    if (!alpha && gamma == 0.0) throw DomainError("F+ member: the exponential limit requires gamma > 0");
    return {alpha, gamma};
}

LimitForm TruncatedExpDensity::form() const {
    if (!alpha) return LimitForm::exponential;
    return gamma == 0.0 ? LimitForm::uniform : LimitForm::interior;
}

TailLawMinus TailLawMinus::make(std::optional<double> a, double b) {
    if (a && !positive_finite(*a)) throw DomainError("G- member: a must be positive");
    if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("G- member: b must be finite and >= 0");
    if (!a && b == 0.0) throw DomainError("G- member: the two-point limit requires b > 0");
    return {a, b};
}

LimitForm TailLawMinus::form() const {
    if (!a) return LimitForm::two_point;
    return b == 0.0 ? LimitForm::exponential : LimitForm::interior;
}

TailLawPlus TailLawPlus::make(double a, std::optional<double> b) {
    if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("G+ member: a must be finite and >= 0");
    if (b && !positive_finite(*b)) throw DomainError("G+ member: b must be positive");
    if (!b && a == 0.0) throw DomainError("G+ member: the exponential limit requires a > 0");
    return {a, b};
}

LimitForm TailLawPlus::form() const {
    if (!b) return LimitForm::exponential;
    return a == 0.0 ? LimitForm::two_point : LimitForm::interior;
}

std::pair<double, double> feasibility_interval_density(double p) {
    if (!(p > 2.0)) throw DomainError("feasibility_interval_density: requires p > 2");
    return {std::sqrt(3.0) * std::pow(p + 1.0, -1.0 / p),
            std::exp(specfun::log_gamma(p + 1.0) / p) / std::numbers::sqrt2};
}

std::pair<double, double> feasibility_interval_tail(double p) {
    if (!(p > 2.0)) throw DomainError("feasibility_interval_tail: requires p > 2");
    return {1.0, std::exp(specfun::log_gamma(p + 1.0) / p) / std::numbers::sqrt2};
}

double density_abs_moment(const PlateauExpDensity& f, double r) {
    if (!(r > 0.0)) throw DomainError("density_abs_moment: requires r > 0");
    switch (f.form()) {
        case LimitForm::uniform: return std::pow(f.alpha, r) / (r + 1.0);
        case LimitForm::exponential: return std::exp(specfun::log_gamma(r + 1.0) - r * std::log(*f.gamma));
        default: return std::exp(log_m_minus(r, f.alpha * *f.gamma) - r * std::log(*f.gamma));
    }
}

double density_abs_moment(const TruncatedExpDensity& f, double r) {
    if (!(r > 0.0)) throw DomainError("density_abs_moment: requires r > 0");
    switch (f.form()) {
        case LimitForm::uniform: return std::pow(*f.alpha, r) / (r + 1.0);
        case LimitForm::exponential: return std::exp(specfun::log_gamma(r + 1.0) - r * std::log(f.gamma));
        default: return std::exp(log_n_plus(r, *f.alpha * f.gamma) - r * std::log(f.gamma));
    }
}

double tail_abs_moment(const TailLawMinus& law, double r) {
    if (!(r > 0.0)) throw DomainError("tail_abs_moment: requires r > 0");
    if (law.form() == LimitForm::two_point) return std::pow(law.b, r);
    return std::exp(log_j(r, *law.a * law.b) - r * std::log(*law.a));
}

double tail_abs_moment(const TailLawPlus& law, double r) {
    if (!(r > 0.0)) throw DomainError("tail_abs_moment: requires r > 0");
    switch (law.form()) {
        case LimitForm::two_point: return std::pow(*law.b, r);
        case LimitForm::exponential: return std::exp(specfun::log_gamma(r + 1.0) - r * std::log(law.a));
        default: return std::exp(log_q_plus(r, law.a * *law.b) - r * std::log(law.a));
    }
}

double fminus_ratio(double rho, double p) { return ratio_from_logs(log_m_minus(p, rho), log_m_minus(2.0, rho), p); }
double fplus_ratio(double kappa, double p) { return ratio_from_logs(log_n_plus(p, kappa), log_n_plus(2.0, kappa), p); }
double gminus_ratio(double sigma, double p) { return ratio_from_logs(log_j(p, sigma), log_j(2.0, sigma), p); }
double gplus_ratio(double tau, double p) { return ratio_from_logs(log_q_plus(p, tau), log_q_plus(2.0, tau), p); }

PlateauExpDensity match_density_minus(const MatchTarget& t) {
    check_target(t, "match_density_minus");
    const double ratio = t.b / t.a;
    switch (classify(ratio, feasibility_interval_density(t.p), "match_density_minus")) {
        case Edge::low: return PlateauExpDensity::make(std::sqrt(3.0) * t.a, std::nullopt);
        case Edge::high: return PlateauExpDensity::make(0.0, std::numbers::sqrt2 / t.a);
        case Edge::inside: break;
    }
    const double rho = solve_log_param([&](double x) { return fminus_ratio(x, t.p); }, ratio);
    const double gamma = std::exp(0.5 * log_m_minus(2.0, rho)) / t.a;
    return PlateauExpDensity::make(rho / gamma, gamma);
}

TruncatedExpDensity match_density_plus(const MatchTarget& t) {
    check_target(t, "match_density_plus");
    const double ratio = t.b / t.a;
    switch (classify(ratio, feasibility_interval_density(t.p), "match_density_plus")) {
        case Edge::low: return TruncatedExpDensity::make(std::sqrt(3.0) * t.a, 0.0);
        case Edge::high: return TruncatedExpDensity::make(std::nullopt, std::numbers::sqrt2 / t.a);
        case Edge::inside: break;
    }
    const double kappa = solve_log_param([&](double x) { return fplus_ratio(x, t.p); }, ratio);
    const double gamma = std::exp(0.5 * log_n_plus(2.0, kappa)) / t.a;
    return TruncatedExpDensity::make(kappa / gamma, gamma);
}

TailLawMinus match_tail_minus(const MatchTarget& t) {
    check_target(t, "match_tail_minus");
    const double ratio = t.b / t.a;
    switch (classify(ratio, feasibility_interval_tail(t.p), "match_tail_minus")) {
        case Edge::low: return TailLawMinus::make(std::nullopt, t.a);
        case Edge::high: return TailLawMinus::make(std::numbers::sqrt2 / t.a, 0.0);
        case Edge::inside: break;
    }
    const double sigma = solve_log_param([&](double x) { return gminus_ratio(x, t.p); }, ratio);
    const double a = std::exp(0.5 * log_j(2.0, sigma)) / t.a;
    return TailLawMinus::make(a, sigma / a);
}

TailLawPlus match_tail_plus(const MatchTarget& t) {
    check_target(t, "match_tail_plus");
    const double ratio = t.b / t.a;
    switch (classify(ratio, feasibility_interval_tail(t.p), "match_tail_plus")) {
        case Edge::low: return TailLawPlus::make(0.0, t.a);
        case Edge::high: return TailLawPlus::make(std::numbers::sqrt2 / t.a, std::nullopt);
        case Edge::inside: break;
    }
    const double tau = solve_log_param([&](double x) { return gplus_ratio(x, t.p); }, ratio);
    const double a = std::exp(0.5 * log_q_plus(2.0, tau)) / t.a;
    return TailLawPlus::make(a, tau / a);
}

double density_eval(const PlateauExpDensity& f, double x) {
    const double ax = std::fabs(x);
    if (f.form() == LimitForm::uniform) return ax <= f.alpha ? 0.5 / f.alpha : 0.0;
    const double g = *f.gamma;
    const double c = 0.5 / (f.alpha + 1.0 / g);
    return ax <= f.alpha ? c : c * std::exp(-g * (ax - f.alpha));
}

double density_eval(const TruncatedExpDensity& f, double x) {
    const double ax = std::fabs(x);
    switch (f.form()) {
        case LimitForm::uniform: return ax <= *f.alpha ? 0.5 / *f.alpha : 0.0;
        case LimitForm::exponential: return 0.5 * f.gamma * std::exp(-f.gamma * ax);
        default:
            if (ax > *f.alpha) return 0.0;
            return f.gamma / (-2.0 * std::expm1(-*f.alpha * f.gamma)) * std::exp(-f.gamma * ax);
    }
}

double tail_eval(const TailLawMinus& law, double t) {
    if (t < law.b) return 1.0;
    if (law.form() == LimitForm::two_point) return 0.0;
    return std::exp(-*law.a * (t - law.b));
}

double tail_eval(const TailLawPlus& law, double t) {
    if (t < 0.0) return 1.0;
    if (law.b && t >= *law.b) return 0.0;
    return std::exp(-law.a * t);
}

std::vector<double> sample(const PlateauExpDensity& f, Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) {
        const double u = unit_draw(rng);
        double m;
        if (f.form() == LimitForm::uniform) {
            m = u * f.alpha;
        } else {
            const double g = *f.gamma;
            const double plateau = f.alpha / (f.alpha + 1.0 / g);  // P(|X| <= alpha)
            m = u < plateau ? u * (f.alpha + 1.0 / g) : f.alpha - std::log((1.0 - u) / (1.0 - plateau)) / g;
        }
        x = with_sign(m, rng);
    }
    return out;
}

std::vector<double> sample(const TruncatedExpDensity& f, Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) {
        const double u = unit_draw(rng);
        double m;
        switch (f.form()) {
            case LimitForm::uniform: m = u * *f.alpha; break;
            case LimitForm::exponential: m = -std::log1p(-u) / f.gamma; break;
            default: m = -std::log1p(u * std::expm1(-*f.alpha * f.gamma)) / f.gamma; break;
        }
        x = with_sign(m, rng);
    }
    return out;
}

std::vector<double> sample(const TailLawMinus& law, Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) {
        const double u = unit_draw(rng);
        const double m = law.form() == LimitForm::two_point ? law.b : law.b - std::log1p(-u) / *law.a;
        x = with_sign(m, rng);
    }
    return out;
}

std::vector<double> sample(const TailLawPlus& law, Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (double& x : out) {
        const double u = unit_draw(rng);
        double m;
        if (law.form() == LimitForm::two_point) {
            m = *law.b;
        } else {
            m = -std::log1p(-u) / law.a;
            if (law.b) m = std::min(m, *law.b);
        }
        x = with_sign(m, rng);
    }
    return out;
}

SymmetricLaw to_law(const PlateauExpDensity& f) {
    if (f.form() == LimitForm::uniform) return SymmetricLaw::uniform(f.alpha);
    const double al = f.alpha;
    const double g = *f.gamma;
    const double c = 0.5 / (al + 1.0 / g);
    ContinuousPart part;
    part.pdf = [f](double x) { return density_eval(f, x); };
    part.upper_tail = [=](double x) {
        return x < al ? c * (al - x) + c / g : (c / g) * std::exp(-g * (x - al));
    };
    part.upper_mean = [=](double x) {
        return x < al ? 0.5 * c * (al * al - x * x) + c * (al / g + 1.0 / (g * g))
                      : c * std::exp(-g * (x - al)) * (x / g + 1.0 / (g * g));
    };
    if (al > 0.0) part.breaks = {al};
    SymmetricLaw law = SymmetricLaw::continuous(std::move(part));
    law.set_closed_moment([f](double r) { return r == 0.0 ? 1.0 : density_abs_moment(f, r); });
    return law;
}

SymmetricLaw to_law(const TruncatedExpDensity& f) {
    if (f.form() == LimitForm::uniform) return SymmetricLaw::uniform(*f.alpha);
    const double g = f.gamma;
    ContinuousPart part;
    part.pdf = [f](double x) { return density_eval(f, x); };
    if (f.form() == LimitForm::exponential) {
        part.upper_tail = [=](double x) { return 0.5 * std::exp(-g * x); };
        part.upper_mean = [=](double x) { return 0.5 * std::exp(-g * x) * (x + 1.0 / g); };
    } else {
        const double al = *f.alpha;
        const double c = g / (-2.0 * std::expm1(-al * g));
        // U(x) = (c/g) e^{-g al} (e^{g d} - 1), W(x) = x U(x) + int_x^al U,
        // with d = al - x.
        part.upper_tail = [=](double x) {
            if (x >= al) return 0.0;
            return (c / g) * std::exp(-g * al) * std::expm1(g * (al - x));
        };
        part.upper_mean = [=](double x) {
            if (x >= al) return 0.0;
            const double d = al - x;
            const double u = (c / g) * std::exp(-g * al) * std::expm1(g * d);
            return x * u + (c / (g * g)) * std::exp(-g * al) * expm1_minus_x(g * d);
        };
        part.support = al;
    }
    SymmetricLaw law = SymmetricLaw::continuous(std::move(part));
    law.set_closed_moment([f](double r) { return r == 0.0 ? 1.0 : density_abs_moment(f, r); });
    return law;
}

SymmetricLaw to_law(const TailLawMinus& t) {
    if (t.form() == LimitForm::two_point) return SymmetricLaw::point_masses({{t.b, 1.0}});
    const double a = *t.a;
    const double b = t.b;
    ContinuousPart part;
    part.pdf = [=](double x) { return std::fabs(x) < b ? 0.0 : 0.5 * a * std::exp(-a * (std::fabs(x) - b)); };
    part.upper_tail = [=](double x) { return x < b ? 0.5 : 0.5 * std::exp(-a * (x - b)); };
    part.upper_mean = [=](double x) {
        return x < b ? 0.5 * (b + 1.0 / a) : 0.5 * std::exp(-a * (x - b)) * (x + 1.0 / a);
    };
    if (b > 0.0) part.breaks = {b};
    SymmetricLaw law = SymmetricLaw::continuous(std::move(part));
    law.set_closed_moment([t](double r) { return r == 0.0 ? 1.0 : tail_abs_moment(t, r); });
    return law;
}

SymmetricLaw to_law(const TailLawPlus& t) {
    if (t.form() == LimitForm::two_point) return SymmetricLaw::point_masses({{*t.b, 1.0}});
    const double a = t.a;
    ContinuousPart part;
    SymmetricLaw law;
    if (t.form() == LimitForm::exponential) {
        part.pdf = [=](double x) { return 0.5 * a * std::exp(-a * std::fabs(x)); };
        part.upper_tail = [=](double x) { return 0.5 * std::exp(-a * x); };
        part.upper_mean = [=](double x) { return 0.5 * std::exp(-a * x) * (x + 1.0 / a); };
        law = SymmetricLaw::continuous(std::move(part));
    } else {
        const double b = *t.b;
        const double atom = std::exp(-a * b);
        const double norm = -std::expm1(-a * b);  // continuous weight
        part.pdf = [=](double x) {
            return std::fabs(x) < b ? 0.5 * a * std::exp(-a * std::fabs(x)) / norm : 0.0;
        };
        part.upper_tail = [=](double x) {
            return x >= b ? 0.0 : 0.5 * std::exp(-a * b) * std::expm1(a * (b - x)) / norm;
        };
        part.upper_mean = [=](double x) {
            if (x >= b) return 0.0;
            const double d = b - x;
            const double u = 0.5 * std::exp(-a * b) * std::expm1(a * d) / norm;
            return x * u + 0.5 * std::exp(-a * b) * expm1_minus_x(a * d) / (a * norm);
        };
        part.support = b;
        law = SymmetricLaw(std::move(part), norm, {{b, atom}});
    }
    law.set_closed_moment([t](double r) { return r == 0.0 ? 1.0 : tail_abs_moment(t, r); });
    return law;
}

}  // namespace roskit
