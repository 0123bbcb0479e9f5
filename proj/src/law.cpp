#include "roskit/law.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <numeric>
#include <utility>

#include "roskit/errors.hpp"
#include "roskit/quadrature.hpp"
#include "roskit/specfun.hpp"

namespace roskit {

namespace {

// FFTW planning and plan destruction are not thread-safe.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

constexpr std::size_t kDirectConvolutionLimit = 200000;

std::vector<double> direct_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

std::vector<double> fft_convolve(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size() + b.size() - 1;
    const std::size_t nc = n / 2 + 1;
    double* in = fftw_alloc_real(n);
    fftw_complex* fa = fftw_alloc_complex(nc);
    fftw_complex* fb = fftw_alloc_complex(nc);
    fftw_plan forward_a, forward_b, backward;
    {
        std::lock_guard lock(fftw_planner_mutex());
        forward_a = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, fa, FFTW_ESTIMATE);
        forward_b = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, fb, FFTW_ESTIMATE);
        backward = fftw_plan_dft_c2r_1d(static_cast<int>(n), fa, in, FFTW_ESTIMATE);
    }
    std::fill(in, in + n, 0.0);
    std::copy(a.begin(), a.end(), in);
    fftw_execute(forward_a);
    std::fill(in, in + n, 0.0);
    std::copy(b.begin(), b.end(), in);
    fftw_execute(forward_b);
    for (std::size_t k = 0; k < nc; ++k) {
        const double re = fa[k][0] * fb[k][0] - fa[k][1] * fb[k][1];
        const double im = fa[k][0] * fb[k][1] + fa[k][1] * fb[k][0];
        fa[k][0] = re;
        fa[k][1] = im;
    }
    fftw_execute(backward);
    std::vector<double> out(in, in + n);
    const double scale = 1.0 / static_cast<double>(n);
    for (double& v : out) v *= scale;
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_a);
        fftw_destroy_plan(forward_b);
        fftw_destroy_plan(backward);
    }
    fftw_free(in);
    fftw_free(fa);
    fftw_free(fb);
    return out;
}

double std_normal_upper(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace

SymmetricLaw::SymmetricLaw(std::optional<ContinuousPart> continuous, double continuous_weight,
                           std::vector<Atom> atoms)
    : continuous_(std::move(continuous)),
      weight_(continuous_ ? continuous_weight : 0.0),
      atoms_(std::move(atoms)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& x, const Atom& y) { return x.location < y.location; });
}

SymmetricLaw SymmetricLaw::point_masses(std::vector<Atom> atoms) {
    return SymmetricLaw(std::nullopt, 0.0, std::move(atoms));
}

SymmetricLaw SymmetricLaw::continuous(ContinuousPart part) {
    return SymmetricLaw(std::move(part), 1.0, {});
}

SymmetricLaw SymmetricLaw::uniform(double w) {
    ContinuousPart part;
    part.pdf = [w](double x) { return std::fabs(x) <= w ? 0.5 / w : 0.0; };
    part.upper_tail = [w](double x) { return x < w ? 0.5 * (w - x) / w : 0.0; };
    part.upper_mean = [w](double x) { return x < w ? 0.25 * (w * w - x * x) / w : 0.0; };
    part.support = w;
    SymmetricLaw law = continuous(std::move(part));
    law.set_closed_moment([w](double r) { return std::pow(w, r) / (r + 1.0); });
    return law;
}

SymmetricLaw SymmetricLaw::gaussian(double sd) {
    ContinuousPart part;
    part.pdf = [sd](double x) { return std_normal_pdf(x / sd) / sd; };
    part.upper_tail = [sd](double x) { return std_normal_upper(x / sd); };
    part.upper_mean = [sd](double x) { return sd * std_normal_pdf(x / sd); };
    SymmetricLaw law = continuous(std::move(part));
    law.set_closed_moment([sd](double r) {
        return std::pow(sd, r) * specfun::gaussian_abs_moment(r);
    });
    return law;
}

SymmetricLaw SymmetricLaw::arcsine() {
    ContinuousPart part;
    part.pdf = [](double x) {
        const double ax = std::fabs(x);
        return ax < 1.0 ? 1.0 / (std::numbers::pi * std::sqrt(1.0 - ax * ax)) : 0.0;
    };
    part.upper_tail = [](double x) { return x < 1.0 ? std::acos(x) / std::numbers::pi : 0.0; };
    part.upper_mean = [](double x) {
        return x < 1.0 ? std::sqrt((1.0 - x) * (1.0 + x)) / std::numbers::pi : 0.0;
    };
    part.support = 1.0;
    SymmetricLaw law = continuous(std::move(part));
    law.set_closed_moment([](double r) { return 1.0 / specfun::steinhaus_beta(r); });
    return law;
}

SymmetricLaw SymmetricLaw::logistic(double s) {
    ContinuousPart part;
    part.pdf = [s](double x) {
        const double e = std::exp(-std::fabs(x) / s);
        return e / (s * (1.0 + e) * (1.0 + e));
    };
    part.upper_tail = [s](double x) {
        const double e = std::exp(-x / s);
        return e / (1.0 + e);
    };
    part.upper_mean = [s](double x) {
        const double e = std::exp(-x / s);
        return x * e / (1.0 + e) + s * std::log1p(e);
    };
    return continuous(std::move(part));
}

SymmetricLaw SymmetricLaw::scaled(double c) const {
    if (!(c > 0.0)) throw DomainError("SymmetricLaw::scaled: requires c > 0");
    std::optional<ContinuousPart> part;
    if (continuous_) {
        ContinuousPart src = *continuous_;
        ContinuousPart out;
        out.pdf = [f = src.pdf, c](double x) { return f(x / c) / c; };
        out.upper_tail = [u = src.upper_tail, c](double x) { return u(x / c); };
        out.upper_mean = [w = src.upper_mean, c](double x) { return c * w(x / c); };
        out.support = src.support * c;
        out.breaks = src.breaks;
        for (double& b : out.breaks) b *= c;
        part = std::move(out);
    }
    std::vector<Atom> atoms = atoms_;
    for (Atom& a : atoms) a.location *= c;
    SymmetricLaw law(std::move(part), weight_, std::move(atoms));
    if (closed_moment_) {
        law.closed_moment_ = [m = closed_moment_, c](double r) { return std::pow(c, r) * m(r); };
    }
    return law;
}

SymmetricLaw SymmetricLaw::thinned(double mu) const {
    if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("SymmetricLaw::thinned: requires mu in [0, 1]");
    std::vector<Atom> atoms = atoms_;
    bool have_zero = false;
    for (Atom& a : atoms) {
        a.mass *= mu;
        if (a.location == 0.0) {
            a.mass += 1.0 - mu;
            have_zero = true;
        }
    }
    if (!have_zero && mu < 1.0) atoms.push_back({0.0, 1.0 - mu});
    SymmetricLaw law(continuous_, weight_ * mu, std::move(atoms));
    if (closed_moment_) {
        law.closed_moment_ = [m = closed_moment_, mu](double r) { return r == 0.0 ? 1.0 : mu * m(r); };
    }
    return law;
}

double SymmetricLaw::abs_moment(double r) const {
    if (closed_moment_) return closed_moment_(r);
    double total = 0.0;
    for (const Atom& a : atoms_) {
        if (r == 0.0) {
            total += a.mass;
        } else if (a.location > 0.0) {
            total += a.mass * std::pow(a.location, r);
        }
    }
    if (continuous_ && weight_ > 0.0) {
        const auto& part = *continuous_;
        auto integrand = [&](double x) { return (r == 0.0 ? 1.0 : std::pow(x, r)) * part.pdf(x); };
        const auto est = quad::integrate_pieces(integrand, 0.0, part.support, part.breaks,
                                                {.abs_tol = 0.0, .rel_tol = 1e-13});
        total += 2.0 * weight_ * est.value;
    }
    return total;
}

double SymmetricLaw::density(double x) const {
    if (!continuous_ || weight_ == 0.0) return 0.0;
    return weight_ * continuous_->pdf(std::fabs(x));
}

double SymmetricLaw::abs_tail(double t) const {
    double tail = 0.0;
    if (continuous_ && weight_ > 0.0 && t < continuous_->support) {
        tail += 2.0 * weight_ * continuous_->upper_tail(std::max(t, 0.0));
    }
    for (const Atom& a : atoms_) {
        if (a.location > t) tail += a.mass;
    }
    return tail;
}

double SymmetricLaw::support_bound() const {
    double bound = 0.0;
    if (continuous_ && weight_ > 0.0) bound = continuous_->support;
    for (const Atom& a : atoms_) {
        if (a.mass > 0.0) bound = std::max(bound, a.location);
    }
    return bound;
}

double SymmetricLaw::truncation_point(double mass) const {
    const double bound = support_bound();
    if (std::isfinite(bound)) return bound;
    double lo = 0.0;
    double hi = 1.0;
    while (abs_tail(hi) > mass) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw GridError("truncation_point: tail does not decay");
    }
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (abs_tail(mid) > mass) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return hi;
}

double Lattice::abs_moment(double p) const {
    double total = 0.0;
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(mass.size()); ++i) {
        const std::int64_t k = i - half;
        if (k == 0) continue;
        total += mass[static_cast<std::size_t>(i)] * std::pow(std::fabs(static_cast<double>(k)) * step, p);
    }
    return total;
}

double Lattice::total_mass() const {
    return std::accumulate(mass.begin(), mass.end(), 0.0);
}

LatticeBuild discretize(const SymmetricLaw& law, double step, double extent) {
    if (!(step > 0.0) || !(extent >= 0.0) || !std::isfinite(extent)) {
        throw GridError("discretize: requires step > 0 and a finite extent");
    }
    const auto cells = static_cast<std::int64_t>(std::ceil(extent / step - 1e-9));
    const std::int64_t half = std::max<std::int64_t>(cells, 1) + 1;
    // Masses on the nodes 0..half for the positive half-line.
    std::vector<double> positive(static_cast<std::size_t>(half) + 1, 0.0);
    double centre = 0.0;
    double truncated = 0.0;

    if (const auto& part = law.continuous_part(); part && law.continuous_weight() > 0.0) {
        const double w = law.continuous_weight();
        const double support = part->support;
        auto tail = [&](double x) { return x >= support ? 0.0 : part->upper_tail(x); };
        auto mean = [&](double x) { return x >= support ? 0.0 : part->upper_mean(x); };
        double u0 = tail(0.0);
        double w0 = mean(0.0);
        for (std::int64_t i = 0; i < half; ++i) {
            const double x0 = static_cast<double>(i) * step;
            if (x0 >= support) break;
            const double x1 = static_cast<double>(i + 1) * step;
            const double u1 = tail(x1);
            const double w1 = mean(x1);
            const double du = u0 - u1;
            const double dw = (w0 - w1) / step;
            const double left = std::max(0.0, static_cast<double>(i + 1) * du - dw);
            const double right = std::max(0.0, dw - static_cast<double>(i) * du);
            positive[static_cast<std::size_t>(i)] += w * left;
            positive[static_cast<std::size_t>(i + 1)] += w * right;
            u0 = u1;
            w0 = w1;
        }
        truncated += 2.0 * w * tail(static_cast<double>(half) * step);
    }
    for (const Atom& a : law.atoms()) {
        if (a.mass == 0.0) continue;
        if (a.location == 0.0) {
            centre += a.mass;
            continue;
        }
        const double t = a.location / step;
        const auto i = static_cast<std::int64_t>(std::floor(t));
        if (i >= half) {
            truncated += a.mass;
            continue;
        }
        const double frac = t - static_cast<double>(i);
        positive[static_cast<std::size_t>(i)] += 0.5 * a.mass * (1.0 - frac);
        positive[static_cast<std::size_t>(i + 1)] += 0.5 * a.mass * frac;
    }

    LatticeBuild out;
    out.truncated_mass = truncated;
    out.lattice.step = step;
    out.lattice.half = half;
    out.lattice.mass.assign(static_cast<std::size_t>(2 * half + 1), 0.0);
    auto& m = out.lattice.mass;
    m[static_cast<std::size_t>(half)] = centre + 2.0 * positive[0];
    for (std::int64_t i = 1; i <= half; ++i) {
        m[static_cast<std::size_t>(half + i)] = positive[static_cast<std::size_t>(i)];
        m[static_cast<std::size_t>(half - i)] = positive[static_cast<std::size_t>(i)];
    }
    return out;
}

Lattice coarsen(const Lattice& fine) {
    Lattice out;
    out.step = 2.0 * fine.step;
    out.half = (fine.half + 1) / 2;
    out.mass.assign(static_cast<std::size_t>(2 * out.half + 1), 0.0);
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(fine.mass.size()); ++i) {
        const std::int64_t k = i - fine.half;
        const double m = fine.mass[static_cast<std::size_t>(i)];
        if (k % 2 == 0) {
            out.mass[static_cast<std::size_t>(k / 2 + out.half)] += m;
        } else {
            const std::int64_t base = (k - 1) / 2;  // floor(k / 2) for odd k
            out.mass[static_cast<std::size_t>(base + out.half)] += 0.5 * m;
            out.mass[static_cast<std::size_t>(base + 1 + out.half)] += 0.5 * m;
        }
    }
    return out;
}

Lattice convolve(const Lattice& a, const Lattice& b) {
    if (std::fabs(a.step - b.step) > 1e-12 * a.step) {
        throw GridError("convolve: lattices must share a common step");
    }
    Lattice out;
    out.step = a.step;
    out.half = a.half + b.half;
    if (a.mass.size() * b.mass.size() <= kDirectConvolutionLimit) {
        out.mass = direct_convolve(a.mass, b.mass);
    } else {
        out.mass = fft_convolve(a.mass, b.mass);
    }
    return out;
}

DiscreteLaw DiscreteLaw::from_atoms(std::span<const Atom> atoms) {
    std::vector<std::pair<double, double>> pts;
    for (const Atom& a : atoms) {
        if (a.mass == 0.0) continue;
        if (a.location == 0.0) {
            pts.emplace_back(0.0, a.mass);
        } else {
            pts.emplace_back(a.location, 0.5 * a.mass);
            pts.emplace_back(-a.location, 0.5 * a.mass);
        }
    }
    if (pts.empty()) pts.emplace_back(0.0, 0.0);
    std::sort(pts.begin(), pts.end());
    DiscreteLaw out;
    for (const auto& [x, m] : pts) {
        if (!out.points.empty() && out.points.back() == x) {
            out.masses.back() += m;
        } else {
            out.points.push_back(x);
            out.masses.push_back(m);
        }
    }
    return out;
}

double DiscreteLaw::abs_moment(double p) const {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i] != 0.0) total += masses[i] * std::pow(std::fabs(points[i]), p);
    }
    return total;
}

DiscreteLaw convolve(const DiscreteLaw& a, const DiscreteLaw& b) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(a.size() * b.size());
    double scale = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double x = a.points[i] + b.points[j];
            pts.emplace_back(x, a.masses[i] * b.masses[j]);
            scale = std::max(scale, std::fabs(a.points[i]) + std::fabs(b.points[j]));
        }
    }
    std::sort(pts.begin(), pts.end());
    DiscreteLaw out;
    const double abs_floor = 1e-12 * scale;
    for (const auto& [x, m] : pts) {
        if (!out.points.empty()) {
            const double rep = out.points.back();
            const double tol = std::max(abs_floor, 1e-12 * std::max(std::fabs(rep), std::fabs(x)));
            if (std::fabs(x - rep) <= tol) {
                out.masses.back() += m;
                continue;
            }
        }
        out.points.push_back(x);
        out.masses.push_back(m);
    }
    // Snap the representative nearest to zero onto zero when merged there.
    for (double& x : out.points) {
        if (std::fabs(x) <= abs_floor) x = 0.0;
    }
    return out;
}

}  // namespace roskit
