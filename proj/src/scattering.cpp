#include "entropix/scattering.hpp"
#include "entropix/errors.hpp"

#include <algorithm>
#include <cmath>

namespace entropix::scattering {

namespace {

using Mobius = Eigen::Matrix2cd;

// one continued-fraction step w -> 1/((lambda - z) - J^2 w)
Mobius step_matrix(double J, double lambda, Complex z) {
    Mobius a;
    a << 0.0, 1.0, -J * J, lambda - z;
    return a;
}

struct TailFixedPoint {
    Mobius t;
    double det; // prod J^2 over the period
};

// composite over one period; `site_of(i)` yields the i-th site along the
// recursion direction starting from the first pure-tail site
template <typename SiteOf>
TailFixedPoint tail_composite(const TailModel& tail, Complex z, bool left, SiteOf site_of) {
    TailFixedPoint fp;
    fp.t.setIdentity();
    fp.det = 1.0;
    for (int i = 0; i < tail.period(); ++i) {
        const long long x = site_of(i);
        const double J = left ? tail.J_at(x - 1) : tail.J_at(x);
        fp.t = fp.t * step_matrix(J, tail.lambda_at(x), z);
        fp.det *= J * J;
    }
    return fp;
}

Complex solve_fixed_point(const TailFixedPoint& fp, Complex z) {
    const Complex a = fp.t(0, 0), b = fp.t(0, 1), c = fp.t(1, 0), d = fp.t(1, 1);
    const double scale = fp.t.cwiseAbs().maxCoeff();
    if (std::abs(c) <= 1e-14 * scale) {
        if (std::abs(d - a) <= 1e-14 * scale) {
            throw NumericError("tail m-function: degenerate Moebius fixed point");
        }
        return b / (d - a);
    }
    const Complex disc = (d - a) * (d - a) + 4.0 * b * c;
    Complex sq = std::sqrt(disc);
    const Complex r1 = ((a - d) + sq) / (2.0 * c);
    const Complex r2 = ((a - d) - sq) / (2.0 * c);
    if (z.imag() > 1e-14) {
        return r1.imag() >= r2.imag() ? r1 : r2; // Herglotz branch
    }
    // boundary value: inside a band the roots form a conjugate pair
    if (std::abs(disc.imag()) > 1e-13 * std::abs(disc) || disc.real() < 0.0) {
        return r1.imag() >= r2.imag() ? r1 : r2;
    }
    // off the bands both roots are real; the Weyl solution is the attracting
    // fixed point, |c m + d|^2 > det T
    return std::abs(c * r1 + d) >= std::abs(c * r2 + d) ? r1 : r2;
}

// m-function of the pure constant tail (J, lambda):
//   m = ((lambda - z) + xi) / (2 J^2),  xi^2 = (lambda - z)^2 - 4 J^2,
// branch with Im xi >= 0 on the upper lip.
Complex constant_tail_m(double J, double lambda, Complex z) {
    const Complex w = (lambda - z) * (lambda - z) - 4.0 * J * J;
    Complex xi;
    if (z.imag() > 1e-14) {
        xi = std::sqrt(w);
        if (xi.imag() < 0) xi = -xi;
    } else {
        const double d = w.real();
        if (d < 0) {
            xi = Complex(0.0, std::sqrt(-d));
        } else {
            const double sign = (lambda - z.real()) >= 0 ? -1.0 : 1.0;
            xi = Complex(sign * std::sqrt(d), 0.0);
        }
    }
    return ((lambda - z) + xi) / (2.0 * J * J);
}

Complex tail_m(Side side, const TailModel& tail, long long first_site, Complex z) {
    if (tail.kind == TailModel::Kind::Constant) {
        return constant_tail_m(tail.J[0], tail.lambda[0], z);
    }
    const bool left = side == Side::Left;
    const auto site_of = [&](int i) {
        return left ? first_site - i : first_site + i;
    };
    return solve_fixed_point(tail_composite(tail, z, left, site_of), z);
}

Complex continued_fraction_step(Complex m_next, double J, double lambda, Complex z) {
    Complex den = (lambda - z) - J * J * m_next;
    if (std::abs(den) < 1e-300) den = Complex(1e-300, 0.0);
    return 1.0 / den;
}

Complex weyl_m_impl(Side side, Complex z, const ChainSpec& spec) {
    spec.validate();
    if (z.imag() < -1e-15) {
        throw ConfigError("weyl_m: z must lie in the closed upper half plane");
    }
    if (side == Side::Right) {
        const int first_explicit = std::max(1, spec.has_window() ? spec.window_max() + 1 : 1);
        Complex m = tail_m(side, spec.right_tail, first_explicit, z);
        for (int x = first_explicit - 1; x >= 1; --x) {
            m = continued_fraction_step(m, spec.J(x), spec.lambda(x), z);
        }
        return m;
    }
    const int last_explicit = std::min(0, spec.has_window() ? spec.window_min() - 1 : 0);
    Complex m = tail_m(side, spec.left_tail, last_explicit, z);
    for (int x = last_explicit + 1; x <= 0; ++x) {
        m = continued_fraction_step(m, spec.J(x - 1), spec.lambda(x), z);
    }
    return m;
}

} // namespace

Complex weyl_m(Side side, Complex z, const ChainSpec& spec) {
    return weyl_m_impl(side, z, spec);
}

Complex weyl_m(Side side, double E, const ChainSpec& spec) {
    return weyl_m_impl(side, Complex(E, 0.0), spec);
}

bool SupportSet::contains(double E, double margin) const {
    for (const auto& [lo, hi] : intervals) {
        if (E >= lo + margin && E <= hi - margin) return true;
    }
    return false;
}

double SupportSet::total_measure() const {
    double acc = 0.0;
    for (const auto& [lo, hi] : intervals) acc += hi - lo;
    return acc;
}

std::vector<std::pair<double, double>> tail_bands(const TailModel& tail, double refine_tol) {
    if (tail.kind == TailModel::Kind::Constant) {
        const double J = std::abs(tail.J[0]);
        return {{tail.lambda[0] - 2.0 * J, tail.lambda[0] + 2.0 * J}};
    }
    // periodic: bands are where the fixed-point discriminant (tr T)^2 - 4 det T
    // of the one-period Moebius map is negative; edges are its sign changes
    const auto discriminant = [&](double E) {
        // direction is immaterial for the band set; use the right orientation
        const auto site_of = [&](int i) { return static_cast<long long>(i); };
        const TailFixedPoint fp = tail_composite(tail, Complex(E, 0.0), false, site_of);
        const double tr = fp.t(0, 0).real() + fp.t(1, 1).real();
        return tr * tr - 4.0 * fp.det;
    };
    double max_j = 0.0, min_l = tail.lambda[0], max_l = tail.lambda[0];
    for (double j : tail.J) max_j = std::max(max_j, std::abs(j));
    for (double l : tail.lambda) {
        min_l = std::min(min_l, l);
        max_l = std::max(max_l, l);
    }
    const double lo = min_l - 2.0 * max_j - 1e-9;
    const double hi = max_l + 2.0 * max_j + 1e-9;

    const int n = 8192;
    std::vector<std::pair<double, double>> bands;
    double prev_e = lo, prev_d = discriminant(lo);
    double open_edge = 0.0;
    bool inside = prev_d < 0;
    if (inside) open_edge = lo;
    for (int i = 1; i <= n; ++i) {
        const double e = lo + (hi - lo) * i / n;
        const double d = discriminant(e);
        if ((d < 0) != inside) {
            // bisect the crossing
            double a = prev_e, b = e;
            for (int it = 0; it < 200 && b - a > refine_tol; ++it) {
                const double m = 0.5 * (a + b);
                if ((discriminant(m) < 0) == inside) {
                    a = m;
                } else {
                    b = m;
                }
            }
            const double edge = 0.5 * (a + b);
            if (inside) {
                bands.push_back({open_edge, edge});
            } else {
                open_edge = edge;
            }
            inside = !inside;
        }
        prev_e = e;
        prev_d = d;
    }
    if (inside) bands.push_back({open_edge, hi});
    return bands;
}

SupportSet essential_support(const ChainSpec& spec, const SupportOptions& opts) {
    spec.validate();
    const auto left = tail_bands(spec.left_tail, opts.refine_tol);
    const auto right = tail_bands(spec.right_tail, opts.refine_tol);
    SupportSet support;
    for (const auto& [al, bl] : left) {
        for (const auto& [ar, br] : right) {
            const double lo = std::max(al, ar);
            const double hi = std::min(bl, br);
            if (hi > lo) support.intervals.push_back({lo, hi});
        }
    }
    std::sort(support.intervals.begin(), support.intervals.end());

    // membership epsilon relative to the largest F over a coarse grid
    double max_f = 0.0;
    for (const auto& [lo, hi] : support.intervals) {
        for (int i = 1; i < 64; ++i) {
            const double e = lo + (hi - lo) * i / 64.0;
            max_f = std::max(max_f, weyl_m(Side::Left, e, spec).imag());
            max_f = std::max(max_f, weyl_m(Side::Right, e, spec).imag());
        }
    }
    support.epsilon = opts.eps_rel * std::max(max_f, 1e-300);
    return support;
}

ScatteringPoint scattering_point(double E, const ChainSpec& spec, const SupportSet& support) {
    ScatteringPoint pt;
    pt.E = E;
    pt.G_l = weyl_m(Side::Left, E, spec);
    pt.G_r = weyl_m(Side::Right, E, spec);
    pt.F_l = std::max(pt.G_l.imag(), 0.0);
    pt.F_r = std::max(pt.G_r.imag(), 0.0);
    pt.in_support = support.contains(E, 0.0);

    const double J0 = spec.J(0);
    // full-line resolvent entries at the cut from the rank-2 perturbation:
    // [[1/G_l, J_0],[J_0, 1/G_r]]^{-1}; the off-diagonal entry is the paper's
    // -J_0 G_l G_r / (1 - J_0^2 G_l G_r)
    const Complex denom = 1.0 - J0 * J0 * pt.G_l * pt.G_r;
    if (std::abs(denom) < 1e-14) {
        // isolated resonance off the support; s is diagonal there anyway
        pt.s.setIdentity();
        return pt;
    }
    const Complex r_ll = pt.G_l / denom;
    const Complex r_rr = pt.G_r / denom;
    const Complex r_lr = -J0 * pt.G_l * pt.G_r / denom;

    const Complex i2J0(0.0, 2.0 * J0);
    pt.s.setIdentity();
    pt.s(0, 0) += i2J0 * J0 * r_rr * pt.F_l;
    pt.s(1, 1) += i2J0 * J0 * r_ll * pt.F_r;
    const Complex off = i2J0 * (J0 * r_lr - 1.0) * std::sqrt(pt.F_l * pt.F_r);
    pt.s(0, 1) = off;
    pt.s(1, 0) = off;
    return pt;
}

ScatteringPoint scattering_point(double E, const ChainSpec& spec) {
    return scattering_point(E, spec, essential_support(spec));
}

ReflectionlessResult reflectionless_test(const ChainSpec& spec, double eps_refl,
                                         int grid_per_band) {
    const SupportSet support = essential_support(spec);
    ReflectionlessResult res;
    if (support.empty()) {
        res.verdict = ReflectionlessVerdict::NoTransport;
        return res;
    }
    for (const auto& [lo, hi] : support.intervals) {
        const double c = 0.5 * (lo + hi);
        const double h = 0.5 * (hi - lo);
        for (int k = 0; k < grid_per_band; ++k) {
            // Chebyshev nodes cluster at the edges without touching them
            const double e = c + h * std::cos(M_PI * (2.0 * k + 1.0) / (2.0 * grid_per_band));
            const ScatteringPoint pt = scattering_point(e, spec, support);
            const double trans = std::norm(pt.s(0, 1));
            res.max_deviation = std::max(res.max_deviation, std::abs(1.0 - trans));
        }
    }
    res.verdict = res.max_deviation < eps_refl ? ReflectionlessVerdict::Reflectionless
                                               : ReflectionlessVerdict::NotReflectionless;
    return res;
}

} // namespace entropix::scattering
