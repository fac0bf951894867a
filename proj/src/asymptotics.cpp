#include "entropix/asymptotics.hpp"
#include "entropix/confined.hpp"
#include "entropix/errors.hpp"
#include "entropix/quadrature.hpp"

#include <algorithm>
#include <cmath>

namespace entropix::asymptotics {

namespace {

using scattering::ScatteringPoint;

constexpr double kTwoPi = 2.0 * M_PI;

// traceless Hermitian Delta = s* k0 s - k0 reduced to the two invariants the
// 2x2 spectral calculus needs: the (0,0) entry and the eigenvalue delta >= 0
struct DeltaInvariants {
    double d00 = 0.0;
    double delta = 0.0;
};

DeltaInvariants delta_invariants(const ScatteringPoint& pt, double beta_l, double beta_r) {
    const double E = pt.E;
    const Eigen::Vector2d k0(-beta_l * E, -beta_r * E);
    Eigen::Matrix2cd delta_m = pt.s.adjoint() * k0.asDiagonal().toDenseMatrix().cast<Complex>() *
                                   pt.s -
                               k0.asDiagonal().toDenseMatrix().cast<Complex>();
    delta_m = 0.5 * (delta_m + delta_m.adjoint());
    DeltaInvariants inv;
    inv.d00 = delta_m(0, 0).real();
    inv.delta = std::sqrt(inv.d00 * inv.d00 + std::norm(delta_m(0, 1)));
    return inv;
}

// log det(1 + K_alpha(E)) - log det(1 + K_0(E)), evaluated in the log domain:
// with T = tr K_alpha and D = det K_alpha = det K_0 = e^{tr k0} (exact),
// the eigenvalues are lam+- = T/2 (1 +- sqrt(1 - 4D/T^2)).
double integrand_es(double E, double alpha, double beta_l, double beta_r,
                    const ScatteringPoint& pt) {
    if (alpha == 0.0) return 0.0;
    const DeltaInvariants inv = delta_invariants(pt, beta_l, beta_r);
    const double xl = -beta_l * E, xr = -beta_r * E;
    if (inv.delta < 1e-300) return 0.0; // [s, k0] = 0: K_alpha = K_0
    const double log_a_plus = std::log(0.5) + log_sum_exp(xl, xr); // log(A/2): A = tr e^{k0}
    // T = e^{a delta} u+ + e^{-a delta} u-,  u+- = (A +- B/delta)/2 >= 0
    const double b_over_delta = (std::exp(xl) - std::exp(xr)) * inv.d00 / inv.delta;
    const double u_plus = 0.5 * (std::exp(xl) + std::exp(xr) + b_over_delta);
    const double u_minus = 0.5 * (std::exp(xl) + std::exp(xr) - b_over_delta);
    double log_t;
    const double ad = alpha * inv.delta;
    if (u_plus <= 0.0) {
        log_t = -ad + std::log(u_minus);
    } else if (u_minus <= 0.0) {
        log_t = ad + std::log(u_plus);
    } else {
        log_t = log_sum_exp(ad + std::log(u_plus), -ad + std::log(u_minus));
    }
    (void)log_a_plus;
    const double log_d = xl + xr;
    const double qq = std::exp(log_d - 2.0 * log_t);
    const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * qq));
    const double log_lam_plus = log_t + std::log(0.5 * (1.0 + root));
    const double log_lam_minus = log_d - log_lam_plus;
    return log1p_exp(log_lam_plus) + log1p_exp(log_lam_minus) - log1p_exp(xl) - log1p_exp(xr);
}

// finite p: inner 2x2 M = e^{(1-a)k0/p} s e^{2a k0/p} s* e^{(1-a)k0/p} has
// tr M = sum_{ab} |s_ab|^2 exp(-(2E/p)(beta_a(1-a) + beta_b a)) and
// det M = e^{2 tr k0 / p}; K = M^{p/2}
double integrand_ep(double E, double alpha, double p, double beta_l, double beta_r,
                    const ScatteringPoint& pt) {
    const double xl = -beta_l * E, xr = -beta_r * E;
    const double beta[2] = {beta_l, beta_r};
    double log_t = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double w = std::norm(pt.s(a, b));
            if (w <= 0.0) continue;
            const double expo = -(2.0 * E / p) * (beta[a] * (1.0 - alpha) + beta[b] * alpha);
            log_t = log_sum_exp(log_t, std::log(w) + expo);
        }
    }
    const double log_d = (2.0 / p) * (xl + xr);
    const double qq = std::exp(log_d - 2.0 * log_t);
    const double root = std::sqrt(std::max(0.0, 1.0 - 4.0 * qq));
    const double log_mu_plus = log_t + std::log(0.5 * (1.0 + root));
    const double log_mu_minus = log_d - log_mu_plus;
    return log1p_exp(0.5 * p * log_mu_plus) + log1p_exp(0.5 * p * log_mu_minus) -
           log1p_exp(xl) - log1p_exp(xr);
}

// p = inf: K = e^W with W = (1-a) k0 + a s k0 s*
double integrand_einf(double E, double alpha, double beta_l, double beta_r,
                      const ScatteringPoint& pt) {
    const double xl = -beta_l * E, xr = -beta_r * E;
    Eigen::Matrix2cd rot = Eigen::Matrix2cd::Zero();
    const Eigen::Vector2d k0(xl, xr);
    rot = pt.s * k0.asDiagonal().toDenseMatrix().cast<Complex>() * pt.s.adjoint();
    Eigen::Matrix2cd w = (1.0 - alpha) * k0.asDiagonal().toDenseMatrix().cast<Complex>() +
                         alpha * 0.5 * (rot + rot.adjoint());
    const double mean = 0.5 * (w(0, 0).real() + w(1, 1).real());
    const double r = std::sqrt(0.25 * std::pow(w(0, 0).real() - w(1, 1).real(), 2) +
                               std::norm(w(0, 1)));
    return log1p_exp(mean + r) + log1p_exp(mean - r) - log1p_exp(xl) - log1p_exp(xr);
}

// 2x2 Hermitian function via spectral projections
Eigen::Matrix2cd herm2_fn(const Eigen::Matrix2cd& h, const std::function<double(double)>& f) {
    const double mean = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double r =
        std::sqrt(0.25 * std::pow(h(0, 0).real() - h(1, 1).real(), 2) + std::norm(h(0, 1)));
    if (r < 1e-300) {
        return f(mean) * Eigen::Matrix2cd::Identity();
    }
    const double lp = mean + r, lm = mean - r;
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd proj_p = (h - lm * id) / (lp - lm);
    const Eigen::Matrix2cd proj_m = (h - lp * id) / (lm - lp);
    return f(lp) * proj_p + f(lm) * proj_m;
}

double integrate_over_support(const Model& model, const std::function<double(double)>& f,
                              double abs_tol, const char* label) {
    if (model.support.empty()) return 0.0;
    double total = 0.0;
    double worst = 0.0;
    bool ok = true;
    QuadOptions opts;
    opts.abs_tol = abs_tol / static_cast<double>(model.support.intervals.size());
    for (const auto& [lo, hi] : model.support.intervals) {
        const QuadResult r = adaptive_gauss_kronrod(f, lo, hi, opts);
        total += r.value;
        worst = std::max(worst, r.error_estimate);
        ok = ok && r.converged;
    }
    if (!ok) {
        throw QuadratureError(std::string(label) + ": quadrature did not reach tolerance " +
                                  std::to_string(abs_tol),
                              worst);
    }
    return total;
}

} // namespace

Model make_model(const ChainSpec& spec) {
    Model m;
    m.spec = spec;
    m.support = scattering::essential_support(spec);
    return m;
}

double max_group_velocity(const ChainSpec& spec) {
    double max_j = 0.0, max_l = 0.0;
    const auto scan_tail = [&](const TailModel& t) {
        for (double j : t.J) max_j = std::max(max_j, std::abs(j));
        for (double l : t.lambda) max_l = std::max(max_l, std::abs(l));
    };
    scan_tail(spec.left_tail);
    scan_tail(spec.right_tail);
    for (const auto& w : spec.window) {
        max_j = std::max(max_j, std::abs(w.J));
        max_l = std::max(max_l, std::abs(w.lambda));
    }
    return 2.0 * max_j + max_l;
}

KMatrices k_matrices(double E, double alpha, double p, const Model& model, bool swap_s) {
    if (!(p > 0)) throw ConfigError("k_matrices: p must lie in ]0, inf]");
    const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
    KMatrices km;
    km.k0 = Eigen::Vector2d(-model.spec.beta_l * E, -model.spec.beta_r * E);
    const Eigen::Matrix2cd k0m = km.k0.asDiagonal().toDenseMatrix().cast<Complex>();
    const Eigen::Matrix2cd s = swap_s ? Eigen::Matrix2cd(pt.s.adjoint()) : pt.s;

    const Eigen::Matrix2cd half = herm2_fn(k0m, [](double x) { return std::exp(0.5 * x); });
    const Eigen::Matrix2cd delta = 0.5 * ((s.adjoint() * k0m * s - k0m) +
                                          (s.adjoint() * k0m * s - k0m).adjoint());
    km.K_alpha = half * herm2_fn(delta, [alpha](double x) { return std::exp(alpha * x); }) * half;

    if (std::isinf(p)) {
        km.K_alpha_p = Eigen::Matrix2cd::Zero();
    } else {
        const Eigen::Matrix2cd outer =
            herm2_fn(k0m, [&](double x) { return std::exp((1.0 - alpha) / p * x); });
        const Eigen::Matrix2cd mid =
            s * herm2_fn(k0m, [&](double x) { return std::exp(2.0 * alpha / p * x); }) * s.adjoint();
        Eigen::Matrix2cd inner = outer * mid * outer;
        inner = 0.5 * (inner + inner.adjoint());
        km.K_alpha_p = herm2_fn(inner, [&](double x) {
            return std::pow(std::max(x, 0.0), 0.5 * p);
        });
    }

    Eigen::Matrix2cd w = (1.0 - alpha) * k0m + alpha * (s * k0m * s.adjoint());
    w = 0.5 * (w + w.adjoint());
    km.K_alpha_inf = herm2_fn(w, [](double x) { return std::exp(x); });
    if (std::isinf(p)) km.K_alpha_p = km.K_alpha_inf;
    return km;
}

double e_plus(double alpha, const Model& model, const QuadSpec& q) {
    if (alpha == 0.0 || model.spec.beta_l == model.spec.beta_r) return 0.0;
    const auto f = [&](double E) {
        const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
        return integrand_es(E, alpha, model.spec.beta_l, model.spec.beta_r, pt) / kTwoPi;
    };
    return integrate_over_support(model, f, q.abs_tol, "e_plus");
}

double e_p_plus(double alpha, double p, const Model& model, const QuadSpec& q) {
    if (!(p > 0)) throw ConfigError("e_p_plus: p must lie in ]0, inf]");
    if (alpha == 0.0 || model.spec.beta_l == model.spec.beta_r) return 0.0;
    const auto f = [&](double E) {
        const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
        const double g = std::isinf(p)
                             ? integrand_einf(E, alpha, model.spec.beta_l, model.spec.beta_r, pt)
                             : integrand_ep(E, alpha, p, model.spec.beta_l, model.spec.beta_r, pt);
        return g / kTwoPi;
    };
    return integrate_over_support(model, f, q.abs_tol, "e_p_plus");
}

namespace {

double logdet_ratio_2x2(const Eigen::Matrix2cd& k, double xl, double xr) {
    const Complex det = (1.0 + k(0, 0)) * (1.0 + k(1, 1)) - k(0, 1) * k(1, 0);
    return std::log(det.real()) - log1p_exp(xl) - log1p_exp(xr);
}

} // namespace

double e_plus_matrix_path(double alpha, const Model& model, bool swap_s, const QuadSpec& q) {
    const auto f = [&](double E) {
        const KMatrices km = k_matrices(E, alpha, 2.0, model, swap_s);
        return logdet_ratio_2x2(km.K_alpha, km.k0[0], km.k0[1]) / kTwoPi;
    };
    return integrate_over_support(model, f, q.abs_tol, "e_plus_matrix_path");
}

double e_p_plus_matrix_path(double alpha, double p, const Model& model, bool swap_s,
                            const QuadSpec& q) {
    const auto f = [&](double E) {
        const KMatrices km = k_matrices(E, alpha, p, model, swap_s);
        return logdet_ratio_2x2(km.K_alpha_p, km.k0[0], km.k0[1]) / kTwoPi;
    };
    return integrate_over_support(model, f, q.abs_tol, "e_p_plus_matrix_path");
}

double e_plus_reflectionless(double alpha, const Model& model, const QuadSpec& q) {
    const auto refl = scattering::reflectionless_test(model.spec);
    if (refl.verdict == scattering::ReflectionlessVerdict::NotReflectionless) {
        throw ConfigError("e_plus_reflectionless: chain is not reflectionless (max deviation " +
                          std::to_string(refl.max_deviation) + ")");
    }
    const double bl = model.spec.beta_l, br = model.spec.beta_r;
    const auto f = [&](double E) {
        const double u = (bl * (1.0 - alpha) + br * alpha) * E / 2.0;
        const double v = (br * (1.0 - alpha) + bl * alpha) * E / 2.0;
        return (log_cosh(u) + log_cosh(v) - log_cosh(bl * E / 2.0) - log_cosh(br * E / 2.0)) /
               kTwoPi;
    };
    return integrate_over_support(model, f, q.abs_tol, "e_plus_reflectionless");
}

LandauerFlux landauer_flux(const Model& model, const QuadSpec& q) {
    const double bl = model.spec.beta_l, br = model.spec.beta_r;
    const double dbeta = br - bl;
    const auto f = [&](double E) {
        const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
        const double trans = std::norm(pt.s(0, 1));
        return E * trans * std::sinh(dbeta * E / 2.0) /
               (std::cosh(br * E / 2.0) * std::cosh(bl * E / 2.0)) / (4.0 * M_PI);
    };
    LandauerFlux flux;
    flux.phi_l = integrate_over_support(model, f, q.abs_tol, "landauer_flux");
    flux.phi_r = -flux.phi_l;
    flux.sigma = dbeta * flux.phi_l;
    return flux;
}

namespace {

double derivative_of_integral(const Model& model,
                              const std::function<double(double, double)>& g, double alpha,
                              int order, double abs_tol) {
    // difference inside the integrand: the E-integral commutes with the
    // alpha-differences, and the differenced integrand stays O(1)
    if (order == 1) {
        const double h = 1e-4;
        const auto f = [&](double E) {
            const double d_h = g(E, alpha + h) - g(E, alpha - h);
            const double d_h2 = g(E, alpha + 0.5 * h) - g(E, alpha - 0.5 * h);
            return (8.0 * d_h2 - d_h) / (6.0 * h) / kTwoPi;
        };
        return integrate_over_support(model, f, abs_tol, "derivative_of_integral");
    }
    if (order == 2) {
        const double h = 1e-3;
        const auto f = [&](double E) {
            const double g0 = g(E, alpha);
            const double s_h = g(E, alpha + h) + g(E, alpha - h);
            const double s_h2 = g(E, alpha + 0.5 * h) + g(E, alpha - 0.5 * h);
            return (64.0 * s_h2 - s_h - 126.0 * g0) / (15.0 * h * h) / kTwoPi;
        };
        return integrate_over_support(model, f, abs_tol, "derivative_of_integral");
    }
    throw ConfigError("derivative_of_integral: order must be 1 or 2");
}

} // namespace

double e_plus_derivative(double alpha, int order, const Model& model, const QuadSpec& q) {
    const double bl = model.spec.beta_l, br = model.spec.beta_r;
    const auto g = [&](double E, double a) {
        const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
        return integrand_es(E, a, bl, br, pt);
    };
    return derivative_of_integral(model, g, alpha, order, q.abs_tol);
}

double e_p_plus_derivative(double alpha, double p, int order, const Model& model,
                           const QuadSpec& q) {
    const double bl = model.spec.beta_l, br = model.spec.beta_r;
    const auto g = [&](double E, double a) {
        const ScatteringPoint pt = scattering::scattering_point(E, model.spec, model.support);
        return std::isinf(p) ? integrand_einf(E, a, bl, br, pt)
                             : integrand_ep(E, a, p, bl, br, pt);
    };
    return derivative_of_integral(model, g, alpha, order, q.abs_tol);
}

double clt_variance(const Model& model, const QuadSpec& q) {
    if (model.support.empty() || model.spec.beta_l == model.spec.beta_r) return 0.0;
    return e_plus_derivative(0.0, 2, model, q);
}

double rate_function(RateKind kind, double theta, const Model& model, const QuadSpec& q) {
    if (model.support.empty() || model.spec.beta_l == model.spec.beta_r) {
        // e == 0 identically: I(0) = 0, I = +inf elsewhere
        return theta == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const auto value = [&](double a) {
        return kind == RateKind::FCS ? e_p_plus(a, 2.0, model, q) : e_plus(a, model, q);
    };
    const auto slope = [&](double a) {
        return kind == RateKind::FCS ? e_p_plus_derivative(a, 2.0, 1, model, q)
                                     : e_plus_derivative(a, 1, model, q);
    };
    const auto curvature = [&](double a) {
        return kind == RateKind::FCS ? e_p_plus_derivative(a, 2.0, 2, model, q)
                                     : e_plus_derivative(a, 2, model, q);
    };

    // solve e'(alpha) + theta = 0; e' is strictly increasing
    const double alpha_cap = 64.0;
    double lo = -2.0, hi = 3.0;
    while (slope(lo) + theta > 0) {
        lo *= 2.0;
        if (lo < -alpha_cap) {
            if (slope(-alpha_cap) + theta > 1e-12) {
                return std::numeric_limits<double>::infinity();
            }
            lo = -alpha_cap;
            break;
        }
    }
    while (slope(hi) + theta < 0) {
        hi *= 2.0;
        if (hi > alpha_cap) {
            if (slope(alpha_cap) + theta < -1e-12) {
                return std::numeric_limits<double>::infinity();
            }
            hi = alpha_cap;
            break;
        }
    }

    double a = 0.5;
    if (a < lo || a > hi) a = 0.5 * (lo + hi);
    bool newton_ok = false;
    for (int it = 0; it < 60; ++it) {
        const double r = slope(a) + theta;
        const double c = curvature(a);
        if (!(c > 0)) break;
        const double step = r / c;
        double next = a - step;
        if (next <= lo || next >= hi) break;
        if (r > 0) {
            hi = a;
        } else {
            lo = a;
        }
        a = next;
        if (std::abs(step) < 1e-8) {
            newton_ok = true;
            break;
        }
    }
    if (!newton_ok) {
        for (int it = 0; it < 200 && hi - lo > 1e-8; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (slope(mid) + theta < 0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        a = 0.5 * (lo + hi);
    }
    const double inf_value = a * theta + value(a);
    return std::max(-inf_value, 0.0);
}

IdentityReport entropic_identity_report(const Model& model, const QuadSpec& q) {
    IdentityReport rep;
    rep.transport = !model.support.empty();
    rep.equilibrium = model.spec.beta_l == model.spec.beta_r;
    rep.reflectionless = scattering::reflectionless_test(model.spec);
    if (!rep.transport || rep.equilibrium) {
        rep.verdict = rep.transport ? "equilibrium: all asymptotic functionals vanish"
                                    : "no transport: essential support is empty";
        return rep;
    }
    rep.e_plus_at_one = e_plus(1.0, model, q);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (double p : {0.5, 1.0, 2.0, 4.0, kInfiniteP}) {
        const double v = e_p_plus(0.5, p, model, q);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    rep.ep_spread_at_half = hi - lo;
    const bool refl =
        rep.reflectionless.verdict == scattering::ReflectionlessVerdict::Reflectionless;
    rep.verdict = refl ? "entropic identity holds (reflectionless)"
                       : "entropic identity fails (not reflectionless)";
    return rep;
}

std::vector<ConvergenceRow> finite_time_convergence(const ChainSpec& spec, FunctionalKind kind,
                                                    double alpha, double p,
                                                    const std::vector<double>& t_list,
                                                    const MRule& rule, const QuadSpec& q) {
    const Model model = make_model(spec);
    const double vmax = max_group_velocity(spec);
    std::vector<ConvergenceRow> rows;
    for (double t : t_list) {
        if (t <= 0) throw ConfigError("finite_time_convergence: t must be positive");
        const double s = kind == FunctionalKind::GC ? t : 0.0;
        const int M = static_cast<int>(
            std::ceil(rule.M0 + rule.vmax_factor * vmax * (t + s)));
        if (M > rule.M_cap) {
            throw CapError("finite_time_convergence: M = " + std::to_string(M) +
                           " exceeds the cap " + std::to_string(rule.M_cap));
        }
        const ConfinedSystem sys = assemble(spec, Interval::symmetric(M));
        double finite = 0.0, limit = 0.0;
        switch (kind) {
            case FunctionalKind::ES:
                finite = es_t(sys, alpha, t);
                limit = e_plus(alpha, model, q);
                break;
            case FunctionalKind::GC:
                finite = gc_t(sys, alpha, t, s);
                limit = e_plus(alpha, model, q);
                break;
            case FunctionalKind::FCS:
                finite = ep_t(sys, 2.0, alpha, t);
                limit = e_p_plus(alpha, 2.0, model, q);
                break;
            case FunctionalKind::EINF:
                finite = einf_t(sys, alpha, t);
                limit = e_p_plus(alpha, kInfiniteP, model, q);
                break;
            case FunctionalKind::EP:
                finite = ep_t(sys, p, alpha, t);
                limit = e_p_plus(alpha, p, model, q);
                break;
        }
        ConvergenceRow row;
        row.t = t;
        row.M = M;
        row.finite_over_t = finite / t;
        row.limit = limit;
        row.deviation = std::abs(row.finite_over_t - limit);
        rows.push_back(row);
    }
    return rows;
}

} // namespace entropix::asymptotics
