// asymptotics.hpp — large-time entropic functionals as energy integrals of 2x2
// determinant integrands built from the on-shell scattering matrix,
//
//   e_{p,+}(a) = int_E log( det(1+K_{a,p}(E)) / det(1+K_0(E)) ) dE/2pi,
//   e_+(a)     = int_E log( det(1+K_a(E))     / det(1+K_0(E)) ) dE/2pi,
//
// with k_0(E) = diag(-beta_l E, -beta_r E) and
//   K_a     = e^{k0/2} e^{a(s* k0 s - k0)} e^{k0/2},
//   K_{a,p} = [e^{(1-a)k0/p} s e^{2a k0/p} s* e^{(1-a)k0/p}]^{p/2},
//   K_{a,inf} = e^{(1-a)k0 + a s k0 s*},
// plus the Landauer–Büttiker flux, the reflectionless closed form, rate
// functions via Legendre–Fenchel transform, and the CLT variance e_+''(0).
#pragma once

#include "entropix/chain.hpp"
#include "entropix/scattering.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace entropix::asymptotics {

inline constexpr double kInfiniteP = std::numeric_limits<double>::infinity();

// spec + precomputed transport window; every functional below evaluates the
// scattering data per energy on the fly
struct Model {
    ChainSpec spec;
    scattering::SupportSet support;
};

Model make_model(const ChainSpec& spec);

struct KMatrices {
    Eigen::Vector2d k0;          // diag(-beta_l E, -beta_r E)
    Eigen::Matrix2cd K_alpha;     // e^{k0/2} e^{a(s* k0 s - k0)} e^{k0/2}
    Eigen::Matrix2cd K_alpha_p;   // finite p
    Eigen::Matrix2cd K_alpha_inf; // p -> inf limit
};

// explicit 2x2 matrices of the three K families; `swap_s` exercises the
// time-reversal freedom s <-> s^* (the integrals must not change)
KMatrices k_matrices(double E, double alpha, double p, const Model& model, bool swap_s = false);

struct QuadSpec {
    double abs_tol = 1e-9;
};

double e_plus(double alpha, const Model& model, const QuadSpec& q = {});
// p in ]0, inf]; p = kInfiniteP selects the variational functional
double e_p_plus(double alpha, double p, const Model& model, const QuadSpec& q = {});
// matrix-built integrands (slower, overflow-prone at large |alpha|; kept as the
// cross-check path for the stable log-domain evaluation)
double e_plus_matrix_path(double alpha, const Model& model, bool swap_s = false,
                          const QuadSpec& q = {});
double e_p_plus_matrix_path(double alpha, double p, const Model& model, bool swap_s = false,
                            const QuadSpec& q = {});

// Theorem closed form, valid only when the chain is reflectionless; refuses otherwise
double e_plus_reflectionless(double alpha, const Model& model, const QuadSpec& q = {});

struct LandauerFlux {
    double phi_l = 0.0;
    double phi_r = 0.0;  // = -phi_l
    double sigma = 0.0;  // = (beta_r - beta_l) phi_l
};
LandauerFlux landauer_flux(const Model& model, const QuadSpec& q = {});

// finite differences of the energy integrals, differenced inside the integrand
// (steps 1e-4 / 1e-3, Richardson-extrapolated once)
double e_plus_derivative(double alpha, int order, const Model& model, const QuadSpec& q = {});
double e_p_plus_derivative(double alpha, double p, int order, const Model& model,
                           const QuadSpec& q = {});

// D_+ = e_+''(0)
double clt_variance(const Model& model, const QuadSpec& q = {});

enum class RateKind { ES_GC, FCS };

// I(theta) = -inf_alpha(alpha theta + e(alpha)); +inf outside the closure of
// the range of -e'. Newton seeded at alpha = 1/2, bisection fallback.
double rate_function(RateKind kind, double theta, const Model& model, const QuadSpec& q = {});

struct IdentityReport {
    double e_plus_at_one = 0.0;
    double ep_spread_at_half = 0.0; // max_p - min_p of e_{p,+}(1/2), p in {1/2,1,2,4,inf}
    scattering::ReflectionlessResult reflectionless;
    bool transport = false; // |E| > 0
    bool equilibrium = false;
    std::string verdict;
};
IdentityReport entropic_identity_report(const Model& model, const QuadSpec& q = {});

enum class FunctionalKind { ES, EP, EINF, FCS, GC };

struct MRule {
    int M0 = 10;
    double vmax_factor = 1.0; // M >= M0 + factor * v_max * (t + s)
    int M_cap = 2000;
};

struct ConvergenceRow {
    double t = 0.0;
    int M = 0;
    double finite_over_t = 0.0;
    double limit = 0.0;
    double deviation = 0.0;
};

// (1/t) x finite-time functional against its scattering-formula limit;
// ES and GC both converge to e_+, EP(p) to e_{p,+} (FCS = EP(2))
std::vector<ConvergenceRow> finite_time_convergence(const ChainSpec& spec, FunctionalKind kind,
                                                    double alpha, double p,
                                                    const std::vector<double>& t_list,
                                                    const MRule& rule, const QuadSpec& q = {});

// Lieb-Robinson-style bound 2 sup|J| + sup|lambda| used by the M rule
double max_group_velocity(const ChainSpec& spec);

} // namespace entropix::asymptotics
