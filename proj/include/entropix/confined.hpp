// confined.hpp — one-particle operators of the confined chain and every
// finite-volume, finite-time entropic functional via determinant formulas:
//
//   ES_t(a)      = log det(1 + e^{k/2} e^{a(k_t - k)} e^{k/2}) - log det(1 + e^k)
//   e_{p,t}(a)   = log det(1 + (e^{(1-a)k/p} e^{2a k_{-t}/p} e^{(1-a)k/p})^{p/2})
//                  - log det(1 + e^k)
//   e_{inf,t}(a) = log det(1 + e^{(1-a)k + a k_{-t}}) - log det(1 + e^k)
//   GC_{t,s}(a)  = log det(1 + e^{k_{-s}/2} e^{a(k_t - k)} e^{k_{-s}/2})
//                  - log det(1 + e^k)
//
// with k = -beta_l h_l - beta_r h_r and k_t = e^{ith} k e^{-ith}. The FCS
// characteristic function at complex a is the entire-analytic determinant
//   det(1 + (1 + e^{-k})^{-1}(e^{-ak} e^{-ith} e^{ak} e^{ith} - 1)).
#pragma once

#include "entropix/chain.hpp"
#include "entropix/linalg.hpp"
#include "entropix/quadrature.hpp"

namespace entropix {

struct ConfinedSystem {
    Interval iv;
    double beta_l = 1.0;
    double beta_r = 1.0;
    double J0 = 0.0; // cut bond coupling

    Matrix h;   // Jacobi matrix on the interval
    Matrix h_l; // restriction to sites <= 0, extended by zero
    Matrix h_r; // restriction to sites >= 1, extended by zero
    Matrix v;   // J0 (|delta_0><delta_1| + |delta_1><delta_0|)
    Matrix k;   // -beta_l h_l - beta_r h_r

    EigenSystem h_es;
    EigenSystem k_es;

    int dim() const { return iv.size(); }
    int index_of(int site) const { return site - iv.lo; }
};

ConfinedSystem assemble(const ChainSpec& spec, const Interval& iv);

// k_t = e^{ith} k e^{-ith}
Matrix evolve_k(const ConfinedSystem& sys, double t);

double es_t(const ConfinedSystem& sys, double alpha, double t);
double ep_t(const ConfinedSystem& sys, double p, double alpha, double t); // p = inf allowed
double einf_t(const ConfinedSystem& sys, double alpha, double t);
Complex fcs_char(const ConfinedSystem& sys, Complex alpha, double t);
double gc_t(const ConfinedSystem& sys, double alpha, double t, double s);

// omega(Sigma^t) = tr((1 + e^{-k})^{-1}(k - k_t))/t, nonnegative for t > 0
double mean_ep_rate(const ConfinedSystem& sys, double t);

// (d/da) ES_t(a) by the derivative trace formula
//   -t int_0^1 tr[(1 + e^{-a(k_{t(1-u)} - k_{-tu})} e^{-k_{-tu}})^{-1} i[k,h]] du
// with composite Gauss-Legendre in u, node count doubled until stable.
struct DerivativeTraceResult {
    double value = 0.0;
    double estimated_error = 0.0;
    int nodes = 0;
};
DerivativeTraceResult es_derivative_trace(const ConfinedSystem& sys, double alpha, double t,
                                          int initial_nodes = 32, double tol = 1e-9);

// one-body flux observables: Phi_{l/r} = dGamma(i[h_{l/r}, v]), sigma = dGamma(i[k, h])
Matrix flux_onebody_l(const ConfinedSystem& sys);
Matrix flux_onebody_r(const ConfinedSystem& sys);
Matrix sigma_onebody(const ConfinedSystem& sys);

// omega(tau^t(Phi_l)) and its exact average over t in [t0, t1] (closed form in
// the eigenbasis of h; no time discretization)
double instantaneous_flux_l(const ConfinedSystem& sys, double t);
double time_averaged_flux_l(const ConfinedSystem& sys, double t0, double t1);

} // namespace entropix
