// fock.hpp — brute-force 2^N many-body engine: spin Hamiltonian from Pauli
// tensor products, Jordan–Wigner fermions, the exact two-temperature density
// matrix, the two-measurement FCS distribution, and spectral measures of the
// mean entropy production rate Sigma^t. Ground truth for every determinant
// formula at small N; hard cap N <= 12.
#pragma once

#include "entropix/chain.hpp"
#include "entropix/linalg.hpp"

#include <vector>

namespace entropix::fock {

inline constexpr int kMaxSites = 12;

struct DiscreteMeasure {
    // (value phi, weight); weights >= 0 and sum to 1, atoms below 1e-15 pruned
    std::vector<std::pair<double, double>> atoms;

    double total_weight() const;
    // sum_phi e^{-alpha t phi} * weight
    Complex exponential_moment(Complex alpha, double t) const;
    double mean() const;
};

struct SpinOperators {
    Matrix H;
    Matrix H_l;
    Matrix H_r;
    Matrix V;
    Matrix Phi_l; // = i[H_l, V]
    Matrix Phi_r; // = i[H_r, V]
    Matrix sigma; // = -beta_l Phi_l - beta_r Phi_r
};

// Pauli-built many-body operators of the confined chain (independent of the
// one-particle route; used as the oracle side of every equivalence test).
SpinOperators spin_hamiltonians(const ChainSpec& spec, const Interval& iv);

// The paper's explicit fermionic quadratic forms of the fluxes after JW.
Matrix flux_l_fermionic(const ChainSpec& spec, const Interval& iv);
Matrix flux_r_fermionic(const ChainSpec& spec, const Interval& iv);

// Jordan-Wigner annihilation operators a_x, x running over the interval; they
// satisfy the CAR and reproduce sigma^{(1,2,3)} through the JW strings.
std::vector<Matrix> jw_fermions(int n_sites);

// dGamma(A) = sum_xy A_xy a_x^* a_y
Matrix second_quantize(const std::vector<Matrix>& a, const Matrix& one_body);

// omega = e^{-beta_l H_l - beta_r H_r} / tr(...)
Matrix density_matrix(const ChainSpec& spec, const Interval& iv);

// Sigma^t = (S_t - S)/t with S = -log omega (additive constants cancel)
Matrix mean_entropy_production(const ChainSpec& spec, const Interval& iv, double t);

// Full counting statistics of the two-measurement protocol: the distribution of
// phi = (s' - s)/t for eigenvalues s, s' of S = -log omega. Eigenvalues are
// clustered at tolerance 1e-10 before projecting.
DiscreteMeasure fcs_distribution(const ChainSpec& spec, const Interval& iv, double t);

struct StateChoice {
    bool relaxed = false; // false: initial omega; true: omega evolved to time s
    double s = 0.0;
};

// Spectral measure of Sigma^t in the chosen state
DiscreteMeasure sigma_spectral_measure(const ChainSpec& spec, const Interval& iv, double t,
                                       const StateChoice& state = {});

// tr(rho (log nu - log rho)); -inf sentinel when ker nu is not contained in ker rho
double relative_entropy(const Matrix& rho, const Matrix& nu);

// ---- many-body functional oracles (Fock-trace definitions) ----

double oracle_es(const ChainSpec& spec, const Interval& iv, double alpha, double t);
double oracle_ep(const ChainSpec& spec, const Interval& iv, double p, double alpha, double t);
double oracle_einf(const ChainSpec& spec, const Interval& iv, double alpha, double t);
Complex oracle_fcs_char(const ChainSpec& spec, const Interval& iv, Complex alpha, double t);
double oracle_gc(const ChainSpec& spec, const Interval& iv, double alpha, double t, double s);
double oracle_mean_ep_rate(const ChainSpec& spec, const Interval& iv, double t);

} // namespace entropix::fock
