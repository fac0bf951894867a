#include "entropix/confined.hpp"
#include "entropix/errors.hpp"

#include <cmath>
#include <limits>

namespace entropix {

namespace {

// e^{c k_time} = P(time) e^{ck} P(time)^*, built from cached eigensystems so no
// fresh diagonalization is needed for evolved exponentials
Matrix exp_of_evolved_k(const ConfinedSystem& sys, double c, double time) {
    Matrix w = propagator(sys.h_es, time) * sys.k_es.vectors;
    Vector d(sys.k_es.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::exp(c * sys.k_es.values[i]);
    return w * d.asDiagonal() * w.adjoint();
}

double logdet_one_plus_exp_k(const ConfinedSystem& sys) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < sys.k_es.values.size(); ++i) {
        acc += log1p_exp(sys.k_es.values[i]);
    }
    return acc;
}

// The exponential sandwiches e^{A} e^{B} e^{A} have eigenvalue ranges around
// e^{2|A|+|B|}; past 1/eps a plain eigendecomposition loses the small
// eigenvalues absolutely. Estimate that loss and route the evaluation through
// the relative-accuracy Jacobi product SVD when the plain path cannot deliver,
// except at dimensions where its O(n^3 sweeps) cost outweighs the (loose)
// tolerances anyone uses there.
bool need_accurate_path(double log_range, Eigen::Index n) {
    const double predicted = n * 1.1e-16 * std::exp(std::min(600.0, log_range));
    if (predicted > 1e-6) return true;
    return predicted > 1e-11 && n <= 420;
}

// log det(1 + G^* G) - log det(1 + e^k) from log singular values of G
double logdet_ratio_from_log_singulars(const ConfinedSystem& sys, const RealVector& log_sigma,
                                       double power = 1.0) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < log_sigma.size(); ++i) {
        acc += log1p_exp(2.0 * power * log_sigma[i]);
    }
    return acc - logdet_one_plus_exp_k(sys);
}

} // namespace

ConfinedSystem assemble(const ChainSpec& spec, const Interval& iv) {
    spec.validate();
    ConfinedSystem sys;
    sys.iv = iv;
    sys.beta_l = spec.beta_l;
    sys.beta_r = spec.beta_r;

    const ChainCoefficients c = restrict_chain(spec, iv);
    const int n = iv.size();
    sys.h = Matrix::Zero(n, n);
    sys.h_l = Matrix::Zero(n, n);
    sys.h_r = Matrix::Zero(n, n);
    sys.v = Matrix::Zero(n, n);

    for (int i = 0; i < n; ++i) sys.h(i, i) = c.lambda[i];
    for (int i = 0; i + 1 < n; ++i) {
        sys.h(i, i + 1) = c.J[i];
        sys.h(i + 1, i) = c.J[i];
    }

    const int cut = sys.index_of(0); // site 0
    sys.J0 = c.J[cut];
    sys.h_l.topLeftCorner(cut + 1, cut + 1) = sys.h.topLeftCorner(cut + 1, cut + 1);
    sys.h_r.bottomRightCorner(n - cut - 1, n - cut - 1) =
        sys.h.bottomRightCorner(n - cut - 1, n - cut - 1);
    sys.v(cut, cut + 1) = sys.J0;
    sys.v(cut + 1, cut) = sys.J0;

    sys.k = -spec.beta_l * sys.h_l - spec.beta_r * sys.h_r;
    sys.h_es = eig(sys.h);
    sys.k_es = eig(sys.k);
    return sys;
}

Matrix evolve_k(const ConfinedSystem& sys, double t) {
    if (t == 0.0) return sys.k;
    Matrix u = propagator(sys.h_es, t);
    return hermitize(u * sys.k * u.adjoint());
}

double es_t(const ConfinedSystem& sys, double alpha, double t) {
    return gc_t(sys, alpha, t, 0.0);
}

double gc_t(const ConfinedSystem& sys, double alpha, double t, double s) {
    if (s < 0) throw ConfigError("gc_t: NESS relaxation time s must be >= 0");
    if (alpha == 0.0) return 0.0;
    const Matrix d = evolve_k(sys, t) - sys.k;
    const EigenSystem d_es = eig(hermitize(d));
    const double kappa_max = sys.k_es.values.cwiseAbs().maxCoeff();
    const double d_max = d_es.values.size() ? d_es.values.cwiseAbs().maxCoeff() : 0.0;

    if (need_accurate_path(std::abs(alpha) * d_max + kappa_max, sys.dim())) {
        // X = e^{k_{-s}/2} e^{a(k_t-k)} e^{k_{-s}/2} = G^* G with
        // sigma(G) = sigma(e^{a d/2} M e^{kappa/2}), M = U_d^* P(-s) U_k
        const Matrix m = s == 0.0
                             ? Matrix(d_es.vectors.adjoint() * sys.k_es.vectors)
                             : Matrix(d_es.vectors.adjoint() * propagator(sys.h_es, -s) *
                                      sys.k_es.vectors);
        const RealVector log_sigma =
            product_log_singular_values(0.5 * alpha * d_es.values, m, 0.5 * sys.k_es.values);
        return logdet_ratio_from_log_singulars(sys, log_sigma);
    }
    const Matrix mid = d_es.apply([alpha](double x) { return std::exp(alpha * x); });
    const Matrix half = s == 0.0 ? sys.k_es.apply([](double x) { return std::exp(0.5 * x); })
                                 : exp_of_evolved_k(sys, 0.5, -s);
    const EigenSystem prod = eig(hermitize(half * mid * half));
    return logdet_one_plus_pow(prod.values.cwiseMax(0.0), 1.0) - logdet_one_plus_exp_k(sys);
}

double ep_t(const ConfinedSystem& sys, double p, double alpha, double t) {
    if (std::isinf(p)) return einf_t(sys, alpha, t);
    if (!(p > 0)) throw ConfigError("ep_t: p must lie in ]0, inf]");
    const double c_outer = (1.0 - alpha) / p;
    const double c_inner = 2.0 * alpha / p;
    const double kappa_max = sys.k_es.values.cwiseAbs().maxCoeff();

    if (need_accurate_path((2.0 * std::abs(c_outer) + std::abs(c_inner)) * kappa_max,
                           sys.dim())) {
        // X = e^{c1 k} e^{c2 k_{-t}} e^{c1 k} = G^* G with
        // sigma(G) = sigma(e^{c2 kappa/2} M e^{c1 kappa}), M = U_k^* P(t) U_k
        const Matrix m =
            sys.k_es.vectors.adjoint() * propagator(sys.h_es, t) * sys.k_es.vectors;
        const RealVector log_sigma = product_log_singular_values(
            0.5 * c_inner * sys.k_es.values, m, c_outer * sys.k_es.values);
        return logdet_ratio_from_log_singulars(sys, log_sigma, 0.5 * p);
    }
    const Matrix outer = sys.k_es.apply([&](double x) { return std::exp(c_outer * x); });
    const Matrix inner = exp_of_evolved_k(sys, c_inner, -t);
    const EigenSystem prod = eig(hermitize(outer * inner * outer));
    return logdet_one_plus_pow(prod.values.cwiseMax(0.0), 0.5 * p) - logdet_one_plus_exp_k(sys);
}

double einf_t(const ConfinedSystem& sys, double alpha, double t) {
    const Matrix w = (1.0 - alpha) * sys.k + alpha * evolve_k(sys, -t);
    const EigenSystem w_es = eig(hermitize(w));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < w_es.values.size(); ++i) acc += log1p_exp(w_es.values[i]);
    return acc - logdet_one_plus_exp_k(sys);
}

Complex fcs_char(const ConfinedSystem& sys, Complex alpha, double t) {
    const Matrix u = propagator(sys.h_es, t);
    const Matrix ea = sys.k_es.apply_complex([alpha](double x) { return std::exp(alpha * x); });
    const Matrix ema = sys.k_es.apply_complex([alpha](double x) { return std::exp(-alpha * x); });
    const Matrix occupied = sys.k_es.apply([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const Matrix loop = ema * u.adjoint() * ea * u;
    const Matrix arg = occupied * (loop - Matrix::Identity(sys.dim(), sys.dim()));
    return std::exp(logdet_one_plus_general(arg));
}

double mean_ep_rate(const ConfinedSystem& sys, double t) {
    if (t == 0.0) throw ConfigError("mean_ep_rate: t must be nonzero");
    const Matrix density = sys.k_es.apply([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const Matrix diff = sys.k - evolve_k(sys, t);
    return (density * diff).trace().real() / t;
}

Matrix flux_onebody_l(const ConfinedSystem& sys) {
    const Matrix c = sys.h_l * sys.v - sys.v * sys.h_l;
    return Complex(0.0, 1.0) * c;
}

Matrix flux_onebody_r(const ConfinedSystem& sys) {
    const Matrix c = sys.h_r * sys.v - sys.v * sys.h_r;
    return Complex(0.0, 1.0) * c;
}

Matrix sigma_onebody(const ConfinedSystem& sys) {
    return -sys.beta_l * flux_onebody_l(sys) - sys.beta_r * flux_onebody_r(sys);
}

DerivativeTraceResult es_derivative_trace(const ConfinedSystem& sys, double alpha, double t,
                                          int initial_nodes, double tol) {
    const Matrix commutator = Complex(0.0, 1.0) * (sys.k * sys.h - sys.h * sys.k);
    // i[k,h] lives on the four sites around the cut; trace against its columns only
    std::vector<int> cols;
    for (int j = 0; j < sys.dim(); ++j) {
        if (commutator.col(j).cwiseAbs().maxCoeff() > 1e-14) cols.push_back(j);
    }

    const auto integrand = [&](double u) {
        const Matrix a = evolve_k(sys, t * (1.0 - u)) - evolve_k(sys, -t * u);
        const Matrix ea = eig(hermitize(a)).apply([alpha](double x) { return std::exp(-alpha * x); });
        const Matrix g = Matrix::Identity(sys.dim(), sys.dim()) +
                         ea * exp_of_evolved_k(sys, -1.0, -t * u);
        Eigen::PartialPivLU<Matrix> lu(g);
        double trace = 0.0;
        for (int j : cols) {
            const Vector x = lu.solve(commutator.col(j));
            trace += x[j].real();
        }
        return trace;
    };

    DerivativeTraceResult res;
    int n = initial_nodes;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int round = 0; round < 4; ++round, n *= 2) {
        const GaussLegendreRule rule = gauss_legendre(n);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += rule.weights[i] * integrand(rule.nodes[i]);
        const double value = -t * acc;
        res.value = value;
        res.nodes = n;
        if (!std::isnan(prev)) {
            res.estimated_error = std::abs(value - prev);
            if (res.estimated_error < tol) return res;
        }
        prev = value;
    }
    throw QuadratureError("es_derivative_trace: u-quadrature did not stabilize below " +
                              std::to_string(tol),
                          res.estimated_error);
}

double instantaneous_flux_l(const ConfinedSystem& sys, double t) {
    const Matrix density = sys.k_es.apply([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const Matrix u = propagator(sys.h_es, t);
    return (density * u * flux_onebody_l(sys) * u.adjoint()).trace().real();
}

double time_averaged_flux_l(const ConfinedSystem& sys, double t0, double t1) {
    if (!(t1 > t0)) throw ConfigError("time_averaged_flux_l: need t1 > t0");
    // in the eigenbasis of h the average over [t0,t1] of e^{it(E_n-E_m)} is closed form
    const Matrix density = sys.k_es.apply([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    const Matrix rho = sys.h_es.vectors.adjoint() * density * sys.h_es.vectors;
    const Matrix f = sys.h_es.vectors.adjoint() * flux_onebody_l(sys) * sys.h_es.vectors;
    const double span = t1 - t0;
    Complex acc(0.0, 0.0);
    const auto& e = sys.h_es.values;
    for (Eigen::Index m = 0; m < e.size(); ++m) {
        for (Eigen::Index n = 0; n < e.size(); ++n) {
            const double d = e[n] - e[m];
            Complex w;
            if (std::abs(d) * span < 1e-12) {
                w = Complex(1.0, 0.0);
            } else {
                w = (std::exp(Complex(0.0, t1 * d)) - std::exp(Complex(0.0, t0 * d))) /
                    (Complex(0.0, d) * span);
            }
            acc += rho(m, n) * f(n, m) * w;
        }
    }
    return acc.real();
}

} // namespace entropix
