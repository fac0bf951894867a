#include "entropix/fock.hpp"
#include "entropix/errors.hpp"
#include "entropix/confined.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace entropix::fock {

namespace {

constexpr double kClusterTol = 1e-10;

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix pauli(int which) {
    Matrix m(2, 2);
    switch (which) {
        case 1: m << 0, 1, 1, 0; break;
        case 2: m << 0, Complex(0, -1), Complex(0, 1), 0; break;
        case 3: m << 1, 0, 0, -1; break;
        default: m.setIdentity();
    }
    return m;
}

// single-site operator embedded at position idx of an n-site register
Matrix embed(int n, int idx, const Matrix& m) {
    Matrix out = Matrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) {
        out = kron(out, i == idx ? m : Matrix::Identity(2, 2));
    }
    return out;
}

void check_cap(int n) {
    if (n > kMaxSites) {
        throw CapError("fock: " + std::to_string(n) + " sites exceeds the 2^N cap of " +
                       std::to_string(kMaxSites));
    }
}

// XY bond term: (J/2)(s1_x s1_{x+1} + s2_x s2_{x+1})
Matrix bond_term(int n, int idx, double J) {
    return 0.5 * J *
           (embed(n, idx, pauli(1)) * embed(n, idx + 1, pauli(1)) +
            embed(n, idx, pauli(2)) * embed(n, idx + 1, pauli(2)));
}

struct ThermalData {
    EigenSystem B_es;        // eigensystem of beta_l H_l + beta_r H_r
    RealVector log_p;        // log of the Gibbs weights (sum of p is 1)
    Matrix omega;
};

ThermalData thermal_data(const SpinOperators& ops, double beta_l, double beta_r) {
    ThermalData td;
    td.B_es = eig(beta_l * ops.H_l + beta_r * ops.H_r);
    const double bmin = td.B_es.values.minCoeff();
    double z = 0.0;
    for (Eigen::Index i = 0; i < td.B_es.values.size(); ++i) {
        z += std::exp(-(td.B_es.values[i] - bmin));
    }
    const double logz = std::log(z);
    td.log_p = RealVector(td.B_es.values.size());
    RealVector p(td.B_es.values.size());
    for (Eigen::Index i = 0; i < td.B_es.values.size(); ++i) {
        td.log_p[i] = -(td.B_es.values[i] - bmin) - logz;
        p[i] = std::exp(td.log_p[i]);
    }
    td.omega = td.B_es.vectors * p.asDiagonal() * td.B_es.vectors.adjoint();
    return td;
}

double log_sum_exp_vec(const std::vector<double>& xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}

// group sorted eigenvalues into clusters of width kClusterTol * scale
std::vector<std::pair<double, std::vector<int>>> cluster(const RealVector& vals) {
    std::vector<int> order(vals.size());
    for (int i = 0; i < vals.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const double scale = 1.0 + vals.cwiseAbs().maxCoeff();
    std::vector<std::pair<double, std::vector<int>>> groups;
    for (int idx : order) {
        if (!groups.empty() && vals[idx] - vals[groups.back().second.front()] <= kClusterTol * scale) {
            groups.back().second.push_back(idx);
        } else {
            groups.push_back({0.0, {idx}});
        }
    }
    for (auto& g : groups) {
        double mean = 0.0;
        for (int i : g.second) mean += vals[i];
        g.first = mean / static_cast<double>(g.second.size());
    }
    return groups;
}

DiscreteMeasure finalize_measure(std::vector<std::pair<double, double>> atoms) {
    std::sort(atoms.begin(), atoms.end());
    DiscreteMeasure m;
    double scale = 1.0;
    for (const auto& a : atoms) scale = std::max(scale, std::abs(a.first));
    for (const auto& a : atoms) {
        if (!m.atoms.empty() && a.first - m.atoms.back().first <= kClusterTol * scale) {
            m.atoms.back().second += a.second;
            continue;
        }
        m.atoms.push_back(a);
    }
    m.atoms.erase(std::remove_if(m.atoms.begin(), m.atoms.end(),
                                 [](const auto& a) { return a.second < 1e-15; }),
                  m.atoms.end());
    return m;
}

Matrix relaxed_state(const SpinOperators& ops, const ThermalData& td, double s) {
    if (s == 0.0) return td.omega;
    const Matrix u = propagator(eig(ops.H), -s); // e^{-isH}
    return u * td.omega * u.adjoint();
}

} // namespace

double DiscreteMeasure::total_weight() const {
    double w = 0.0;
    for (const auto& a : atoms) w += a.second;
    return w;
}

Complex DiscreteMeasure::exponential_moment(Complex alpha, double t) const {
    Complex acc(0.0, 0.0);
    for (const auto& a : atoms) acc += a.second * std::exp(-alpha * t * a.first);
    return acc;
}

double DiscreteMeasure::mean() const {
    double acc = 0.0;
    for (const auto& a : atoms) acc += a.first * a.second;
    return acc;
}

SpinOperators spin_hamiltonians(const ChainSpec& spec, const Interval& iv) {
    const int n = iv.size();
    check_cap(n);
    const ChainCoefficients c = restrict_chain(spec, iv);
    const int cut = -iv.lo; // array index of site 0
    const int dim = 1 << n;

    SpinOperators ops;
    ops.H_l = Matrix::Zero(dim, dim);
    ops.H_r = Matrix::Zero(dim, dim);
    for (int i = 0; i < n; ++i) {
        const Matrix field = 0.5 * c.lambda[i] * embed(n, i, pauli(3));
        (i <= cut ? ops.H_l : ops.H_r) += field;
    }
    for (int i = 0; i + 1 < n; ++i) {
        if (i == cut) continue; // cut bond belongs to V
        (i < cut ? ops.H_l : ops.H_r) += bond_term(n, i, c.J[i]);
    }
    ops.V = bond_term(n, cut, c.J[cut]);
    ops.H = ops.H_l + ops.H_r + ops.V;

    ops.Phi_l = Complex(0, 1) * (ops.H_l * ops.V - ops.V * ops.H_l);
    ops.Phi_r = Complex(0, 1) * (ops.H_r * ops.V - ops.V * ops.H_r);
    ops.sigma = -spec.beta_l * ops.Phi_l - spec.beta_r * ops.Phi_r;
    return ops;
}

std::vector<Matrix> jw_fermions(int n_sites) {
    check_cap(n_sites);
    Matrix lower(2, 2);
    lower << 0, 0, 1, 0; // (s1 - i s2)/2
    std::vector<Matrix> a;
    a.reserve(n_sites);
    for (int x = 0; x < n_sites; ++x) {
        Matrix op = Matrix::Identity(1, 1);
        for (int y = 0; y < n_sites; ++y) {
            if (y < x) {
                op = kron(op, pauli(3));
            } else if (y == x) {
                op = kron(op, lower);
            } else {
                op = kron(op, Matrix::Identity(2, 2));
            }
        }
        a.push_back(std::move(op));
    }
    return a;
}

Matrix second_quantize(const std::vector<Matrix>& a, const Matrix& one_body) {
    const int n = static_cast<int>(a.size());
    check_cap(n);
    if (one_body.rows() != n || one_body.cols() != n) {
        throw ConfigError("second_quantize: one-body matrix dimension mismatch");
    }
    const Eigen::Index dim = a.front().rows();
    Matrix out = Matrix::Zero(dim, dim);
    for (int y = 0; y < n; ++y) {
        Matrix left = Matrix::Zero(dim, dim);
        for (int x = 0; x < n; ++x) {
            if (one_body(x, y) != Complex(0, 0)) left += one_body(x, y) * a[x].adjoint();
        }
        out += left * a[y];
    }
    return out;
}

// The JW strings of Proposition-2.1-style conventions attach the alternating
// gauge (-1)^x to the fermion modes: next-nearest flux terms keep their sign,
// nearest-neighbor (lambda) terms flip relative to the plain-fermion form.
Matrix flux_l_fermionic(const ChainSpec& spec, const Interval& iv) {
    // -i J_0 J_{-1} (a_1^* a_{-1} - a_{-1}^* a_1) + i J_0 lambda_0 (a_1^* a_0 - a_0^* a_1)
    const auto a = jw_fermions(iv.size());
    const int i0 = -iv.lo;
    const Complex mi(0, -1);
    return mi * spec.J(0) * spec.J(-1) *
               (a[i0 + 1].adjoint() * a[i0 - 1] - a[i0 - 1].adjoint() * a[i0 + 1]) -
           mi * spec.J(0) * spec.lambda(0) *
               (a[i0 + 1].adjoint() * a[i0] - a[i0].adjoint() * a[i0 + 1]);
}

Matrix flux_r_fermionic(const ChainSpec& spec, const Interval& iv) {
    const auto a = jw_fermions(iv.size());
    const int i0 = -iv.lo;
    const Complex mi(0, -1);
    return mi * spec.J(0) * spec.J(1) *
               (a[i0].adjoint() * a[i0 + 2] - a[i0 + 2].adjoint() * a[i0]) -
           mi * spec.J(0) * spec.lambda(1) *
               (a[i0].adjoint() * a[i0 + 1] - a[i0 + 1].adjoint() * a[i0]);
}

Matrix density_matrix(const ChainSpec& spec, const Interval& iv) {
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    return thermal_data(ops, spec.beta_l, spec.beta_r).omega;
}

Matrix mean_entropy_production(const ChainSpec& spec, const Interval& iv, double t) {
    if (t == 0.0) throw ConfigError("mean_entropy_production: t must be nonzero");
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const Matrix b = spec.beta_l * ops.H_l + spec.beta_r * ops.H_r;
    const Matrix u = propagator(eig(ops.H), t);
    return hermitize((u * b * u.adjoint() - b) / t);
}

DiscreteMeasure fcs_distribution(const ChainSpec& spec, const Interval& iv, double t) {
    if (t == 0.0) throw ConfigError("fcs_distribution: t must be nonzero");
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);

    const auto groups = cluster(td.B_es.values); // S and B share eigenvectors and clusters
    const Matrix u = propagator(eig(ops.H), t);
    const Matrix m = td.B_es.vectors.adjoint() * u * td.B_es.vectors;

    std::vector<std::pair<double, double>> atoms;
    for (const auto& gi : groups) {
        for (const auto& gj : groups) {
            double w = 0.0;
            for (int i : gi.second) {
                const double pi = std::exp(td.log_p[i]);
                for (int j : gj.second) w += pi * std::norm(m(i, j));
            }
            atoms.push_back({(gj.first - gi.first) / t, w});
        }
    }
    return finalize_measure(std::move(atoms));
}

DiscreteMeasure sigma_spectral_measure(const ChainSpec& spec, const Interval& iv, double t,
                                       const StateChoice& state) {
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);
    const Matrix sigma_t = mean_entropy_production(spec, iv, t);
    const EigenSystem es = eig(sigma_t);
    const Matrix rho = state.relaxed ? relaxed_state(ops, td, state.s) : td.omega;

    const auto groups = cluster(es.values);
    std::vector<std::pair<double, double>> atoms;
    for (const auto& g : groups) {
        double w = 0.0;
        for (int i : g.second) {
            w += (es.vectors.col(i).adjoint() * rho * es.vectors.col(i))(0, 0).real();
        }
        atoms.push_back({g.first, w});
    }
    return finalize_measure(std::move(atoms));
}

double relative_entropy(const Matrix& rho, const Matrix& nu) {
    const EigenSystem rho_es = eig(hermitize(rho));
    const EigenSystem nu_es = eig(hermitize(nu));
    const double floor = 1e-14;
    double acc = 0.0;
    const Matrix overlap = rho_es.vectors.adjoint() * nu_es.vectors;
    for (Eigen::Index i = 0; i < rho_es.values.size(); ++i) {
        const double p = rho_es.values[i];
        if (p <= floor) continue;
        acc -= p * std::log(p);
        for (Eigen::Index j = 0; j < nu_es.values.size(); ++j) {
            const double o = std::norm(overlap(i, j));
            if (o <= 1e-16) continue;
            const double q = nu_es.values[j];
            if (q <= floor) {
                return -std::numeric_limits<double>::infinity(); // ker nu not in ker rho
            }
            acc += p * o * std::log(q);
        }
    }
    return acc;
}

double oracle_es(const ChainSpec& spec, const Interval& iv, double alpha, double t) {
    return oracle_gc(spec, iv, alpha, t, 0.0);
}

double oracle_gc(const ChainSpec& spec, const Interval& iv, double alpha, double t, double s) {
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);
    const EigenSystem sig = eig(mean_entropy_production(spec, iv, t));
    // tr(rho_s e^{-a t Sigma^t}) = sum_{ij} |(U_Sigma^* e^{-isH} W)_{ij}|^2
    //                               e^{-a t mu_i + log p_j}
    // with every exponent exact in the log domain; the overlap squares carry
    // quadratically small roundoff, so huge exponent spreads stay harmless
    Matrix m = sig.vectors.adjoint();
    if (s != 0.0) m = m * propagator(eig(ops.H), -s);
    m = m * td.B_es.vectors;
    std::vector<double> terms;
    terms.reserve(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double w = std::norm(m(i, j));
            if (w <= 0.0) continue;
            terms.push_back(std::log(w) - alpha * t * sig.values[i] + td.log_p[j]);
        }
    }
    return log_sum_exp_vec(terms);
}

double oracle_ep(const ChainSpec& spec, const Interval& iv, double p, double alpha, double t) {
    if (std::isinf(p)) return oracle_einf(spec, iv, alpha, t);
    if (!(p > 0)) throw ConfigError("oracle_ep: p must lie in ]0, inf]");
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);
    // tr[(omega^{c1} omega_t^{c2} omega^{c1})^{p/2}] from the singular values of
    // G = diag(p^{c2/2}) (W^* U W) diag(p^{c1})
    const Matrix u = propagator(eig(ops.H), t);
    const Matrix m = td.B_es.vectors.adjoint() * u * td.B_es.vectors;
    const RealVector log_sigma = product_log_singular_values(
        (alpha / p) * td.log_p, m, ((1.0 - alpha) / p) * td.log_p);
    std::vector<double> terms(log_sigma.size());
    for (Eigen::Index i = 0; i < log_sigma.size(); ++i) terms[i] = p * log_sigma[i];
    return log_sum_exp_vec(terms);
}

double oracle_einf(const ChainSpec& spec, const Interval& iv, double alpha, double t) {
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);
    const Matrix log_omega =
        td.B_es.vectors * td.log_p.asDiagonal() * td.B_es.vectors.adjoint();
    const Matrix u = propagator(eig(ops.H), t);
    const Matrix y = (1.0 - alpha) * log_omega + alpha * (u.adjoint() * log_omega * u);
    const EigenSystem y_es = eig(hermitize(y));
    std::vector<double> terms(y_es.values.data(), y_es.values.data() + y_es.values.size());
    return log_sum_exp_vec(terms);
}

Complex oracle_fcs_char(const ChainSpec& spec, const Interval& iv, Complex alpha, double t) {
    if (t == 0.0) throw ConfigError("oracle_fcs_char: t must be nonzero");
    const SpinOperators ops = spin_hamiltonians(spec, iv);
    const ThermalData td = thermal_data(ops, spec.beta_l, spec.beta_r);
    // sum_{ij} p_i |M_ij|^2 e^{-alpha (b_j - b_i)} with M = W^* e^{itH} W;
    // real-max extraction keeps the complex sum stable
    const Matrix m =
        td.B_es.vectors.adjoint() * propagator(eig(ops.H), t) * td.B_es.vectors;
    double shift = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double w = std::norm(m(i, j));
            if (w <= 0.0) continue;
            const double expo = std::log(w) + td.log_p[i] -
                                alpha.real() * (td.B_es.values[j] - td.B_es.values[i]);
            shift = std::max(shift, expo);
        }
    }
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const double w = std::norm(m(i, j));
            if (w <= 0.0) continue;
            const Complex expo = std::log(w) + td.log_p[i] -
                                 alpha * (td.B_es.values[j] - td.B_es.values[i]) - shift;
            acc += std::exp(expo);
        }
    }
    return std::exp(shift) * acc;
}

double oracle_mean_ep_rate(const ChainSpec& spec, const Interval& iv, double t) {
    const Matrix omega = density_matrix(spec, iv);
    const Matrix sigma_t = mean_entropy_production(spec, iv, t);
    return (omega * sigma_t).trace().real();
}

} // namespace entropix::fock
