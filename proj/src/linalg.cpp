#include "entropix/linalg.hpp"
#include "entropix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace entropix {

bool is_hermitian(const Matrix& a, double rtol) {
    if (a.rows() != a.cols() || a.rows() == 0) return false;
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    const double dev = (a - a.adjoint()).cwiseAbs().maxCoeff();
    return dev <= rtol * scale;
}

Matrix hermitize(const Matrix& a) {
    return 0.5 * (a + a.adjoint());
}

namespace {

void fix_phases(Matrix& v) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < v.rows(); ++i) {
            const double m = std::norm(v(i, j));
            if (m > best + 1e-300) {
                best = m;
                imax = i;
            }
        }
        const Complex pivot = v(imax, j);
        const double mag = std::abs(pivot);
        if (mag > 0) v.col(j) *= std::conj(pivot) / mag;
    }
}

} // namespace

EigenSystem eig(const Matrix& a) {
    if (!is_hermitian(a)) {
        throw NumericError("eig: input matrix is not Hermitian");
    }
    EigenSystem es;
    const double scale = 1.0 + a.cwiseAbs().maxCoeff();
    if (a.imag().cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        // real symmetric path, roughly twice as fast on the big confined systems
        Eigen::SelfAdjointEigenSolver<RealMatrix> solver(a.real());
        if (solver.info() != Eigen::Success) throw NumericError("eig: real solver failed");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(a);
        if (solver.info() != Eigen::Success) throw NumericError("eig: complex solver failed");
        es.values = solver.eigenvalues();
        es.vectors = solver.eigenvectors();
    }
    fix_phases(es.vectors);
    return es;
}

Matrix EigenSystem::apply(const std::function<double(double)>& f) const {
    RealVector fv(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const double y = f(values[i]);
        if (!std::isfinite(y)) {
            throw NumericError("apply_fn: function not finite on spectrum (at eigenvalue " +
                               std::to_string(values[i]) + ")");
        }
        fv[i] = y;
    }
    return vectors * fv.asDiagonal() * vectors.adjoint();
}

Matrix EigenSystem::apply_complex(const std::function<Complex(double)>& f) const {
    Vector fv(values.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        const Complex y = f(values[i]);
        if (!std::isfinite(y.real()) || !std::isfinite(y.imag())) {
            throw NumericError("apply_fn: function not finite on spectrum");
        }
        fv[i] = y;
    }
    return vectors * fv.asDiagonal() * vectors.adjoint();
}

Matrix apply_fn(const Matrix& a, const std::function<double(double)>& f) {
    return eig(a).apply(f);
}

Matrix propagator(const EigenSystem& h_es, double t) {
    return h_es.apply_complex([t](double e) { return std::exp(Complex(0.0, t * e)); });
}

Matrix propagator(const Matrix& h, double t) {
    return propagator(eig(h), t);
}

double logdet_one_plus_psd(const Matrix& a) {
    EigenSystem es = eig(a);
    const double scale = std::max(1.0, es.values.size() ? es.values.cwiseAbs().maxCoeff() : 1.0);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        double lam = es.values[i];
        if (lam < -1e-8 * scale) {
            throw NumericError("logdet_one_plus_psd: eigenvalue " + std::to_string(lam) +
                               " violates positivity");
        }
        if (lam < 0) lam = 0;
        acc += std::log1p(lam);
    }
    return acc;
}

double logdet_one_plus_pow(const RealVector& eigenvalues, double power) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
        const double lam = eigenvalues[i];
        if (lam <= 0) continue; // clamped eigenvalue, log(1+0)
        acc += log1p_exp(power * std::log(lam));
    }
    return acc;
}

Complex logdet_one_plus_general(const Matrix& a) {
    Matrix b = Matrix::Identity(a.rows(), a.cols()) + a;
    Eigen::PartialPivLU<Matrix> lu(b);
    const auto& diag = lu.matrixLU().diagonal();
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (std::abs(diag[i]) <= 1e-300 * scale) {
            throw NumericError("logdet_one_plus_general: 1 + A is singular");
        }
        acc += std::log(diag[i]);
    }
    if (lu.permutationP().determinant() < 0) {
        acc += Complex(0.0, M_PI);
    }
    return acc;
}

RealVector product_log_singular_values(const RealVector& log_left, const Matrix& m,
                                       const RealVector& log_right) {
    const Eigen::Index n = m.rows();
    if (log_left.size() != n || log_right.size() != n || m.cols() != n) {
        throw NumericError("product_log_singular_values: dimension mismatch");
    }
    // center the scalings so the formed matrix stays inside double range
    const double l0 = log_left.mean();
    const double r0 = log_right.mean();
    Matrix g = m;
    for (Eigen::Index i = 0; i < n; ++i) g.row(i) *= std::exp(log_left[i] - l0);
    for (Eigen::Index j = 0; j < n; ++j) g.col(j) *= std::exp(log_right[j] - r0);

    RealVector norms(n);
    for (Eigen::Index j = 0; j < n; ++j) norms[j] = g.col(j).squaredNorm();

    const double tol = 1e-14;
    bool converged = false;
    for (int sweep = 0; sweep < 60 && !converged; ++sweep) {
        converged = true;
        for (Eigen::Index p = 0; p + 1 < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const Complex c = g.col(p).dot(g.col(q)); // conj(g_p) . g_q
                const double ac = std::abs(c);
                if (ac <= tol * std::sqrt(norms[p] * norms[q])) continue;
                converged = false;
                const Complex phase = c / ac;
                const double tau = (norms[q] - norms[p]) / (2.0 * ac);
                const double tt =
                    (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::hypot(1.0, tau));
                const double cs = 1.0 / std::hypot(1.0, tt);
                const double sn = cs * tt;
                const Vector gp = g.col(p);
                // absorb the phase into column q (g_p^* . gq becomes |c|);
                // right diagonal unitaries do not move singular values
                const Vector gq = g.col(q) * std::conj(phase);
                g.col(p) = cs * gp - sn * gq;
                g.col(q) = sn * gp + cs * gq;
                norms[p] = g.col(p).squaredNorm();
                norms[q] = g.col(q).squaredNorm();
            }
        }
    }
    if (!converged) {
        throw NumericError("product_log_singular_values: Jacobi sweeps did not converge");
    }
    RealVector out(n);
    for (Eigen::Index j = 0; j < n; ++j) out[j] = 0.5 * std::log(norms[j]) + l0 + r0;
    std::sort(out.data(), out.data() + n);
    return out;
}

double log1p_exp(double x) {
    if (x > 36.0) return x + std::exp(-x);
    if (x < -745.0) return 0.0;
    return std::log1p(std::exp(x));
}

double log_cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax)) - M_LN2;
}

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

} // namespace entropix
