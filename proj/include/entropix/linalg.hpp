// linalg.hpp — dense Hermitian functional calculus used by every determinant formula:
// eigendecompositions with a fixed phase convention, matrix functions, unitary
// propagators, and log-determinants.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace entropix {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// max |A_ij - conj(A_ji)| <= 1e-12 * (1 + max |A_ij|)
bool is_hermitian(const Matrix& a, double rtol = 1e-12);

// (A + A^*)/2, squashing roundoff asymmetry of products of Hermitian factors
Matrix hermitize(const Matrix& a);

// Eigenvalues ascending, eigenvectors phase-fixed: the largest-magnitude
// component of each column is made real positive, so repeated runs (and
// persisted sweeps) are bit-identical.
struct EigenSystem {
    RealVector values;
    Matrix vectors;

    Matrix apply(const std::function<double(double)>& f) const;
    Matrix apply_complex(const std::function<Complex(double)>& f) const;
};

// Throws NumericError on non-Hermitian input. Real symmetric matrices are
// detected and routed through the real solver.
EigenSystem eig(const Matrix& a);

// V f(diag) V^*; throws on f leaving the real line (NaN/Inf), e.g. log of a
// nonpositive eigenvalue.
Matrix apply_fn(const Matrix& a, const std::function<double(double)>& f);

// e^{ith}
Matrix propagator(const Matrix& h, double t);
Matrix propagator(const EigenSystem& h_es, double t);

// log det(1 + A) for Hermitian positive semidefinite A; eigenvalues in
// [-1e-12*scale, 0) are clamped to 0, anything below -1e-8*scale signals a
// broken positivity precondition upstream and throws.
double logdet_one_plus_psd(const Matrix& a);

// Same, but from precomputed eigenvalues raised to `power`:
//   sum_i log(1 + lambda_i^power),  lambda_i >= 0
// evaluated in the log domain so huge exponential products never overflow.
double logdet_one_plus_pow(const RealVector& eigenvalues, double power);

// log det(1 + A) for a general complex matrix, accumulated along an LU
// factorization (principal log per pivot). exp(result) = det(1+A).
Complex logdet_one_plus_general(const Matrix& a);

// Log singular values of diag(e^{log_left}) * m * diag(e^{log_right}) by
// one-sided Jacobi. The exponential products of the determinant formulas reach
// condition numbers far beyond 1/eps; a plain eigendecomposition then loses
// the small eigenvalues absolutely, while Jacobi keeps them to relative
// accuracy (m is unitary here, the well-conditioned core of the bound).
// Returned ascending.
RealVector product_log_singular_values(const RealVector& log_left, const Matrix& m,
                                       const RealVector& log_right);

// ---- scalar helpers ----

// log(1 + e^x), overflow-safe
double log1p_exp(double x);
// log cosh x, overflow-safe
double log_cosh(double x);
// log(e^a + e^b)
double log_sum_exp(double a, double b);

} // namespace entropix
