#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entropix/confined.hpp"
#include "entropix/errors.hpp"
#include "entropix/fock.hpp"

#include <cmath>

using namespace entropix;
using namespace entropix::fock;

namespace {

const ChainSpec kConstant = ChainSpec::constant(1.0, 0.0, 1.0, 2.0);
const ChainSpec kConstantLam = ChainSpec::constant(1.0, 0.3, 1.0, 2.0);
const ChainSpec kStep = ChainSpec::step_J(0.5, 1.0, 0.0, 1.0, 2.0);

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("N=2 single-bond chain has spectrum {-1, 0, 0, 1}") {
    const auto ops = spin_hamiltonians(kConstant, Interval(0, 1));
    const EigenSystem es = eig(ops.H);
    CHECK(es.values[0] == doctest::Approx(-1.0));
    CHECK(es.values[1] == doctest::Approx(0.0));
    CHECK(es.values[2] == doctest::Approx(0.0));
    CHECK(es.values[3] == doctest::Approx(1.0));
    CHECK(max_abs(ops.H - ops.H_l - ops.H_r - ops.V) < 1e-14);
}

TEST_CASE("single left site: H_l = lambda/2 sigma3 with eigenvalues +-lambda/2") {
    const ChainSpec s = ChainSpec::constant(1.0, 0.8, 1.0, 2.0);
    const auto ops = spin_hamiltonians(s, Interval(0, 1));
    const EigenSystem es = eig(ops.H_l);
    CHECK(es.values[0] == doctest::Approx(-0.4));
    CHECK(es.values[es.values.size() - 1] == doctest::Approx(0.4));
}

TEST_CASE("jw_fermions satisfy the CAR") {
    const int n = 4;
    const auto a = jw_fermions(n);
    const Matrix id = Matrix::Identity(1 << n, 1 << n);
    for (int x = 0; x < n; ++x) {
        for (int y = 0; y < n; ++y) {
            const Matrix anti = a[x] * a[y].adjoint() + a[y].adjoint() * a[x];
            const Matrix anti2 = a[x] * a[y] + a[y] * a[x];
            CHECK(max_abs(anti - (x == y ? id : Matrix::Zero(1 << n, 1 << n))) < 1e-13);
            CHECK(max_abs(anti2) < 1e-13);
        }
    }
    // JW strings square to the identity
    Matrix string = id;
    for (int y = 0; y < n - 1; ++y) {
        string = string * (2.0 * a[y].adjoint() * a[y] - id);
    }
    CHECK(max_abs(string * string - id) < 1e-12);
}

TEST_CASE("JW consistency: spin-built operators equal dGamma-built counterparts") {
    // The sigma3-string convention carries the alternating gauge D = diag((-1)^x):
    // H_spin = dGamma(D h D) - (sum lambda_x / 2) * 1 exactly. D is diagonal and
    // commutes with the left/right split, so every functional is unaffected.
    for (const ChainSpec& spec : {kConstant, kConstantLam, kStep}) {
        const Interval iv(-2, 3);
        const int n = iv.size();
        const auto ops = spin_hamiltonians(spec, iv);
        const ConfinedSystem sys = assemble(spec, iv);
        const auto a = jw_fermions(n);
        const int dim = 1 << n;

        Matrix gauge = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) gauge(i, i) = (iv.lo + i) % 2 == 0 ? 1.0 : -1.0;
        const auto gauged = [&](const Matrix& one_body) { return gauge * one_body * gauge; };

        double lambda_sum = 0.0;
        for (int x = iv.lo; x <= iv.hi; ++x) lambda_sum += spec.lambda(x);
        double lambda_sum_l = 0.0;
        for (int x = iv.lo; x <= 0; ++x) lambda_sum_l += spec.lambda(x);

        const Matrix id = Matrix::Identity(dim, dim);
        CHECK(max_abs(ops.H - second_quantize(a, gauged(sys.h)) + 0.5 * lambda_sum * id) < 1e-12);
        CHECK(max_abs(ops.H_l - second_quantize(a, gauged(sys.h_l)) + 0.5 * lambda_sum_l * id) <
              1e-12);
        CHECK(max_abs(ops.V - second_quantize(a, gauged(sys.v))) < 1e-12);
        CHECK(max_abs(ops.Phi_l - second_quantize(a, gauged(flux_onebody_l(sys)))) < 1e-12);
        CHECK(max_abs(ops.Phi_r - second_quantize(a, gauged(flux_onebody_r(sys)))) < 1e-12);
        CHECK(max_abs(ops.sigma - second_quantize(a, gauged(sigma_onebody(sys)))) < 1e-12);
        // explicit fermionic flux expressions (quadratic in the JW modes)
        CHECK(max_abs(ops.Phi_l - flux_l_fermionic(spec, iv)) < 1e-12);
        CHECK(max_abs(ops.Phi_r - flux_r_fermionic(spec, iv)) < 1e-12);
        // gauge invariance of the spectra: dGamma(h) and dGamma(DhD) agree as multisets
        const EigenSystem plain = eig(second_quantize(a, sys.h));
        const EigenSystem conj = eig(second_quantize(a, gauged(sys.h)));
        CHECK((plain.values - conj.values).cwiseAbs().maxCoeff() < 1e-11);
    }
}

TEST_CASE("dGamma(identity) is the number operator with spectrum {0..N}") {
    const int n = 3;
    const auto a = jw_fermions(n);
    const EigenSystem es = eig(second_quantize(a, Matrix::Identity(n, n)));
    CHECK(es.values[0] == doctest::Approx(0.0));
    CHECK(es.values[es.values.size() - 1] == doctest::Approx(3.0));
}

TEST_CASE("tr Gamma(e^A) = det(1 + e^A) for random Hermitian A (N=4)") {
    std::srand(7);
    Matrix a = Matrix::Random(4, 4);
    a = hermitize(a);
    const auto fermis = jw_fermions(4);
    const Matrix big = second_quantize(fermis, a);
    const EigenSystem big_es = eig(big);
    double trace = 0.0;
    for (Eigen::Index i = 0; i < big_es.values.size(); ++i) {
        trace += std::exp(big_es.values[i]);
    }
    const double det = std::exp(logdet_one_plus_psd(apply_fn(a, [](double x) {
        return std::exp(x);
    })));
    CHECK(trace == doctest::Approx(det).epsilon(1e-11));
}

TEST_CASE("density matrix: positive, normalized, commutes with H_l and H_r") {
    const Interval iv(-2, 3);
    const Matrix omega = density_matrix(kConstantLam, iv);
    CHECK(std::abs(omega.trace().real() - 1.0) < 1e-12);
    const EigenSystem es = eig(omega);
    CHECK(es.values.minCoeff() > 0.0);
    const auto ops = spin_hamiltonians(kConstantLam, iv);
    CHECK(max_abs(omega * ops.H_l - ops.H_l * omega) < 1e-12);
    CHECK(max_abs(omega * ops.H_r - ops.H_r * omega) < 1e-12);
}

TEST_CASE("near-infinite temperature the state is maximally mixed") {
    const ChainSpec hot = ChainSpec::constant(1.0, 0.0, 1e-6, 1e-6);
    const Interval iv(-1, 2);
    const Matrix omega = density_matrix(hot, iv);
    CHECK(max_abs(omega - Matrix::Identity(16, 16) / 16.0) < 1e-5);
}

TEST_CASE("flux observables equal i[H_{l/r}, V] and change sign under time reversal") {
    const Interval iv(-2, 3);
    const auto ops = spin_hamiltonians(kStep, iv);
    // sigma = -beta_l Phi_l - beta_r Phi_r by construction; check Hermiticity
    CHECK(is_hermitian(ops.Phi_l));
    CHECK(is_hermitian(ops.Phi_r));
    CHECK(is_hermitian(ops.sigma));
    CHECK(max_abs(ops.sigma + kStep.beta_l * ops.Phi_l + kStep.beta_r * ops.Phi_r) < 1e-14);
}

TEST_CASE("Sigma^t: exact (S_t - S)/t form matches Riemann-sum time integration") {
    const Interval iv(-2, 3);
    const double t = 1.3;
    const auto ops = spin_hamiltonians(kConstant, iv);
    const Matrix sigma_exact = mean_entropy_production(kConstant, iv, t);
    // (1/t) int_0^t sigma_s ds by Simpson's rule
    const int steps = 200;
    const EigenSystem h_es = eig(ops.H);
    Matrix acc = Matrix::Zero(ops.H.rows(), ops.H.cols());
    for (int i = 0; i <= steps; ++i) {
        const double s = t * i / steps;
        const Matrix u = propagator(h_es, s);
        const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        acc += w * (u * ops.sigma * u.adjoint());
    }
    acc *= t / (3.0 * steps) / t;
    CHECK(max_abs(acc - sigma_exact) < 1e-6);
}

TEST_CASE("tau^t(Sigma^{-t}) = Sigma^t entrywise") {
    const Interval iv(-2, 3);
    const double t = 0.9;
    const auto ops = spin_hamiltonians(kConstantLam, iv);
    const EigenSystem h_es = eig(ops.H);
    const Matrix u = propagator(h_es, t);
    const Matrix sig_minus = mean_entropy_production(kConstantLam, iv, -t);
    const Matrix sig_plus = mean_entropy_production(kConstantLam, iv, t);
    CHECK(max_abs(u * sig_minus * u.adjoint() - sig_plus) < 1e-11);
}

TEST_CASE("spectrum of Sigma^t is symmetric with matching multiplicities") {
    const Interval iv(-2, 3);
    const auto measure = sigma_spectral_measure(kConstant, iv, 1.7);
    const EigenSystem es = eig(mean_entropy_production(kConstant, iv, 1.7));
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        const double target = -es.values[i];
        double best = 1e30;
        for (Eigen::Index j = 0; j < es.values.size(); ++j) {
            best = std::min(best, std::abs(es.values[j] - target));
        }
        CHECK(best < 1e-9);
    }
    // second law: mean of the measure is nonnegative
    CHECK(measure.mean() >= -1e-12);
    CHECK(measure.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("FCS measure: normalized, detailed fluctuation relation holds atomwise") {
    const Interval iv(-2, 3);
    const double t = 2.0;
    const auto measure = fcs_distribution(kConstant, iv, t);
    CHECK(measure.total_weight() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(measure.exponential_moment(Complex(0, 0), t) - Complex(1, 0)) < 1e-12);
    for (const auto& [phi, w] : measure.atoms) {
        if (phi <= 0.0) continue;
        double w_neg = 0.0;
        for (const auto& [phi2, w2] : measure.atoms) {
            if (std::abs(phi2 + phi) < 1e-9) w_neg += w2;
        }
        CHECK(std::abs(w_neg - std::exp(-t * phi) * w) < 1e-10);
    }
}

TEST_CASE("naive ES relation fails at generic t on the spectral measure") {
    const Interval iv(-2, 3);
    const double t = 1.7;
    const auto measure = sigma_spectral_measure(kConstant, iv, t);
    double max_violation = 0.0;
    for (const auto& [phi, w] : measure.atoms) {
        if (phi <= 0.0) continue;
        double w_neg = 0.0;
        for (const auto& [phi2, w2] : measure.atoms) {
            if (std::abs(phi2 + phi) < 1e-9) w_neg += w2;
        }
        max_violation = std::max(max_violation, std::abs(w_neg - std::exp(-t * phi) * w));
    }
    CHECK(max_violation > 1e-6);
}

TEST_CASE("relative entropy: S(rho|rho) = 0, S(omega_t|omega) = -t omega(Sigma^t)") {
    const Interval iv(-2, 3);
    const double t = 1.5;
    const Matrix omega = density_matrix(kConstant, iv);
    CHECK(std::abs(relative_entropy(omega, omega)) < 1e-10);

    const auto ops = spin_hamiltonians(kConstant, iv);
    const Matrix u = propagator(eig(ops.H), -t); // Schroedinger evolution
    const Matrix omega_t = u * omega * u.adjoint();
    const double s_rel = relative_entropy(omega_t, omega);
    CHECK(s_rel <= 1e-12);
    const double rate = oracle_mean_ep_rate(kConstant, iv, t);
    CHECK(s_rel == doctest::Approx(-t * rate).epsilon(1e-9));
    // and against the one-particle route
    const ConfinedSystem sys = assemble(kConstant, iv);
    CHECK(rate == doctest::Approx(mean_ep_rate(sys, t)).epsilon(1e-9));
}

TEST_CASE("kernel violation yields the -inf sentinel") {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    Matrix nu = Matrix::Zero(2, 2);
    nu(1, 1) = 1.0;
    CHECK(std::isinf(relative_entropy(rho, nu)));
    CHECK(relative_entropy(rho, nu) < 0);
}

TEST_CASE("cap is enforced") {
    CHECK_THROWS_AS(jw_fermions(13), CapError);
    CHECK_THROWS_AS(spin_hamiltonians(kConstant, Interval(-8, 8)), CapError);
}
