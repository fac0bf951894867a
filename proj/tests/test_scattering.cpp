#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entropix/errors.hpp"
#include "entropix/scattering.hpp"

#include <cmath>

using namespace entropix;
using namespace entropix::scattering;

namespace {

const ChainSpec kConstant = ChainSpec::constant(1.0, 0.0, 1.0, 2.0);
const ChainSpec kStep = ChainSpec::step_J(0.5, 1.0, 0.0, 1.0, 2.0);
const ChainSpec kPeriodic = ChainSpec::periodic2(1.0, 2.0, 0.0, 0.0, 1.0, 2.0);

// independent oracle: truncate the half line at large depth and run the raw
// continued fraction at E + i eta
Complex truncated_cf(Side side, Complex z, const ChainSpec& spec, int depth) {
    Complex m(0.0, 0.0);
    if (side == Side::Right) {
        for (int x = depth; x >= 1; --x) {
            m = 1.0 / ((spec.lambda(x) - z) - spec.J(x) * spec.J(x) * m);
        }
    } else {
        for (int x = -depth; x <= 0; ++x) {
            m = 1.0 / ((spec.lambda(x) - z) - spec.J(x - 1) * spec.J(x - 1) * m);
        }
    }
    return m;
}

// The Dirichlet truncation converges only while eta * depth stays large, so the
// boundary value is reached by Richardson extrapolation in eta from heights
// where the depth-1e4 fraction has fully converged.
Complex cf_boundary_oracle(Side side, double E, const ChainSpec& spec) {
    const int depth = 10000;
    const double eta = 0.01;
    const Complex f1 = truncated_cf(side, Complex(E, eta), spec, depth);
    const Complex f2 = truncated_cf(side, Complex(E, eta / 2.0), spec, depth);
    const Complex f3 = truncated_cf(side, Complex(E, eta / 4.0), spec, depth);
    return (8.0 * f3 - 6.0 * f2 + f1) / 3.0;
}

} // namespace

TEST_CASE("constant-tail m-function: closed-form values at E = 0 and the band edges") {
    const Complex m0 = weyl_m(Side::Right, 0.0, kConstant);
    CHECK(std::abs(m0 - Complex(0.0, 1.0)) < 1e-12); // m = i, F = 1
    CHECK(std::abs(weyl_m(Side::Left, 0.0, kConstant) - Complex(0.0, 1.0)) < 1e-12);

    CHECK(std::abs(weyl_m(Side::Right, 2.0, kConstant) - Complex(-1.0, 0.0)) < 1e-12);
    CHECK(std::abs(weyl_m(Side::Right, -2.0, kConstant) - Complex(1.0, 0.0)) < 1e-12);

    for (double e : {2.5, -3.0, 7.7}) {
        CHECK(weyl_m(Side::Right, e, kConstant).imag() == 0.0); // no a.c. outside the band
        CHECK(weyl_m(Side::Left, e, kConstant).imag() == 0.0);
    }
}

TEST_CASE("m-function boundary values agree with the depth-1e4 truncation oracle") {
    // energies at least 0.3 away from any band edge (the extrapolation error
    // grows like a derivative of m there)
    const std::vector<std::pair<ChainSpec, std::vector<double>>> cases = {
        {kConstant, {0.0, 0.4, -0.8, 0.9}},
        {kStep, {0.0, 0.4, -0.6, 1.5}},
        {kPeriodic, {0.0, 0.4, 2.0, -1.7}},
    };
    for (const auto& [spec, energies] : cases) {
        for (double e : energies) {
            for (Side side : {Side::Left, Side::Right}) {
                const Complex direct = weyl_m(side, e, spec);
                const Complex oracle = cf_boundary_oracle(side, e, spec);
                CHECK(std::abs(direct - oracle) < 1e-5);
            }
        }
    }
}

TEST_CASE("Herglotz branch: Im m > 0 off the real axis and eta -> 0 is Cauchy") {
    for (const ChainSpec& spec : {kConstant, kStep, kPeriodic}) {
        for (double e : {0.0, 0.5, -0.7}) {
            const Complex boundary = weyl_m(Side::Right, e, spec);
            double prev = 1e30;
            for (double eta : {1e-2, 1e-4, 1e-6}) {
                const Complex m = weyl_m(Side::Right, Complex(e, eta), spec);
                CHECK(m.imag() > 0.0);
                const double dist = std::abs(m - boundary);
                CHECK(dist < prev + 1e-12);
                prev = dist;
            }
            CHECK(prev < 1e-4);
        }
    }
}

TEST_CASE("essential support: constant, disjoint bands, step, periodic") {
    const SupportSet full = essential_support(kConstant);
    REQUIRE(full.intervals.size() == 1);
    CHECK(full.intervals[0].first == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(full.intervals[0].second == doctest::Approx(2.0).epsilon(1e-9));

    // left band [-2,2], right band [3,7]: no common transport window
    const ChainSpec disjoint = ChainSpec::tabulated(TailModel::constant(1.0, 0.0),
                                                    TailModel::constant(1.0, 5.0), {}, 1.0, 2.0);
    CHECK(essential_support(disjoint).empty());

    const SupportSet step = essential_support(kStep);
    REQUIRE(step.intervals.size() == 1);
    CHECK(step.intervals[0].first == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(step.intervals[0].second == doctest::Approx(1.0).epsilon(1e-8));

    // period-2 bands: E^2 in [(J1-J2)^2, (J1+J2)^2]
    const auto bands = tail_bands(kPeriodic.left_tail);
    REQUIRE(bands.size() == 2);
    CHECK(bands[0].first == doctest::Approx(-3.0).epsilon(1e-8));
    CHECK(bands[0].second == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(bands[1].first == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(bands[1].second == doctest::Approx(3.0).epsilon(1e-8));
}

TEST_CASE("s-matrix: unitary and symmetric on the support, trivial off it") {
    for (const ChainSpec& spec : {kConstant, kStep, kPeriodic}) {
        const SupportSet support = essential_support(spec);
        for (const auto& [lo, hi] : support.intervals) {
            for (int k = 1; k < 40; ++k) {
                const double e = lo + (hi - lo) * k / 40.0;
                if (!support.contains(e, 1e-6)) continue;
                const ScatteringPoint pt = scattering_point(e, spec, support);
                CHECK(pt.in_support);
                CHECK(pt.F_l > 0.0);
                CHECK(pt.F_r > 0.0);
                const double unit = (pt.s.adjoint() * pt.s - Eigen::Matrix2cd::Identity())
                                        .cwiseAbs()
                                        .maxCoeff();
                CHECK(unit < 1e-9);
                CHECK(std::abs(pt.s(0, 1) - pt.s(1, 0)) < 1e-12);
            }
        }
        // outside both bands the matrix is the identity
        const ScatteringPoint far = scattering_point(25.0, spec, support);
        CHECK(!far.in_support);
        CHECK((far.s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("off-support but inside one band: diagonal with unimodular open channel") {
    // step chain: E in (1, 2) lies in the right band only
    const SupportSet support = essential_support(kStep);
    const ScatteringPoint pt = scattering_point(1.5, kStep, support);
    CHECK(!pt.in_support);
    CHECK(std::abs(pt.s(0, 1)) < 1e-12);
    CHECK(pt.F_l == 0.0);
    CHECK(pt.F_r > 0.0);
    CHECK(std::abs(std::abs(pt.s(1, 1)) - 1.0) < 1e-10);
    CHECK(std::abs(pt.s(0, 0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("reflectionless verdicts: constant yes, step no, identical periodic yes") {
    const auto c = reflectionless_test(kConstant);
    CHECK(c.verdict == ReflectionlessVerdict::Reflectionless);
    CHECK(c.max_deviation < 1e-9);

    const auto s = reflectionless_test(kStep);
    CHECK(s.verdict == ReflectionlessVerdict::NotReflectionless);
    CHECK(s.max_deviation > 0.01);

    const auto p = reflectionless_test(kPeriodic);
    CHECK(p.verdict == ReflectionlessVerdict::Reflectionless);
    CHECK(p.max_deviation < 1e-9);

    const ChainSpec disjoint = ChainSpec::tabulated(TailModel::constant(1.0, 0.0),
                                                    TailModel::constant(1.0, 5.0), {}, 1.0, 2.0);
    CHECK(reflectionless_test(disjoint).verdict == ReflectionlessVerdict::NoTransport);
}

TEST_CASE("step chain transmits partially: 0 < |s_lr|^2 < 1 inside the window") {
    const SupportSet support = essential_support(kStep);
    for (double e : {-0.9, -0.4, 0.0, 0.3, 0.8}) {
        const ScatteringPoint pt = scattering_point(e, kStep, support);
        const double trans = std::norm(pt.s(0, 1));
        CHECK(trans > 0.0);
        CHECK(trans < 1.0 - 1e-3);
    }
}

TEST_CASE("windowed chain keeps the tail support but changes the transmission") {
    const ChainSpec wiggled = ChainSpec::tabulated(
        TailModel::constant(1.0, 0.0), TailModel::constant(1.0, 0.0),
        {{-1, 1.0, 0.4}, {0, 0.8, -0.3}, {1, 1.0, 0.2}}, 1.0, 2.0);
    const SupportSet support = essential_support(wiggled);
    REQUIRE(support.intervals.size() == 1);
    CHECK(support.intervals[0].first == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(support.intervals[0].second == doctest::Approx(2.0).epsilon(1e-9));
    const auto refl = reflectionless_test(wiggled);
    CHECK(refl.verdict == ReflectionlessVerdict::NotReflectionless);
    // still unitary on shell
    for (double e : {-1.2, 0.1, 1.4}) {
        const ScatteringPoint pt = scattering_point(e, wiggled, support);
        CHECK((pt.s.adjoint() * pt.s - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <
              1e-9);
    }
}

TEST_CASE("F/pi matches the smoothed spectral density of the truncated half line") {
    // right half line on [1, 2000]: spectral measure of delta_1 against F/pi
    const int n = 2000;
    RealMatrix h = RealMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) h(i, i) = kConstant.lambda(1 + i);
    for (int i = 0; i + 1 < n; ++i) {
        h(i, i + 1) = kConstant.J(1 + i);
        h(i + 1, i) = kConstant.J(1 + i);
    }
    Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
    const RealVector evals = solver.eigenvalues();
    RealVector weights(n);
    for (int i = 0; i < n; ++i) weights[i] = solver.eigenvectors()(0, i) *
                                             solver.eigenvectors()(0, i);
    // histogram on [-2, 2] with bins wide enough to smooth the discreteness
    const int bins = 40;
    double sup_dev = 0.0;
    for (int b = 0; b < bins; ++b) {
        const double lo = -2.0 + 4.0 * b / bins;
        const double hi = lo + 4.0 / bins;
        double mass = 0.0;
        for (int i = 0; i < n; ++i) {
            if (evals[i] >= lo && evals[i] < hi) mass += weights[i];
        }
        const double density_est = mass / (hi - lo);
        const double density = weyl_m(Side::Right, 0.5 * (lo + hi), kConstant).imag() / M_PI;
        sup_dev = std::max(sup_dev, std::abs(density_est - density));
    }
    CHECK(sup_dev < 5e-2);
}

TEST_CASE("weyl_m rejects the lower half plane") {
    CHECK_THROWS_AS(weyl_m(Side::Right, Complex(0.0, -0.1), kConstant), ConfigError);
}
