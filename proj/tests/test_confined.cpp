#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "entropix/confined.hpp"
#include "entropix/errors.hpp"
#include "entropix/fock.hpp"

#include <cmath>

using namespace entropix;

namespace {

const ChainSpec kConstant = ChainSpec::constant(1.0, 0.0, 1.0, 2.0);
const ChainSpec kConstantLam = ChainSpec::constant(1.0, 0.3, 1.0, 2.0);
const ChainSpec kStep = ChainSpec::step_J(0.5, 1.0, 0.0, 1.0, 2.0);
const ChainSpec kEquilibrium = ChainSpec::constant(1.0, 0.0, 1.0, 1.0);

double max_abs(const Matrix& a) { return a.cwiseAbs().maxCoeff(); }

} // namespace

TEST_CASE("assemble: blocks, cut bond, and exact splitting h = h_l + h_r + v") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-1, 2));
    REQUIRE(sys.dim() == 4);
    CHECK(sys.J0 == 1.0);
    CHECK(max_abs(sys.h - sys.h_l - sys.h_r - sys.v) == 0.0);
    CHECK(sys.v(1, 2) == Complex(1.0, 0.0)); // sites 0 <-> 1
    CHECK(sys.v(2, 1) == Complex(1.0, 0.0));
    CHECK(sys.h_l.bottomRightCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
    CHECK(sys.h_r.topLeftCorner(2, 2).cwiseAbs().maxCoeff() == 0.0);
    // k = -beta_l h_l - beta_r h_r commutes with h_0
    const Matrix h0 = sys.h_l + sys.h_r;
    CHECK(max_abs(sys.k * h0 - h0 * sys.k) < 1e-14);

    const ConfinedSystem step = assemble(kStep, Interval(-2, 2));
    CHECK(step.J0 == 0.5);
}

TEST_CASE("evolve_k: t = 0 identity, spectrum and trace preserved") {
    const ConfinedSystem sys = assemble(kConstantLam, Interval(-3, 3));
    CHECK(max_abs(evolve_k(sys, 0.0) - sys.k) == 0.0);
    const Matrix kt = evolve_k(sys, 1.7);
    CHECK(std::abs(kt.trace().real() - sys.k.trace().real()) < 1e-12);
    const EigenSystem a = eig(kt);
    const EigenSystem b = eig(sys.k);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("es_t: alpha = 0 vanishes, positive at alpha = 1 for generic t") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-12, 12));
    CHECK(es_t(sys, 0.0, 2.0) == 0.0);
    CHECK(es_t(sys, 1.0, 1.7) > 1e-6);
    CHECK(es_t(sys, 1.0, 2.3) > 1e-6);
}

TEST_CASE("fock oracle equivalence on 7 sites (iv = [-3,3])") {
    const Interval iv(-3, 3);
    const double t = 2.0;
    for (const ChainSpec& spec : {kConstant, kStep}) {
        const ConfinedSystem sys = assemble(spec, iv);
        CHECK(es_t(sys, 0.5, t) ==
              doctest::Approx(fock::oracle_es(spec, iv, 0.5, t)).epsilon(1e-10));
        for (double p : {0.5, 1.0, 2.0, 3.0}) {
            CHECK(ep_t(sys, p, 0.7, t) ==
                  doctest::Approx(fock::oracle_ep(spec, iv, p, 0.7, t)).epsilon(1e-10));
        }
        CHECK(einf_t(sys, 0.7, t) ==
              doctest::Approx(fock::oracle_einf(spec, iv, 0.7, t)).epsilon(1e-10));
        const Complex alpha(0.5, 0.3);
        const Complex lhs = fcs_char(sys, alpha, t);
        const Complex rhs = fock::oracle_fcs_char(spec, iv, alpha, t);
        CHECK(std::abs(lhs - rhs) < 1e-9);
        for (double s : {0.0, 1.0, 2.5}) {
            CHECK(gc_t(sys, 0.4, t, s) ==
                  doctest::Approx(fock::oracle_gc(spec, iv, 0.4, t, s)).epsilon(1e-10));
        }
    }
}

TEST_CASE("Kawasaki identity: e_{p,t}(1) = 0 and e_{p,t}(0) = 0 to 1e-10") {
    const ConfinedSystem sys = assemble(kStep, Interval(-6, 6));
    for (double p : {0.5, 1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()}) {
        for (double t : {0.7, 2.0}) {
            CHECK(std::abs(ep_t(sys, p, 0.0, t)) < 1e-10);
            CHECK(std::abs(ep_t(sys, p, 1.0, t)) < 1e-10);
        }
    }
}

TEST_CASE("symmetry e_{p,t}(alpha) = e_{p,t}(1-alpha) on an alpha grid") {
    const ConfinedSystem sys = assemble(kConstantLam, Interval(-5, 5));
    const double t = 1.4;
    for (double p : {0.5, 2.0, 7.0, std::numeric_limits<double>::infinity()}) {
        for (double alpha : {-1.0, -0.3, 0.2, 0.5, 0.9, 2.0}) {
            CHECK(ep_t(sys, p, alpha, t) ==
                  doctest::Approx(ep_t(sys, p, 1.0 - alpha, t)).epsilon(1e-10));
        }
    }
}

TEST_CASE("time symmetry in t -> -t for ES and EP") {
    const ConfinedSystem sys = assemble(kStep, Interval(-5, 5));
    for (double alpha : {0.3, 1.2}) {
        CHECK(es_t(sys, alpha, 1.8) == doctest::Approx(es_t(sys, alpha, -1.8)).epsilon(1e-11));
        CHECK(ep_t(sys, 2.0, alpha, 1.8) ==
              doctest::Approx(ep_t(sys, 2.0, alpha, -1.8)).epsilon(1e-11));
    }
}

TEST_CASE("p-monotonicity: p -> e_{p,t}(alpha) non-increasing, einf below") {
    const ConfinedSystem sys = assemble(kStep, Interval(-5, 5));
    const double alpha = 0.5, t = 1.5;
    const double inf_val = einf_t(sys, alpha, t);
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {0.5, 1.0, 2.0, 4.0, 8.0}) {
        const double v = ep_t(sys, p, alpha, t);
        CHECK(v <= prev + 1e-12);
        CHECK(v >= inf_val - 1e-12);
        prev = v;
    }
    // convergence of e_{p,t} to e_{inf,t} as p doubles
    double gap_prev = std::numeric_limits<double>::infinity();
    for (double p = 16.0; p <= 256.0; p *= 4.0) {
        const double gap = ep_t(sys, p, alpha, t) - inf_val;
        CHECK(gap >= -1e-12);
        CHECK(gap <= gap_prev + 1e-12);
        gap_prev = gap;
    }
    CHECK(gap_prev < 1e-2);
}

TEST_CASE("convexity: second divided differences nonnegative") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-5, 5));
    const double t = 1.5;
    std::vector<double> grid;
    for (int i = 0; i <= 12; ++i) grid.push_back(-1.0 + 0.25 * i);
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
        const double d2_es = es_t(sys, grid[i + 1], t) - 2.0 * es_t(sys, grid[i], t) +
                             es_t(sys, grid[i - 1], t);
        const double d2_ep = ep_t(sys, 2.0, grid[i + 1], t) - 2.0 * ep_t(sys, 2.0, grid[i], t) +
                             ep_t(sys, 2.0, grid[i - 1], t);
        CHECK(d2_es >= -1e-10);
        CHECK(d2_ep >= -1e-10);
    }
}

TEST_CASE("e_{2,t} equals the FCS characteristic function at real alpha") {
    const ConfinedSystem sys = assemble(kConstantLam, Interval(-6, 6));
    for (double alpha : {-0.4, 0.3, 1.1}) {
        const Complex chi = fcs_char(sys, Complex(alpha, 0.0), 2.0);
        CHECK(std::abs(chi.imag()) < 1e-10 * std::abs(chi.real()));
        CHECK(std::log(chi.real()) == doctest::Approx(ep_t(sys, 2.0, alpha, 2.0)).epsilon(1e-10));
    }
    CHECK(std::abs(fcs_char(sys, Complex(0.0, 0.0), 2.0) - Complex(1.0, 0.0)) < 1e-12);
}

TEST_CASE("gc_t: s = 0 reduces to es_t exactly; alpha = 0 vanishes for all s") {
    const ConfinedSystem sys = assemble(kStep, Interval(-6, 6));
    CHECK(gc_t(sys, 0.8, 1.5, 0.0) == es_t(sys, 0.8, 1.5));
    for (double s : {0.0, 1.0, 4.0}) CHECK(gc_t(sys, 0.0, 1.5, s) == 0.0);
    CHECK_THROWS_AS(gc_t(sys, 0.5, 1.0, -1.0), ConfigError);
}

TEST_CASE("gc_t stabilizes in s when the window respects causality") {
    // fixed (alpha, t); growing s with M >= M_0 + v_max (s + t)
    const double alpha = 0.5, t = 1.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (double s : {6.0, 8.0, 10.0}) {
        const int M = static_cast<int>(10 + 2.0 * (s + t));
        const ConfinedSystem sys = assemble(kConstant, Interval::symmetric(M));
        const double v = gc_t(sys, alpha, t, s);
        if (!std::isnan(prev)) CHECK(v == doctest::Approx(prev).epsilon(5e-4));
        prev = v;
    }
}

TEST_CASE("mean_ep_rate: nonnegative, matches finite differences and t -> -t") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-20, 20));
    const double t = 5.0;
    const double rate = mean_ep_rate(sys, t);
    CHECK(rate >= 0.0);
    // central difference of ES_t at alpha = 0 (step 1e-4, Richardson)
    const double h = 1e-4;
    const auto des = [&](double step) {
        return (es_t(sys, step, t) - es_t(sys, -step, t)) / (2.0 * step);
    };
    const double slope = (4.0 * des(h / 2.0) - des(h)) / 3.0;
    CHECK(rate == doctest::Approx(-slope / t).epsilon(1e-7));
    // ES_t = ES_{-t}, so the value extracted from the reversed-time functional
    // is the same; the raw observable average itself is odd in t
    const auto des_rev = [&](double step) {
        return (es_t(sys, step, -t) - es_t(sys, -step, -t)) / (2.0 * step);
    };
    const double slope_rev = (4.0 * des_rev(h / 2.0) - des_rev(h)) / 3.0;
    CHECK(rate == doctest::Approx(-slope_rev / t).epsilon(1e-7));
    CHECK(mean_ep_rate(sys, -t) == doctest::Approx(-rate).epsilon(1e-10));
    // equilibrium: still nonnegative (transient)
    const ConfinedSystem eq = assemble(kEquilibrium, Interval(-8, 8));
    CHECK(mean_ep_rate(eq, 2.0) >= -1e-13);
    CHECK_THROWS_AS(mean_ep_rate(sys, 0.0), ConfigError);
}

TEST_CASE("derivative matching: ep'(0) = es'(0) = -ep'(1) = -t omega(Sigma^t)") {
    const ConfinedSystem sys = assemble(kConstantLam, Interval(-6, 6));
    const double t = 1.5;
    const double target = -t * mean_ep_rate(sys, t);
    const double h = 1e-4;
    for (double p : {0.5, 2.0, std::numeric_limits<double>::infinity()}) {
        const auto dp = [&](double a0, double step) {
            return (ep_t(sys, p, a0 + step, t) - ep_t(sys, p, a0 - step, t)) / (2.0 * step);
        };
        const double d0 = (4.0 * dp(0.0, h / 2.0) - dp(0.0, h)) / 3.0;
        const double d1 = (4.0 * dp(1.0, h / 2.0) - dp(1.0, h)) / 3.0;
        CHECK(d0 == doctest::Approx(target).epsilon(1e-6));
        CHECK(d1 == doctest::Approx(-target).epsilon(1e-6));
    }
}

TEST_CASE("second derivative at 0: e_2 and ES agree") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-6, 6));
    const double t = 1.5, h = 1e-3;
    const auto d2 = [&](auto&& f, double step) {
        return (f(step) - 2.0 * f(0.0) + f(-step)) / (step * step);
    };
    const auto rich = [&](auto&& f) {
        return (16.0 * d2(f, h / 2.0) - d2(f, h)) / 15.0;
    };
    const double via_es = rich([&](double a) { return es_t(sys, a, t); });
    const double via_e2 = rich([&](double a) { return ep_t(sys, 2.0, a, t); });
    CHECK(via_es == doctest::Approx(via_e2).epsilon(1e-5));
}

TEST_CASE("es_derivative_trace matches finite differences of es_t") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-6, 6));
    const double t = 1.0;
    for (double alpha : {0.05, 0.6}) {
        const auto res = es_derivative_trace(sys, alpha, t);
        const double h = 1e-4;
        const auto des = [&](double step) {
            return (es_t(sys, alpha + step, t) - es_t(sys, alpha - step, t)) / (2.0 * step);
        };
        const double fd = (4.0 * des(h / 2.0) - des(h)) / 3.0;
        CHECK(res.value == doctest::Approx(fd).epsilon(1e-6));
    }
    // refinement self-consistency: 16 -> 32 nodes changes the result below 1e-8
    const auto refined = es_derivative_trace(sys, 0.3, t, 16, 1.0);
    CHECK(refined.nodes == 32);
    CHECK(refined.estimated_error < 1e-8);
}

TEST_CASE("i[k,h] is supported on the four sites around the cut") {
    const ConfinedSystem sys = assemble(kConstantLam, Interval(-5, 5));
    const Matrix comm = Complex(0, 1) * (sys.k * sys.h - sys.h * sys.k);
    for (int i = 0; i < sys.dim(); ++i) {
        for (int j = 0; j < sys.dim(); ++j) {
            const int site_i = sys.iv.lo + i;
            const int site_j = sys.iv.lo + j;
            if (site_i >= -1 && site_i <= 2 && site_j >= -1 && site_j <= 2) continue;
            CHECK(std::abs(comm(i, j)) < 1e-14);
        }
    }
    CHECK(max_abs(comm - sigma_onebody(sys)) < 1e-13);
}

TEST_CASE("M-stabilization: enlarging the interval beyond the causality window") {
    const double alpha = 0.6, t = 2.0; // v_max = 2, M_0 ~ 8
    const ConfinedSystem small = assemble(kConstant, Interval::symmetric(14));
    const ConfinedSystem big = assemble(kConstant, Interval::symmetric(28));
    CHECK(es_t(small, alpha, t) == doctest::Approx(es_t(big, alpha, t)).epsilon(1e-9));
    CHECK(ep_t(small, 2.0, alpha, t) ==
          doctest::Approx(ep_t(big, 2.0, alpha, t)).epsilon(1e-9));
    CHECK(einf_t(small, alpha, t) == doctest::Approx(einf_t(big, alpha, t)).epsilon(1e-9));
    // FCS moments stabilize too (first and second alpha-derivatives at 0)
    const auto moment = [&](const ConfinedSystem& sys, int order) {
        const double h = 1e-3;
        const auto f = [&](double a) { return ep_t(sys, 2.0, a, t); };
        return order == 1 ? (f(h) - f(-h)) / (2 * h)
                          : (f(h) - 2 * f(0) + f(-h)) / (h * h);
    };
    CHECK(moment(small, 1) == doctest::Approx(moment(big, 1)).epsilon(1e-7));
    CHECK(moment(small, 2) == doctest::Approx(moment(big, 2)).epsilon(1e-6));
}

TEST_CASE("time-averaged flux agrees with a quadrature of the instantaneous flux") {
    const ConfinedSystem sys = assemble(kConstant, Interval::symmetric(30));
    const double t0 = 2.0, t1 = 6.0;
    const int steps = 400;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        acc += w * instantaneous_flux_l(sys, t0 + (t1 - t0) * i / steps);
    }
    acc /= steps;
    CHECK(time_averaged_flux_l(sys, t0, t1) == doctest::Approx(acc).epsilon(1e-6));
}

TEST_CASE("ep_t rejects nonpositive p") {
    const ConfinedSystem sys = assemble(kConstant, Interval(-2, 2));
    CHECK_THROWS_AS(ep_t(sys, 0.0, 0.5, 1.0), ConfigError);
    CHECK_THROWS_AS(ep_t(sys, -2.0, 0.5, 1.0), ConfigError);
}
