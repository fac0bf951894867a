// scattering.hpp — boundary values of half-line Green's functions (Weyl
// m-functions) for constant/periodic tails, the on-shell 2x2 scattering matrix
//
//   s_ab(E) = delta_ab + 2i J_0 (J_0 <delta_abar,(h-E-i0)^{-1} delta_bbar>
//             + delta_ab - 1) sqrt(F_a F_b),
//
// the essential support of the absolutely continuous spectra, and the
// reflectionless criterion |s_lr(E)|^2 = 1 on it.
#pragma once

#include "entropix/chain.hpp"
#include "entropix/linalg.hpp"

#include <Eigen/Dense>

#include <vector>

namespace entropix::scattering {

enum class Side { Left, Right };

// Boundary value G(E + i0) of the half-line resolvent at the boundary site
// (site 0 for the left half-line, site 1 for the right). The tail closure is
// the exact fixed point of the one-period Moebius map; the explicit window is
// folded in by the finite continued fraction.
Complex weyl_m(Side side, double E, const ChainSpec& spec);

// Same at complex z in the closed upper half plane (used by the Herglotz
// property tests; the real-axis overload is the eta -> 0 limit).
Complex weyl_m(Side side, Complex z, const ChainSpec& spec);

struct SupportSet {
    std::vector<std::pair<double, double>> intervals; // disjoint, sorted
    double epsilon = 0.0;                             // membership threshold used

    bool contains(double E, double margin = 0.0) const;
    double total_measure() const;
    bool empty() const { return intervals.empty(); }
};

// Spectral bands of a half line with the given tail (window-independent)
std::vector<std::pair<double, double>> tail_bands(const TailModel& tail, double refine_tol = 1e-10);

struct SupportOptions {
    double eps_rel = 1e-8;      // membership epsilon relative to max F on the grid
    double refine_tol = 1e-10;  // bisection tolerance on band edges
    int scan_points = 4001;     // discriminant sign scan resolution
};

// E = intersection of the left and right essential supports
SupportSet essential_support(const ChainSpec& spec, const SupportOptions& opts = {});

struct ScatteringPoint {
    double E = 0.0;
    Complex G_l, G_r;
    double F_l = 0.0, F_r = 0.0;
    Eigen::Matrix2cd s;
    bool in_support = false;
};

ScatteringPoint scattering_point(double E, const ChainSpec& spec, const SupportSet& support);
// convenience: computes the support first
ScatteringPoint scattering_point(double E, const ChainSpec& spec);

enum class ReflectionlessVerdict { Reflectionless, NotReflectionless, NoTransport };

struct ReflectionlessResult {
    ReflectionlessVerdict verdict = ReflectionlessVerdict::NoTransport;
    double max_deviation = 0.0; // max over the grid of |1 - |s_lr|^2|
};

ReflectionlessResult reflectionless_test(const ChainSpec& spec, double eps_refl = 1e-8,
                                         int grid_per_band = 2001);

} // namespace entropix::scattering
