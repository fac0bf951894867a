// quadrature.hpp — adaptive Gauss–Kronrod panels (for the energy integrals over
// the transport window, whose integrands die like sqrt(edge distance)) and
// Gauss–Legendre rules for the smooth u-integrals of the derivative trace formulas.
#pragma once

#include <functional>
#include <vector>

namespace entropix {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
    bool converged = false;
};

struct QuadOptions {
    double abs_tol = 1e-9;
    int max_panels = 6000;
    // number of geometric pre-splits toward each endpoint; resolves band-edge
    // sqrt behavior before adaptivity kicks in
    int edge_levels = 18;
};

// Integrate f over [a, b]; never throws on non-convergence, reports it in the
// result so callers can decide (sweeps keep going, single evaluations throw).
QuadResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                  const QuadOptions& opts = {});

// n-point Gauss–Legendre nodes/weights on [0, 1]
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
GaussLegendreRule gauss_legendre(int n);

} // namespace entropix
