#include "entropix/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace entropix {

namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK constants)
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

const double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

const double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    // abscissae ordered as in QUADPACK: odd indices are the embedded Gauss points
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    fv[7] = f(c);
    double kronrod = kWgk[7] * fv[7];
    double gauss = kWg[3] * fv[7];
    for (int j = 0; j < 7; ++j) {
        kronrod += kWgk[j] * (fv[j] + fv[14 - j]);
        if (j % 2 == 1) gauss += kWg[j / 2] * (fv[j] + fv[14 - j]);
    }
    Panel p;
    p.a = a;
    p.b = b;
    p.value = kronrod * h;
    p.error = std::abs((kronrod - gauss) * h);
    return p;
}

} // namespace

QuadResult adaptive_gauss_kronrod(const std::function<double(double)>& f, double a, double b,
                                  const QuadOptions& opts) {
    QuadResult result;
    if (!(b > a)) {
        result.converged = true;
        return result;
    }

    // geometric pre-split toward both endpoints
    std::vector<double> cuts;
    cuts.push_back(a);
    const double mid = 0.5 * (a + b);
    for (int j = opts.edge_levels; j >= 1; --j) {
        cuts.push_back(a + (mid - a) * std::ldexp(1.0, -j));
    }
    cuts.push_back(mid);
    for (int j = 1; j <= opts.edge_levels; ++j) {
        cuts.push_back(b - (b - mid) * std::ldexp(1.0, -j));
    }
    cuts.push_back(b);

    std::priority_queue<Panel> panels;
    double total = 0.0, err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        Panel p = evaluate_panel(f, cuts[i], cuts[i + 1]);
        result.evaluations += 15;
        total += p.value;
        err += p.error;
        panels.push(p);
    }

    int npanels = static_cast<int>(cuts.size()) - 1;
    while (err > opts.abs_tol && npanels < opts.max_panels) {
        Panel worst = panels.top();
        panels.pop();
        total -= worst.value;
        err -= worst.error;
        const double m = 0.5 * (worst.a + worst.b);
        if (m <= worst.a || m >= worst.b) {
            // interval at roundoff width, keep its estimate and move on
            total += worst.value;
            break;
        }
        for (const auto& half : {evaluate_panel(f, worst.a, m), evaluate_panel(f, m, worst.b)}) {
            result.evaluations += 15;
            total += half.value;
            err += half.error;
            panels.push(half);
        }
        ++npanels;
    }

    result.value = total;
    result.error_estimate = err;
    result.converged = err <= opts.abs_tol;
    return result;
}

GaussLegendreRule gauss_legendre(int n) {
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Newton on P_n from the Chebyshev-based initial guess
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        // map [-1,1] -> [0,1]
        rule.nodes[i] = 0.5 * (1.0 - x);
        rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
        rule.weights[i] = 0.5 * w;
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

} // namespace entropix
