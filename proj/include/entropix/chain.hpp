// chain.hpp — XY-chain coefficient sequences {J_x}, {lambda_x} with structured
// tails, reservoir temperatures, and finite restrictions to intervals.
//
// Conventions:
//   * J_x couples sites x and x+1; J_0 is the cut bond entering the coupling v.
//   * The left/right split is always between sites 0 and 1.
//   * Periodic tails are anchored so the pattern index of site x is x mod period
//     (non-negative residue), i.e. the residue is 0 at x = 0.
#pragma once

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace entropix {

struct TailModel {
    enum class Kind { Constant, Periodic };

    Kind kind = Kind::Constant;
    std::vector<double> J;      // bond couplings over one period, all nonzero
    std::vector<double> lambda; // on-site fields over one period

    int period() const { return static_cast<int>(J.size()); }
    double J_at(long long x) const;
    double lambda_at(long long x) const;
    void validate() const;

    static TailModel constant(double J, double lambda);
    static TailModel periodic(std::vector<double> J, std::vector<double> lambda);
};

// Finite interval [lo, hi] with the cut between sites 0 and 1 inside it.
struct Interval {
    int lo = 0;
    int hi = 1;

    Interval() = default;
    Interval(int lo_, int hi_);
    int size() const { return hi - lo + 1; }
    // [-M, M]
    static Interval symmetric(int M) { return Interval(-M, M); }
};

struct WindowEntry {
    int x;
    double J;
    double lambda;
};

struct ChainSpec {
    TailModel left_tail;            // sites x < window (or x <= 0 with empty window)
    TailModel right_tail;           // sites x > window (or x >= 1 with empty window)
    std::vector<WindowEntry> window; // explicit finite perturbation, contiguous sites
    double beta_l = 1.0;
    double beta_r = 1.0;

    double J(long long x) const;
    double lambda(long long x) const;
    void validate() const;
    bool has_window() const { return !window.empty(); }
    int window_min() const;
    int window_max() const;

    // --- presets (section "Examples" chain classes) ---
    static ChainSpec constant(double J, double lambda, double beta_l, double beta_r);
    static ChainSpec step_J(double J_left, double J_right, double lambda, double beta_l,
                            double beta_r);
    static ChainSpec periodic2(double J1, double J2, double lambda1, double lambda2,
                               double beta_l, double beta_r);
    static ChainSpec tabulated(TailModel left, TailModel right, std::vector<WindowEntry> window,
                               double beta_l, double beta_r);

    static ChainSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct ChainCoefficients {
    std::vector<double> J;      // size N-1, J[i] couples sites lo+i and lo+i+1
    std::vector<double> lambda; // size N
};

ChainCoefficients restrict_chain(const ChainSpec& spec, const Interval& iv);

} // namespace entropix
