#include "entropix/chain.hpp"
#include "entropix/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace entropix {

namespace {

int positive_mod(long long x, int q) {
    const long long r = x % q;
    return static_cast<int>(r < 0 ? r + q : r);
}

void check_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw ConfigError(std::string(what) + " must be finite");
}

} // namespace

double TailModel::J_at(long long x) const {
    return J[positive_mod(x, period())];
}

double TailModel::lambda_at(long long x) const {
    return lambda[positive_mod(x, period())];
}

void TailModel::validate() const {
    if (J.empty() || J.size() != lambda.size()) {
        throw ConfigError("tail model: J and lambda lists must be nonempty and equally long");
    }
    if (kind == Kind::Constant && J.size() != 1) {
        throw ConfigError("tail model: constant tail must have period 1");
    }
    for (double j : J) {
        check_finite(j, "tail J");
        if (j == 0.0) throw ConfigError("tail model: zero coupling J_x = 0 is not allowed");
    }
    for (double l : lambda) check_finite(l, "tail lambda");
}

TailModel TailModel::constant(double J, double lambda) {
    TailModel t;
    t.kind = Kind::Constant;
    t.J = {J};
    t.lambda = {lambda};
    t.validate();
    return t;
}

TailModel TailModel::periodic(std::vector<double> J, std::vector<double> lambda) {
    TailModel t;
    t.kind = Kind::Periodic;
    t.J = std::move(J);
    t.lambda = std::move(lambda);
    t.validate();
    return t;
}

Interval::Interval(int lo_, int hi_) : lo(lo_), hi(hi_) {
    if (!(lo <= 0 && 0 < hi)) {
        throw ConfigError("interval must satisfy lo <= 0 < hi (cut between sites 0 and 1)");
    }
}

int ChainSpec::window_min() const {
    return has_window() ? window.front().x : 1;
}

int ChainSpec::window_max() const {
    return has_window() ? window.back().x : 0;
}

double ChainSpec::J(long long x) const {
    if (has_window() && x >= window_min() && x <= window_max()) {
        return window[static_cast<std::size_t>(x - window_min())].J;
    }
    if (x < window_min()) return left_tail.J_at(x);
    return right_tail.J_at(x);
}

double ChainSpec::lambda(long long x) const {
    if (has_window() && x >= window_min() && x <= window_max()) {
        return window[static_cast<std::size_t>(x - window_min())].lambda;
    }
    if (x < window_min()) return left_tail.lambda_at(x);
    return right_tail.lambda_at(x);
}

void ChainSpec::validate() const {
    left_tail.validate();
    right_tail.validate();
    if (!(beta_l > 0) || !(beta_r > 0)) {
        throw ConfigError("inverse temperatures must be strictly positive");
    }
    check_finite(beta_l, "beta_l");
    check_finite(beta_r, "beta_r");
    for (std::size_t i = 0; i < window.size(); ++i) {
        if (i > 0 && window[i].x != window[i - 1].x + 1) {
            throw ConfigError("window sites must be contiguous and ascending");
        }
        check_finite(window[i].J, "window J");
        check_finite(window[i].lambda, "window lambda");
        if (window[i].J == 0.0) throw ConfigError("window: zero coupling J_x = 0 is not allowed");
    }
}

ChainSpec ChainSpec::constant(double J, double lambda, double beta_l, double beta_r) {
    ChainSpec s;
    s.left_tail = TailModel::constant(J, lambda);
    s.right_tail = TailModel::constant(J, lambda);
    s.beta_l = beta_l;
    s.beta_r = beta_r;
    s.validate();
    return s;
}

ChainSpec ChainSpec::step_J(double J_left, double J_right, double lambda, double beta_l,
                            double beta_r) {
    ChainSpec s;
    // the cut bond J_0 sits at x = 0 and therefore takes the left value
    s.left_tail = TailModel::constant(J_left, lambda);
    s.right_tail = TailModel::constant(J_right, lambda);
    s.beta_l = beta_l;
    s.beta_r = beta_r;
    s.validate();
    return s;
}

ChainSpec ChainSpec::periodic2(double J1, double J2, double lambda1, double lambda2,
                               double beta_l, double beta_r) {
    ChainSpec s;
    s.left_tail = TailModel::periodic({J1, J2}, {lambda1, lambda2});
    s.right_tail = s.left_tail;
    s.beta_l = beta_l;
    s.beta_r = beta_r;
    s.validate();
    return s;
}

ChainSpec ChainSpec::tabulated(TailModel left, TailModel right, std::vector<WindowEntry> window,
                               double beta_l, double beta_r) {
    ChainSpec s;
    s.left_tail = std::move(left);
    s.right_tail = std::move(right);
    s.window = std::move(window);
    s.beta_l = beta_l;
    s.beta_r = beta_r;
    s.validate();
    return s;
}

ChainCoefficients restrict_chain(const ChainSpec& spec, const Interval& iv) {
    ChainCoefficients c;
    const int n = iv.size();
    c.lambda.resize(n);
    c.J.resize(n - 1);
    for (int i = 0; i < n; ++i) c.lambda[i] = spec.lambda(iv.lo + i);
    for (int i = 0; i + 1 < n; ++i) c.J[i] = spec.J(iv.lo + i);
    return c;
}

// ---- JSON ----

namespace {

TailModel tail_from_json(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::string kind = j.value("kind", "constant");
    std::vector<double> J, lambda;
    if (j.contains("J") && j["J"].is_array()) {
        J = j["J"].get<std::vector<double>>();
    } else if (j.contains("J")) {
        J = {j["J"].get<double>()};
    } else {
        throw ConfigError(where + ": missing field 'J'");
    }
    if (j.contains("lambda") && j["lambda"].is_array()) {
        lambda = j["lambda"].get<std::vector<double>>();
    } else if (j.contains("lambda")) {
        lambda = {j["lambda"].get<double>()};
    } else {
        lambda.assign(J.size(), 0.0);
    }
    if (kind == "constant") {
        if (J.size() != 1 || lambda.size() != 1) {
            throw ConfigError(where + ": constant tail takes scalar J, lambda");
        }
        return TailModel::constant(J[0], lambda[0]);
    }
    if (kind == "periodic") return TailModel::periodic(std::move(J), std::move(lambda));
    throw ConfigError(where + ": unknown tail kind '" + kind + "'");
}

nlohmann::json tail_to_json(const TailModel& t) {
    nlohmann::json j;
    j["kind"] = t.kind == TailModel::Kind::Constant ? "constant" : "periodic";
    j["J"] = t.J;
    j["lambda"] = t.lambda;
    return j;
}

} // namespace

ChainSpec ChainSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("chain: expected an object");
    const double beta_l = j.value("beta_l", 1.0);
    const double beta_r = j.value("beta_r", 1.0);
    if (j.contains("preset")) {
        const std::string preset = j["preset"].get<std::string>();
        if (preset == "constant") {
            return ChainSpec::constant(j.value("J", 1.0), j.value("lambda", 0.0), beta_l, beta_r);
        }
        if (preset == "step_J") {
            return ChainSpec::step_J(j.value("J_left", 0.5), j.value("J_right", 1.0),
                                     j.value("lambda", 0.0), beta_l, beta_r);
        }
        if (preset == "periodic2") {
            std::vector<double> J = j.value("J", std::vector<double>{1.0, 2.0});
            std::vector<double> lam = j.value("lambda", std::vector<double>{0.0, 0.0});
            if (J.size() != 2 || lam.size() != 2) {
                throw ConfigError("chain.periodic2: J and lambda must be pairs");
            }
            return ChainSpec::periodic2(J[0], J[1], lam[0], lam[1], beta_l, beta_r);
        }
        if (preset != "tabulated") {
            throw ConfigError("chain.preset: unknown preset '" + preset + "'");
        }
    }
    // tabulated / explicit form
    if (!j.contains("left_tail") || !j.contains("right_tail")) {
        throw ConfigError("chain: explicit form needs 'left_tail' and 'right_tail'");
    }
    std::vector<WindowEntry> window;
    if (j.contains("window")) {
        for (const auto& row : j["window"]) {
            if (!row.is_array() || row.size() != 3) {
                throw ConfigError("chain.window: each entry must be [x, J, lambda]");
            }
            window.push_back({row[0].get<int>(), row[1].get<double>(), row[2].get<double>()});
        }
        std::sort(window.begin(), window.end(),
                  [](const WindowEntry& a, const WindowEntry& b) { return a.x < b.x; });
    }
    return ChainSpec::tabulated(tail_from_json(j["left_tail"], "chain.left_tail"),
                                tail_from_json(j["right_tail"], "chain.right_tail"),
                                std::move(window), beta_l, beta_r);
}

nlohmann::json ChainSpec::to_json() const {
    nlohmann::json j;
    j["preset"] = "tabulated";
    j["left_tail"] = tail_to_json(left_tail);
    j["right_tail"] = tail_to_json(right_tail);
    auto rows = nlohmann::json::array();
    for (const auto& w : window) rows.push_back({w.x, w.J, w.lambda});
    j["window"] = rows;
    j["beta_l"] = beta_l;
    j["beta_r"] = beta_r;
    return j;
}

} // namespace entropix
