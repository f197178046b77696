#pragma once

#include <cstdint>
#include <vector>

#include "skewer/types.hpp"

namespace skewer {

// Per-arm ridge statistics. A starts at lambda*I and only ever receives
// non-negative-weight rank-one additions, so it stays symmetric positive
// definite; theta is kept equal to A^{-1} b after every update.
class ArmState {
public:
    ArmState() = default;
    ArmState(int d, double lambda);

    int dim() const { return d_; }
    const std::vector<double>& a_matrix() const { return a_; }
    const std::vector<double>& b_vector() const { return b_; }
    const std::vector<double>& theta() const { return theta_; }

    // A += (1/p) phi phi^T, b += (c/p) phi, theta = A^{-1} b.
    void update(const double* phi, double loss, double propensity);

    // theta . phi
    double predict(const double* phi) const;

    // sqrt(phi^T A^{-1} phi)
    double confidence_width(const double* phi) const;

    // Direct field access for checkpoint loading; recomputes nothing, the
    // caller provides a consistent (A, b, theta) triple.
    void restore(std::vector<double> a, std::vector<double> b, std::vector<double> theta);

private:
    const std::vector<double>& factor() const;

    int d_ = 0;
    std::vector<double> a_;      // row-major d x d
    std::vector<double> b_;
    std::vector<double> theta_;
    mutable std::vector<double> chol_;  // cached Cholesky factor of A
    mutable bool chol_valid_ = false;
};

struct PolicyState {
    HyperParams hyper;
    std::vector<ArmState> arms;
    std::uint64_t rounds_learned = 0;
};

// Every arm gets A = lambda*I, b = 0, theta = 0.
PolicyState init_policy(const HyperParams& hyper);

// Entry a is theta_a . phi(x). Pure.
std::vector<double> predict_losses(const PolicyState& policy, const Context& ctx);

// One bandit-feedback observation for arm `action`, importance-weighted by
// 1/propensity. Binary losses in live use; real-valued imputed losses are
// accepted in simulation.
void learn(PolicyState& policy, const Context& ctx, ActionId action, double loss,
           double propensity);

// argmin of predict_losses, lowest index on ties.
ActionId greedy_action(const PolicyState& policy, const Context& ctx);

// Greedy arm gets epsilon/k + (1 - epsilon), every other arm epsilon/k.
ActionDistribution epsilon_greedy_distribution(const PolicyState& policy, const Context& ctx,
                                               double epsilon);

struct LinUcbScore {
    double estimate = 0.0;  // theta_a . phi
    double width = 0.0;     // alpha * sqrt(phi^T A_a^{-1} phi)
};

// Estimate and width are returned separately so callers can form the loss
// LCB (estimate - width, used for selection) or a success-probability UCB
// (1 - LCB, clamped to [0,1]) for reporting.
std::vector<LinUcbScore> linucb_scores(const PolicyState& policy, const Context& ctx,
                                       double alpha);

double success_probability_ucb(const LinUcbScore& score);

// argmin of (estimate - width) with lowest-index tie-break. The returned
// distribution is one-hot: the selector is deterministic, so the propensity
// fed to learn is 1.
std::pair<ActionId, ActionDistribution> linucb_select(const PolicyState& policy,
                                                      const Context& ctx, double alpha);

// Exploration strategy selector for the interaction protocol.
struct Strategy {
    enum class Kind { greedy, epsilon_greedy, linucb };
    Kind kind = Kind::greedy;
    double epsilon = 0.0;  // epsilon_greedy only
    double alpha = 0.0;    // linucb only

    static Strategy greedy() { return {Kind::greedy, 0.0, 0.0}; }
    static Strategy epsilon_greedy(double eps) { return {Kind::epsilon_greedy, eps, 0.0}; }
    static Strategy linucb(double alpha) { return {Kind::linucb, 0.0, alpha}; }
};

const char* strategy_name(Strategy::Kind kind);

}  // namespace skewer
