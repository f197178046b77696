#include "skewer/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "skewer/errors.hpp"
#include "skewer/kernels.hpp"
#include "skewer/linalg.hpp"

namespace skewer {

namespace {

void check_features(const PolicyState& policy, const Context& ctx) {
    if (static_cast<int>(ctx.features.size()) != policy.hyper.d) {
        throw ValidationError("context has " + std::to_string(ctx.features.size()) +
                              " features, policy expects " + std::to_string(policy.hyper.d));
    }
    for (double v : ctx.features) {
        if (!std::isfinite(v)) throw ValidationError("context has a non-finite feature");
    }
}

void check_action(const PolicyState& policy, ActionId action) {
    if (action.index < 0 || action.index >= policy.hyper.k) {
        throw ValidationError("action index " + std::to_string(action.index) +
                              " out of range [0," + std::to_string(policy.hyper.k) + ")");
    }
}

int argmin_lowest_index(const std::vector<double>& values) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] < values[best]) best = i;
    }
    return best;
}

}  // namespace

ArmState::ArmState(int d, double lambda)
    : d_(d), a_(static_cast<std::size_t>(d) * d, 0.0), b_(d, 0.0), theta_(d, 0.0) {
    for (int i = 0; i < d; ++i) a_[static_cast<std::size_t>(i) * d + i] = lambda;
}

const std::vector<double>& ArmState::factor() const {
    if (!chol_valid_) {
        chol_.resize(a_.size());
        linalg::cholesky_factor(a_.data(), chol_.data(), d_);
        chol_valid_ = true;
    }
    return chol_;
}

void ArmState::update(const double* phi, double loss, double propensity) {
    const double w = 1.0 / propensity;
    kernels::rank1_update(a_.data(), phi, w, d_);
    kernels::axpy(loss * w, phi, b_.data(), d_);
    chol_valid_ = false;
    linalg::cholesky_solve(factor().data(), b_.data(), theta_.data(), d_);
}

double ArmState::predict(const double* phi) const {
    return kernels::dot(theta_.data(), phi, d_);
}

double ArmState::confidence_width(const double* phi) const {
    const double q = linalg::quad_form_inv(factor().data(), phi, d_);
    return std::sqrt(std::max(q, 0.0));
}

void ArmState::restore(std::vector<double> a, std::vector<double> b, std::vector<double> theta) {
    d_ = static_cast<int>(b.size());
    a_ = std::move(a);
    b_ = std::move(b);
    theta_ = std::move(theta);
    chol_valid_ = false;
}

PolicyState init_policy(const HyperParams& hyper) {
    hyper.validate();
    PolicyState policy;
    policy.hyper = hyper;
    policy.arms.reserve(hyper.k);
    for (int a = 0; a < hyper.k; ++a) policy.arms.emplace_back(hyper.d, hyper.lambda);
    return policy;
}

std::vector<double> predict_losses(const PolicyState& policy, const Context& ctx) {
    check_features(policy, ctx);
    std::vector<double> losses(policy.hyper.k);
    for (int a = 0; a < policy.hyper.k; ++a) {
        losses[a] = policy.arms[a].predict(ctx.features.data());
    }
    return losses;
}

void learn(PolicyState& policy, const Context& ctx, ActionId action, double loss,
           double propensity) {
    check_features(policy, ctx);
    check_action(policy, action);
    if (!(propensity > 0.0 && propensity <= 1.0)) {
        throw ValidationError("propensity must be in (0,1], got " + std::to_string(propensity));
    }
    if (!std::isfinite(loss)) throw ValidationError("loss must be finite");
    policy.arms[action.index].update(ctx.features.data(), loss, propensity);
    ++policy.rounds_learned;
}

ActionId greedy_action(const PolicyState& policy, const Context& ctx) {
    return ActionId{argmin_lowest_index(predict_losses(policy, ctx))};
}

ActionDistribution epsilon_greedy_distribution(const PolicyState& policy, const Context& ctx,
                                               double epsilon) {
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        throw ValidationError("epsilon must be in [0,1), got " + std::to_string(epsilon));
    }
    const ActionId best = greedy_action(policy, ctx);
    ActionDistribution dist;
    dist.probs.assign(policy.hyper.k, epsilon / policy.hyper.k);
    dist.probs[best.index] += 1.0 - epsilon;
    return dist;
}

std::vector<LinUcbScore> linucb_scores(const PolicyState& policy, const Context& ctx,
                                       double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw ValidationError("alpha must be >= 0, got " + std::to_string(alpha));
    }
    check_features(policy, ctx);
    std::vector<LinUcbScore> scores(policy.hyper.k);
    for (int a = 0; a < policy.hyper.k; ++a) {
        const ArmState& arm = policy.arms[a];
        scores[a].estimate = arm.predict(ctx.features.data());
        scores[a].width = alpha == 0.0 ? 0.0 : alpha * arm.confidence_width(ctx.features.data());
    }
    return scores;
}

double success_probability_ucb(const LinUcbScore& score) {
    return std::clamp(1.0 - (score.estimate - score.width), 0.0, 1.0);
}

std::pair<ActionId, ActionDistribution> linucb_select(const PolicyState& policy,
                                                      const Context& ctx, double alpha) {
    const auto scores = linucb_scores(policy, ctx, alpha);
    std::vector<double> lcb(scores.size());
    for (std::size_t a = 0; a < scores.size(); ++a) lcb[a] = scores[a].estimate - scores[a].width;
    const int best = argmin_lowest_index(lcb);
    ActionDistribution dist;
    dist.probs.assign(policy.hyper.k, 0.0);
    dist.probs[best] = 1.0;
    return {ActionId{best}, dist};
}

const char* strategy_name(Strategy::Kind kind) {
    switch (kind) {
        case Strategy::Kind::greedy: return "greedy";
        case Strategy::Kind::epsilon_greedy: return "epsilon_greedy";
        case Strategy::Kind::linucb: return "linucb";
    }
    return "?";
}

}  // namespace skewer
