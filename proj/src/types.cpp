#include "skewer/types.hpp"

#include <cmath>

#include "skewer/errors.hpp"
#include "skewer/rng.hpp"

namespace skewer {

std::vector<std::string> default_action_names(int k) {
    if (k == 6) {
        return {"VS-parallel", "VS-perpendicular", "TV-parallel",
                "TV-perpendicular", "TA-parallel", "TA-perpendicular"};
    }
    std::vector<std::string> names;
    names.reserve(k);
    for (int i = 0; i < k; ++i) names.push_back("action" + std::to_string(i));
    return names;
}

void HyperParams::validate() const {
    std::string problems;
    auto flag = [&problems](const std::string& msg) {
        if (!problems.empty()) problems += "; ";
        problems += msg;
    };
    if (d < 1) flag("d must be >= 1 (got " + std::to_string(d) + ")");
    if (k < 1) flag("k must be >= 1 (got " + std::to_string(k) + ")");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        flag("lambda must be > 0 (got " + std::to_string(lambda) + ")");
    }
    if (!(epsilon >= 0.0 && epsilon < 1.0)) {
        flag("epsilon must be in [0,1) (got " + std::to_string(epsilon) + ")");
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        flag("alpha must be >= 0 (got " + std::to_string(alpha) + ")");
    }
    if (!problems.empty()) throw ValidationError("invalid hyper-parameters: " + problems);
}

void ActionDistribution::validate() const {
    if (probs.empty()) throw ValidationError("action distribution is empty");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || !std::isfinite(p)) {
            throw ValidationError("action distribution has a negative or non-finite entry");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw ValidationError("action distribution sums to " + std::to_string(sum) +
                              ", expected 1");
    }
}

ActionId sample_action(const ActionDistribution& dist, Rng& rng) {
    dist.validate();
    const double u = rng.uniform01();
    double cum = 0.0;
    int last_positive = 0;
    for (int a = 0; a < static_cast<int>(dist.probs.size()); ++a) {
        if (dist.probs[a] > 0.0) last_positive = a;
        cum += dist.probs[a];
        if (u < cum) return ActionId{a};
    }
    // u landed in the rounding gap at the top of the cumulative sum.
    return ActionId{last_positive};
}

}  // namespace skewer
