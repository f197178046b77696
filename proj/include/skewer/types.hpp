#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace skewer {

class Rng;

// Index into the action set, 0 <= index < k. For the default 6-action fork
// configuration the order is (VS, TV, TA) x (parallel, perpendicular).
struct ActionId {
    int index = 0;
    friend bool operator==(const ActionId&, const ActionId&) = default;
};

// Canonical display names for the default 6-action set; for other k the
// names fall back to "action<i>".
std::vector<std::string> default_action_names(int k);

struct HyperParams {
    int d = 1;             // feature dimension
    int k = 1;             // action count
    double lambda = 1.0;   // L2 regularization
    double epsilon = 0.0;  // exploration rate (epsilon-greedy)
    double alpha = 0.0;    // confidence width (LinUCB)

    // Throws ValidationError naming every offending field.
    void validate() const;
};

struct Context {
    std::vector<double> features;
    std::string item_id;      // metadata; empty = unset
    std::string class_label;  // metadata; never read by action selection

    friend bool operator==(const Context&, const Context&) = default;
};

// A stochastic policy's per-round action probabilities.
struct ActionDistribution {
    std::vector<double> probs;

    // Entries >= 0 and summing to 1 within 1e-9.
    void validate() const;
};

// Draws an action from dist using the supplied stream. Consumes exactly one
// uniform draw, so equal streams and distributions give equal actions.
ActionId sample_action(const ActionDistribution& dist, Rng& rng);

}  // namespace skewer
