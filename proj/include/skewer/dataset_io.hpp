#pragma once

#include <string>
#include <vector>

#include "skewer/environment.hpp"

namespace skewer {

// Logged datasets are JSON lines, one object per example:
//   {"item_id": "...", "class_label": "...", "features": [...],
//    "action": 2, "loss": 1, "propensity": 0.16666666666666666}
// The feature dimension is inferred from the first line and enforced on
// every following line. loss must be 0 or 1; propensity in (0,1].
std::vector<LoggedExample> parse_dataset(const std::string& path);
void write_dataset(const std::vector<LoggedExample>& dataset, const std::string& path);

// Imputed pools are JSON lines as well:
//   {"item_id": "...", "class_label": "...", "features": [...],
//    "dr_losses": [...], "best_set": [...]}
std::vector<ImputedContext> parse_pool(const std::string& path);
void write_pool(const std::vector<ImputedContext>& pool, const std::string& path);

}  // namespace skewer
