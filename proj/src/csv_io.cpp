#include "skewer/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "skewer/errors.hpp"

namespace skewer {

std::string format_double(double v) {
    char buf[64];
    const auto result = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, result.ptr);
}

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' line ends everywhere
    if (!out) throw IoError("cannot write " + path);
    return out;
}

}  // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
    auto out = open_csv(path);
    std::size_t score_arms = 0;
    for (const auto& rec : trace.records) {
        score_arms = std::max(score_arms, rec.arm_scores.size());
    }
    out << "t,item_id,class,action,propensity,loss,success,cumulative_loss";
    for (std::size_t a = 0; a < score_arms; ++a) out << ",est_" << a << ",width_" << a;
    out << '\n';
    for (const auto& rec : trace.records) {
        out << rec.t << ',' << rec.item_id << ',' << rec.class_label << ',' << rec.action.index
            << ',' << format_double(rec.propensity) << ',' << format_double(rec.loss) << ','
            << (rec.success ? 1 : 0) << ',' << format_double(rec.cumulative_loss);
        for (std::size_t a = 0; a < score_arms; ++a) {
            if (a < rec.arm_scores.size()) {
                out << ',' << format_double(rec.arm_scores[a].estimate) << ','
                    << format_double(rec.arm_scores[a].width);
            } else {
                out << ",,";
            }
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

void write_sweep_csv(const SweepReport& report, const std::string& path) {
    auto out = open_csv(path);
    bool any_regret = false;
    for (const auto& cell : report.cells) any_regret |= cell.has_regret;

    for (const auto& name : report.param_names) out << name << ',';
    out << "mean,std,ci95,seeds";
    if (any_regret) out << ",regret_mean,regret_std,regret_ci95";
    out << '\n';

    for (const auto& cell : report.cells) {
        for (const auto& name : report.param_names) {
            out << format_double(cell.params.at(name)) << ',';
        }
        if (cell.error.empty()) {
            out << format_double(cell.mean_loss) << ',' << format_double(cell.std_loss) << ',';
            if (std::isnan(cell.ci95_loss)) {
                out << ',';
            } else {
                out << format_double(cell.ci95_loss) << ',';
            }
            out << cell.seeds_run;
            if (any_regret) {
                if (cell.has_regret) {
                    out << ',' << format_double(cell.mean_regret) << ','
                        << format_double(cell.std_regret) << ',';
                    if (!std::isnan(cell.ci95_regret)) out << format_double(cell.ci95_regret);
                } else {
                    out << ",,,";
                }
            }
        } else {
            out << ",,,0";
            if (any_regret) out << ",,,";
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace skewer
