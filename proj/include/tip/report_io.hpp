#pragma once

#include <sstream>
#include <string>

#include <json.hpp>

#include "tip/dataset_io.hpp"
#include "tip/metrics.hpp"

namespace tip {

namespace detail {

inline nlohmann::json relation_json(const RelationMetrics& m) {
    nlohmann::json j;
    j["relation"] = m.relation;
    j["label"] = m.label;
    j["auprc"] = m.auprc;
    j["auroc"] = m.auroc;
    j["ap50"] = m.ap50;
    j["positives"] = m.positives;
    j["ap_truncated"] = m.ap_truncated;
    return j;
}

}  // namespace detail

/// One JSON object per relation, newline-delimited.
inline std::string report_jsonl(const EvalReport& report) {
    std::ostringstream os;
    for (const auto& m : report.relations) os << detail::relation_json(m).dump() << '\n';
    return os.str();
}

inline std::string report_summary_json(const EvalReport& report) {
    nlohmann::json j;
    j["num_relations"] = report.relations.size();
    j["macro_auprc"] = report.macro_auprc;
    j["macro_auroc"] = report.macro_auroc;
    j["macro_ap50"] = report.macro_ap50;
    j["skipped_relations"] = report.skipped;
    return j.dump(2) + "\n";
}

inline std::string extremes_json(const RankingReport& ranking) {
    nlohmann::json j;
    j["truncated"] = ranking.truncated;
    j["best"] = nlohmann::json::array();
    j["worst"] = nlohmann::json::array();
    for (const auto& m : ranking.best) j["best"].push_back(detail::relation_json(m));
    for (const auto& m : ranking.worst) j["worst"].push_back(detail::relation_json(m));
    return j.dump(2) + "\n";
}

inline std::string loss_csv(const std::vector<double>& losses) {
    std::ostringstream os;
    os << "epoch,loss\n";
    os.precision(17);
    for (std::size_t i = 0; i < losses.size(); ++i) os << i + 1 << ',' << losses[i] << '\n';
    return os.str();
}

}  // namespace tip
