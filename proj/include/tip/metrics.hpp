#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tip {

/// AUROC as the exact Mann-Whitney statistic P(pos > neg) + 0.5 P(tie),
/// via average ranks over tie groups.
inline double auroc(const std::vector<double>& pos_scores,
                    const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw std::invalid_argument("auroc: both score sets must be nonempty");
    }
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) items.push_back({s, true});
    for (double s : neg_scores) items.push_back({s, false});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.score < b.score; });

    double rank_sum_pos = 0.0;
    std::size_t idx = 0;
    while (idx < items.size()) {
        std::size_t end = idx;
        while (end < items.size() && items[end].score == items[idx].score) ++end;
        // ranks are 1-based; tied entries share the average rank
        const double avg_rank = 0.5 * static_cast<double>(idx + 1 + end);
        for (std::size_t k = idx; k < end; ++k) {
            if (items[k].positive) rank_sum_pos += avg_rank;
        }
        idx = end;
    }
    const double n1 = static_cast<double>(pos_scores.size());
    const double n0 = static_cast<double>(neg_scores.size());
    const double u = rank_sum_pos - n1 * (n1 + 1.0) / 2.0;
    return u / (n1 * n0);
}

/// Average-precision form of the area under the precision-recall curve:
/// sum over descending score thresholds of (R_k - R_{k-1}) * P_k, with
/// equal scores processed as one threshold group.
inline double auprc(const std::vector<double>& pos_scores,
                    const std::vector<double>& neg_scores) {
    if (pos_scores.empty() || neg_scores.empty()) {
        throw std::invalid_argument("auprc: both score sets must be nonempty");
    }
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) items.push_back({s, true});
    for (double s : neg_scores) items.push_back({s, false});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.score > b.score; });

    const double total_pos = static_cast<double>(pos_scores.size());
    double tp = 0.0, fp = 0.0, recall_prev = 0.0, ap = 0.0;
    std::size_t idx = 0;
    while (idx < items.size()) {
        std::size_t end = idx;
        while (end < items.size() && items[end].score == items[idx].score) ++end;
        for (std::size_t k = idx; k < end; ++k) {
            if (items[k].positive) tp += 1.0;
            else fp += 1.0;
        }
        const double recall = tp / total_pos;
        const double precision = tp / (tp + fp);
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        idx = end;
    }
    return ap;
}

/// Average precision over the k highest-scored pairs: mean of
/// precision@j taken at each positive hit with rank j <= k; 0 when no
/// positive lands in the top k. Stable descending sort (positives listed
/// before negatives on ties). Sets *truncated when fewer than k pairs
/// exist and all are used.
inline double ap_at_k(const std::vector<double>& pos_scores,
                      const std::vector<double>& neg_scores, std::size_t k = 50,
                      bool* truncated = nullptr) {
    if (k < 1) throw std::invalid_argument("ap_at_k: k must be >= 1");
    struct Item {
        double score;
        bool positive;
    };
    std::vector<Item> items;
    items.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores) items.push_back({s, true});
    for (double s : neg_scores) items.push_back({s, false});
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.score > b.score; });

    if (truncated) *truncated = items.size() < k;
    const std::size_t top = std::min(k, items.size());
    double hits = 0.0, precision_sum = 0.0;
    for (std::size_t j = 0; j < top; ++j) {
        if (items[j].positive) {
            hits += 1.0;
            precision_sum += hits / static_cast<double>(j + 1);
        }
    }
    return hits == 0.0 ? 0.0 : precision_sum / hits;
}

/// Metrics of one relation in an evaluation run.
struct RelationMetrics {
    std::size_t relation = 0;
    std::string label;
    double auprc = 0.0;
    double auroc = 0.0;
    double ap50 = 0.0;
    std::size_t positives = 0;
    bool ap_truncated = false;
};

struct EvalReport {
    std::vector<RelationMetrics> relations;
    std::vector<std::size_t> skipped;  // relations with an empty test side
    double macro_auprc = 0.0;
    double macro_auroc = 0.0;
    double macro_ap50 = 0.0;

    void finalize() {
        macro_auprc = macro_auroc = macro_ap50 = 0.0;
        if (relations.empty()) return;
        for (const auto& m : relations) {
            macro_auprc += m.auprc;
            macro_auroc += m.auroc;
            macro_ap50 += m.ap50;
        }
        const double n = static_cast<double>(relations.size());
        macro_auprc /= n;
        macro_auroc /= n;
        macro_ap50 /= n;
    }
};

/// The n best and n worst relations by AUPRC, ties broken by relation id.
struct RankingReport {
    std::vector<RelationMetrics> best;
    std::vector<RelationMetrics> worst;
    bool truncated = false;  // fewer than 2n relations were available
};

inline RankingReport report_extremes(const EvalReport& report, std::size_t n = 20) {
    std::vector<RelationMetrics> sorted = report.relations;
    std::sort(sorted.begin(), sorted.end(), [](const RelationMetrics& a, const RelationMetrics& b) {
        if (a.auprc != b.auprc) return a.auprc > b.auprc;
        return a.relation < b.relation;
    });
    RankingReport out;
    out.truncated = sorted.size() < 2 * n;
    const std::size_t take = std::min(n, sorted.size());
    out.best.assign(sorted.begin(), sorted.begin() + take);
    const std::size_t worst_take = std::min(n, sorted.size() - take);
    out.worst.assign(sorted.end() - worst_take, sorted.end());
    std::sort(out.worst.begin(), out.worst.end(),
              [](const RelationMetrics& a, const RelationMetrics& b) {
                  if (a.auprc != b.auprc) return a.auprc < b.auprc;
                  return a.relation < b.relation;
              });
    return out;
}

}  // namespace tip
