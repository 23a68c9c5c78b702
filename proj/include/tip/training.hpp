#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "tip/adam.hpp"
#include "tip/autodiff.hpp"
#include "tip/decoder.hpp"
#include "tip/encoder.hpp"
#include "tip/graph.hpp"
#include "tip/metrics.hpp"

namespace tip {

struct TrainConfig {
    std::size_t epochs = 100;
    double learning_rate = 0.01;
    std::uint64_t seed_init = 1;
    std::uint64_t seed_neg = 2;  // training negatives, resampled every epoch

    void validate() const {
        if (learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
    }
};

/// -mean(log p_pos) - mean(log(1 - p_neg)), logs clamped at 1e-12.
inline Var bce_loss(Tape& tape, Var pos_probs, Var neg_probs) {
    if (tape.value(pos_probs).size() == 0) {
        throw std::invalid_argument("bce_loss: empty positive set");
    }
    Var pos_term = tape.affine(tape.mean(tape.log_clamped(pos_probs)), -1.0, 0.0);
    if (tape.value(neg_probs).size() == 0) return pos_term;
    Var neg_term = tape.affine(
        tape.mean(tape.log_clamped(tape.affine(neg_probs, -1.0, 1.0))), -1.0, 0.0);
    return tape.add(pos_term, neg_term);
}

namespace detail {

inline std::vector<Triple> to_triples(const RelationPairs& pairs) {
    std::vector<Triple> out;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        for (const Edge& e : pairs[r]) out.push_back({e.first, r, e.second});
    }
    return out;
}

}  // namespace detail

struct TrainResult {
    std::vector<double> losses;  // one entry per epoch
};

/// Full-batch training: every epoch resamples training negatives, encodes
/// the train graph, scores all train positives and negatives, and takes
/// one Adam step on the cross-entropy loss. Deterministic given the seeds.
inline TrainResult train(TipModel& model, const SplitGraph& split, const TrainConfig& config,
                         const std::function<void(std::size_t, double)>& on_epoch = {}) {
    config.validate();
    const GraphViews views = GraphViews::build(split.train);

    RelationPairs train_positives(split.train.num_relations());
    for (std::size_t r = 0; r < split.train.num_relations(); ++r) {
        train_positives[r] = split.train.dd_undirected(r);
    }
    const std::vector<Triple> pos_triples = detail::to_triples(train_positives);

    AdamState adam(config.learning_rate);
    std::mt19937_64 neg_rng(config.seed_neg);
    const auto params = model.params();

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const RelationPairs negatives = sample_negatives(train_positives, split.train, neg_rng);
        const std::vector<Triple> neg_triples = detail::to_triples(negatives);

        Tape tape;
        Var z = encode(tape, model, views);
        Var pos_probs = score_batch(tape, model, z, pos_triples);
        Var neg_probs = score_batch(tape, model, z, neg_triples);
        Var loss = bce_loss(tape, pos_probs, neg_probs);

        const double loss_value = tape.value(loss)[0];
        if (!std::isfinite(loss_value)) {
            throw std::runtime_error("train: non-finite loss at epoch " +
                                     std::to_string(epoch + 1));
        }
        result.losses.push_back(loss_value);

        tape.backward(loss);
        adam.step(params);
        if (on_epoch) on_epoch(epoch + 1, loss_value);
    }
    return result;
}

/// Scores the frozen test positives/negatives of every relation on the
/// train-graph embedding and reports per-relation and macro metrics.
/// Relations with an empty test side are excluded and flagged.
inline EvalReport evaluate(TipModel& model, const SplitGraph& split,
                           const std::vector<std::string>* labels = nullptr) {
    const GraphViews views = GraphViews::build(split.train);
    Tape tape;
    Var z = encode(tape, model, views);

    EvalReport report;
    for (std::size_t r = 0; r < split.test_positives.size(); ++r) {
        const EdgeList& pos = split.test_positives[r];
        const EdgeList& neg = split.test_negatives[r];
        if (pos.empty() || neg.empty()) {
            report.skipped.push_back(r);
            continue;
        }
        std::vector<Triple> pos_t, neg_t;
        for (const Edge& e : pos) pos_t.push_back({e.first, r, e.second});
        for (const Edge& e : neg) neg_t.push_back({e.first, r, e.second});
        const std::vector<double> ps = tape.value(score_batch(tape, model, z, pos_t)).values();
        const std::vector<double> ns = tape.value(score_batch(tape, model, z, neg_t)).values();

        RelationMetrics m;
        m.relation = r;
        if (labels && r < labels->size()) m.label = (*labels)[r];
        else if (r < split.train.relations.size()) m.label = split.train.relations[r];
        m.positives = pos.size();
        m.auroc = auroc(ps, ns);
        m.auprc = auprc(ps, ns);
        m.ap50 = ap_at_k(ps, ns, 50, &m.ap_truncated);
        report.relations.push_back(m);
    }
    report.finalize();
    return report;
}

}  // namespace tip
