#pragma once

#include <stdexcept>
#include <vector>

#include "tip/autodiff.hpp"
#include "tip/encoder.hpp"

namespace tip {

/// One scored (drug, relation, drug) query.
struct Triple {
    std::size_t i = 0;
    std::size_t r = 0;
    std::size_t j = 0;
};

namespace detail {

inline void check_triples(const TipModel& model, const std::vector<Triple>& triples) {
    for (const Triple& t : triples) {
        if (t.i >= model.num_drugs() || t.j >= model.num_drugs()) {
            throw std::out_of_range("score: drug index out of range");
        }
        if (t.r >= model.num_relations()) {
            throw std::out_of_range("score: relation index out of range");
        }
    }
}

}  // namespace detail

/// DistMult: p = sigmoid(sum_k z_i[k] * m_r[k] * z_j[k]); symmetric in
/// (i, j) because M_r is diagonal.
inline Var distmult_scores(Tape& tape, TipModel& model, Var z,
                           const std::vector<Triple>& triples) {
    detail::check_triples(model, triples);
    std::vector<std::size_t> is, js, rs;
    is.reserve(triples.size());
    js.reserve(triples.size());
    rs.reserve(triples.size());
    for (const Triple& t : triples) {
        is.push_back(t.i);
        js.push_back(t.j);
        rs.push_back(t.r);
    }
    Var zi = tape.gather_rows(z, is);
    Var zj = tape.gather_rows(z, js);
    Var mr = tape.gather_rows(tape.param(model.at("decoder.distmult")), rs);
    return tape.sigmoid(tape.row_sum(tape.mul(tape.mul(zi, mr), zj)));
}

/// 2-layer NN decoder on the concatenated pair embedding, picking the
/// queried relation's output; probabilities of both input orders are
/// averaged so the score is order-invariant.
inline Var nn_scores(Tape& tape, TipModel& model, Var z, const std::vector<Triple>& triples) {
    detail::check_triples(model, triples);
    std::vector<std::size_t> is, js, rs;
    for (const Triple& t : triples) {
        is.push_back(t.i);
        js.push_back(t.j);
        rs.push_back(t.r);
    }
    Var w1 = tape.param(model.at("decoder.nn.w1"));
    Var w2 = tape.param(model.at("decoder.nn.w2"));
    Var zi = tape.gather_rows(z, is);
    Var zj = tape.gather_rows(z, js);
    Var w2_rows = tape.gather_rows(w2, rs);
    auto one_order = [&](Var a, Var b) {
        Var hidden = tape.relu(tape.matmul(tape.concat_cols(a, b), w1));
        return tape.sigmoid(tape.row_sum(tape.mul(hidden, w2_rows)));
    };
    Var p_fwd = one_order(zi, zj);
    Var p_rev = one_order(zj, zi);
    return tape.affine(tape.add(p_fwd, p_rev), 0.5, 0.0);
}

/// Vectorized scoring, order-preserving, dispatched on the model's
/// decoder kind.
inline Var score_batch(Tape& tape, TipModel& model, Var z, const std::vector<Triple>& triples) {
    return decoder_kind(model.variant()) == DecoderKind::DistMult
               ? distmult_scores(tape, model, z, triples)
               : nn_scores(tape, model, z, triples);
}

/// Single-pair DistMult probability.
inline double df_score(Tape& tape, TipModel& model, Var z, std::size_t i, std::size_t r,
                       std::size_t j) {
    return tape.value(distmult_scores(tape, model, z, {{i, r, j}}))[0];
}

/// NN decoder probabilities of every relation for one pair.
inline std::vector<double> nn_score(Tape& tape, TipModel& model, Var z, std::size_t i,
                                    std::size_t j) {
    if (i >= model.num_drugs() || j >= model.num_drugs()) {
        throw std::out_of_range("nn_score: drug index out of range");
    }
    Var w1 = tape.param(model.at("decoder.nn.w1"));
    Var w2 = tape.param(model.at("decoder.nn.w2"));
    auto one_order = [&](std::size_t a, std::size_t b) {
        Var x = tape.concat_cols(tape.gather_rows(z, {a}), tape.gather_rows(z, {b}));
        return tape.sigmoid(tape.matmul_bt(tape.relu(tape.matmul(x, w1)), w2));
    };
    Var p = tape.affine(tape.add(one_order(i, j), one_order(j, i)), 0.5, 0.0);
    const Tensor& v = tape.value(p);
    return std::vector<double>(v.values().begin(), v.values().end());
}

}  // namespace tip
