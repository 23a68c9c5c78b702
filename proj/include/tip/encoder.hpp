#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "tip/autodiff.hpp"
#include "tip/graph.hpp"
#include "tip/tensor.hpp"

namespace tip {

enum class ModelVariant { TipCat, TipSum, DdmDf, DdmNn, PpmGgmNn, Df };
enum class DecoderKind { DistMult, NeuralNet };

inline DecoderKind decoder_kind(ModelVariant v) {
    switch (v) {
        case ModelVariant::DdmNn:
        case ModelVariant::PpmGgmNn:
            return DecoderKind::NeuralNet;
        default:
            return DecoderKind::DistMult;
    }
}

inline std::string variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::TipCat: return "tip-cat";
        case ModelVariant::TipSum: return "tip-sum";
        case ModelVariant::DdmDf: return "ddm-df";
        case ModelVariant::DdmNn: return "ddm-nn";
        case ModelVariant::PpmGgmNn: return "ppm-ggm-nn";
        case ModelVariant::Df: return "df";
    }
    throw std::logic_error("variant_name: unreachable");
}

inline ModelVariant parse_variant(const std::string& s) {
    if (s == "tip-cat") return ModelVariant::TipCat;
    if (s == "tip-sum") return ModelVariant::TipSum;
    if (s == "ddm-df") return ModelVariant::DdmDf;
    if (s == "ddm-nn") return ModelVariant::DdmNn;
    if (s == "ppm-ggm-nn") return ModelVariant::PpmGgmNn;
    if (s == "df") return ModelVariant::Df;
    throw std::invalid_argument("unknown variant: " + s);
}

enum class GgmMode { Cat, Sum };

/// Layer dimensions of the encoder stages. Defaults follow the published
/// variant definitions: 2-layer PPM (32,16), 1-layer GGM (cat 16/48 or
/// sum 64/64), 2-layer DDM (32,16) with 16 bases.
struct EncoderConfig {
    std::vector<std::size_t> ppm_dims = {32, 16};
    GgmMode ggm_mode = GgmMode::Cat;
    std::size_t ggm_protein_dim = 16;
    std::size_t ggm_drug_dim = 48;
    std::vector<std::size_t> ddm_dims = {32, 16};
    std::size_t num_bases = 16;
    std::size_t nn_hidden = 16;   // first NN decoder layer
    std::size_t df_dim = 16;      // reduced drug-feature width of the DF baseline

    static EncoderConfig defaults(ModelVariant v) {
        EncoderConfig c;
        if (v == ModelVariant::TipSum) {
            c.ggm_mode = GgmMode::Sum;
            c.ggm_protein_dim = 64;
            c.ggm_drug_dim = 64;
        }
        return c;
    }

    std::size_t ggm_out_dim() const {
        return ggm_mode == GgmMode::Cat ? ggm_protein_dim + ggm_drug_dim : ggm_protein_dim;
    }

    void validate(ModelVariant v) const {
        auto positive = [](std::size_t d) { return d > 0; };
        for (std::size_t d : ppm_dims) {
            if (!positive(d)) throw std::invalid_argument("EncoderConfig: ppm dim must be positive");
        }
        for (std::size_t d : ddm_dims) {
            if (!positive(d)) throw std::invalid_argument("EncoderConfig: ddm dim must be positive");
        }
        if (!positive(num_bases) || !positive(nn_hidden) || !positive(df_dim) ||
            !positive(ggm_protein_dim) || !positive(ggm_drug_dim)) {
            throw std::invalid_argument("EncoderConfig: dims must be positive");
        }
        if (ggm_mode == GgmMode::Sum && ggm_protein_dim != ggm_drug_dim) {
            throw std::invalid_argument("EncoderConfig: sum mode requires equal GGM dims");
        }
        const bool has_ppm = v == ModelVariant::TipCat || v == ModelVariant::TipSum ||
                             v == ModelVariant::PpmGgmNn;
        if (has_ppm && (ppm_dims.empty() || ppm_dims.back() == 0)) {
            throw std::invalid_argument("EncoderConfig: PPM needs at least one layer");
        }
        if ((v == ModelVariant::TipCat || v == ModelVariant::TipSum ||
             v == ModelVariant::DdmDf || v == ModelVariant::DdmNn) && ddm_dims.empty()) {
            throw std::invalid_argument("EncoderConfig: DDM needs at least one layer");
        }
    }
};

/// Precomputed adjacency views of one graph, shared across forward passes.
struct GraphViews {
    std::size_t num_proteins = 0;
    std::size_t num_drugs = 0;
    std::size_t num_relations = 0;
    std::shared_ptr<AdjacencyList> pp;
    std::shared_ptr<AdjacencyList> pd;  // drug -> targeted proteins
    std::vector<std::shared_ptr<AdjacencyList>> dd;

    static GraphViews build(const MultiModalGraph& g) {
        GraphViews v;
        v.num_proteins = g.num_proteins;
        v.num_drugs = g.num_drugs;
        v.num_relations = g.num_relations();
        v.pp = g.pp_adjacency();
        v.pd = g.pd_adjacency();
        for (std::size_t r = 0; r < g.num_relations(); ++r) {
            v.dd.push_back(g.dd_adjacency(r));
        }
        return v;
    }
};

/// Parameter registry for one model instance; creation order is fixed so
/// a given init seed always produces the same tensors.
class TipModel {
public:
    TipModel(ModelVariant variant, EncoderConfig config, std::size_t num_proteins,
             std::size_t num_drugs, std::size_t num_relations, std::uint64_t init_seed)
        : variant_(variant), config_(std::move(config)), num_proteins_(num_proteins),
          num_drugs_(num_drugs), num_relations_(num_relations) {
        config_.validate(variant_);
        std::mt19937_64 rng(init_seed);
        build_params(rng);
    }

    TipModel(ModelVariant variant, EncoderConfig config, const MultiModalGraph& g,
             std::uint64_t init_seed)
        : TipModel(variant, std::move(config), g.num_proteins, g.num_drugs,
                   g.num_relations(), init_seed) {}

    ModelVariant variant() const { return variant_; }
    const EncoderConfig& config() const { return config_; }
    std::size_t num_proteins() const { return num_proteins_; }
    std::size_t num_drugs() const { return num_drugs_; }
    std::size_t num_relations() const { return num_relations_; }
    std::size_t embed_dim() const { return embed_dim_; }

    Parameter& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("no parameter named " + name);
        return *params_[it->second];
    }
    const Parameter& at(const std::string& name) const {
        return const_cast<TipModel*>(this)->at(name);
    }
    bool has(const std::string& name) const { return index_.count(name) != 0; }

    std::vector<Parameter*> params() {
        std::vector<Parameter*> out;
        out.reserve(params_.size());
        for (auto& p : params_) out.push_back(p.get());
        return out;
    }

    void zero_grads() {
        for (auto& p : params_) p->zero_grad();
    }

private:
    Parameter& add(const std::string& name, Tensor value) {
        if (index_.count(name)) throw std::logic_error("duplicate parameter " + name);
        index_.emplace(name, params_.size());
        params_.push_back(std::make_unique<Parameter>(name, std::move(value)));
        return *params_.back();
    }

    /// Bases packed as [B x (d_in*d_out)], each basis Xavier-initialized
    /// for its own (d_in, d_out) fan.
    Tensor init_bases(std::size_t num_bases, std::size_t d_in, std::size_t d_out,
                      std::mt19937_64& rng) {
        Tensor t({num_bases, d_in * d_out});
        for (std::size_t b = 0; b < num_bases; ++b) {
            Tensor basis = xavier_init(d_in, d_out, rng);
            for (std::size_t i = 0; i < basis.size(); ++i) t.at(b, i) = basis[i];
        }
        return t;
    }

    void build_params(std::mt19937_64& rng) {
        const bool has_ppm = variant_ == ModelVariant::TipCat ||
                             variant_ == ModelVariant::TipSum ||
                             variant_ == ModelVariant::PpmGgmNn;
        const bool has_ddm = variant_ == ModelVariant::TipCat ||
                             variant_ == ModelVariant::TipSum ||
                             variant_ == ModelVariant::DdmDf ||
                             variant_ == ModelVariant::DdmNn;

        if (has_ppm) {
            std::size_t d_in = num_proteins_;  // virtual one-hot input
            for (std::size_t k = 0; k < config_.ppm_dims.size(); ++k) {
                const std::size_t d_out = config_.ppm_dims[k];
                add("ppm." + std::to_string(k) + ".weight", xavier_init(d_in, d_out, rng));
                // residual path from layer 2 on; projected when dims differ
                if (k > 0 && d_in != d_out) {
                    add("ppm." + std::to_string(k) + ".residual",
                        xavier_init(d_in, d_out, rng));
                }
                d_in = d_out;
            }
            add("ggm.w_h", xavier_init(config_.ppm_dims.back(), config_.ggm_protein_dim, rng));
            add("ggm.w_d", xavier_init(num_drugs_, config_.ggm_drug_dim, rng));
        }

        if (has_ddm) {
            std::size_t d_in = has_ppm ? config_.ggm_out_dim() : num_drugs_;
            for (std::size_t k = 0; k < config_.ddm_dims.size(); ++k) {
                const std::size_t d_out = config_.ddm_dims[k];
                const std::string pre = "ddm." + std::to_string(k) + ".";
                add(pre + "bases", init_bases(config_.num_bases, d_in, d_out, rng));
                add(pre + "coeffs", xavier_init(num_relations_, config_.num_bases, rng));
                add(pre + "self", xavier_init(d_in, d_out, rng));
                d_in = d_out;
            }
        }

        if (variant_ == ModelVariant::Df) {
            add("ggm.w_d", xavier_init(num_drugs_, config_.df_dim, rng));
        }

        switch (variant_) {
            case ModelVariant::TipCat:
            case ModelVariant::TipSum:
            case ModelVariant::DdmDf:
                embed_dim_ = config_.ddm_dims.back();
                break;
            case ModelVariant::DdmNn:
                embed_dim_ = config_.ddm_dims.back();
                break;
            case ModelVariant::PpmGgmNn:
                embed_dim_ = config_.ggm_out_dim();
                break;
            case ModelVariant::Df:
                embed_dim_ = config_.df_dim;
                break;
        }

        if (decoder_kind(variant_) == DecoderKind::DistMult) {
            add("decoder.distmult", xavier_init(num_relations_, embed_dim_, rng));
        } else {
            add("decoder.nn.w1", xavier_init(2 * embed_dim_, config_.nn_hidden, rng));
            // stored [N^r x hidden]; used transposed
            add("decoder.nn.w2", xavier_init(num_relations_, config_.nn_hidden, rng));
        }
    }

    ModelVariant variant_;
    EncoderConfig config_;
    std::size_t num_proteins_, num_drugs_, num_relations_;
    std::size_t embed_dim_ = 0;
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// GCN over the P-P graph. The one-hot input row makes the first weight
/// multiplication a row selection, so layer 1 aggregates the weight rows
/// directly and carries no residual; later layers add the previous state
/// (projected when dims change) inside the ReLU.
inline Var ppm_forward(Tape& tape, TipModel& model, const GraphViews& views) {
    const auto& dims = model.config().ppm_dims;
    Var h = tape.relu(tape.mean_aggregate(tape.param(model.at("ppm.0.weight")), views.pp));
    std::size_t d_in = dims[0];
    for (std::size_t k = 1; k < dims.size(); ++k) {
        const std::string pre = "ppm." + std::to_string(k) + ".";
        Var msg = tape.mean_aggregate(tape.matmul(h, tape.param(model.at(pre + "weight"))),
                                      views.pp);
        Var res = d_in == dims[k] ? h : tape.matmul(h, tape.param(model.at(pre + "residual")));
        h = tape.relu(tape.add(msg, res));
        d_in = dims[k];
    }
    return h;
}

/// Graph-to-graph unit (mean over a drug's protein targets, zero row for
/// target-free drugs) fused with the drug-feature reduction unit by
/// concatenation or sum.
inline Var ggm_forward(Tape& tape, TipModel& model, const GraphViews& views, Var protein_emb) {
    Var h_prot = tape.relu(tape.mean_aggregate(
        tape.matmul(protein_emb, tape.param(model.at("ggm.w_h"))), views.pd));
    Var h_drug = tape.relu(tape.param(model.at("ggm.w_d")));
    return model.config().ggm_mode == GgmMode::Cat ? tape.concat_cols(h_prot, h_drug)
                                                   : tape.add(h_prot, h_drug);
}

/// Relational GCN layer stack with basis-decomposed per-relation weights
/// W_r = sum_b a_rb * V_b and a weighted self-loop. h0 empty means the
/// virtual one-hot drug input. Relations are visited in index order.
inline Var ddm_forward(Tape& tape, TipModel& model, const GraphViews& views,
                       std::optional<Var> h0) {
    const auto& dims = model.config().ddm_dims;
    std::size_t d_in = h0 ? tape.value(*h0).cols() : views.num_drugs;
    std::optional<Var> h = h0;
    for (std::size_t k = 0; k < dims.size(); ++k) {
        const std::size_t d_out = dims[k];
        const std::string pre = "ddm." + std::to_string(k) + ".";
        Var all_weights = tape.matmul(tape.param(model.at(pre + "coeffs")),
                                      tape.param(model.at(pre + "bases")));
        Var self = tape.param(model.at(pre + "self"));
        Var acc = h ? tape.matmul(*h, self) : self;
        for (std::size_t r = 0; r < views.num_relations; ++r) {
            Var w_r = tape.reshape(tape.gather_rows(all_weights, {r}), {d_in, d_out});
            Var msg = h ? tape.matmul(tape.mean_aggregate(*h, views.dd[r]), w_r)
                        : tape.mean_aggregate(w_r, views.dd[r]);
            acc = tape.add(acc, msg);
        }
        h = tape.relu(acc);
        d_in = d_out;
    }
    return *h;
}

/// Variant dispatch producing the drug embedding matrix Z_d.
inline Var encode(Tape& tape, TipModel& model, const GraphViews& views) {
    switch (model.variant()) {
        case ModelVariant::TipCat:
        case ModelVariant::TipSum: {
            Var p = ppm_forward(tape, model, views);
            Var h0 = ggm_forward(tape, model, views, p);
            return ddm_forward(tape, model, views, h0);
        }
        case ModelVariant::DdmDf:
        case ModelVariant::DdmNn:
            return ddm_forward(tape, model, views, std::nullopt);
        case ModelVariant::PpmGgmNn: {
            Var p = ppm_forward(tape, model, views);
            return ggm_forward(tape, model, views, p);
        }
        case ModelVariant::Df:
            return tape.relu(tape.param(model.at("ggm.w_d")));
    }
    throw std::logic_error("encode: unreachable");
}

}  // namespace tip
