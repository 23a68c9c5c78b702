#pragma once

#include <cstdint>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tip/autodiff.hpp"
#include "tip/tensor.hpp"

namespace tip {

using Edge = std::pair<std::size_t, std::size_t>;
using EdgeList = std::vector<Edge>;

inline std::uint64_t edge_key(std::size_t a, std::size_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

inline Edge canonical(const Edge& e) {
    return e.first <= e.second ? e : Edge{e.second, e.first};
}

/// Immutable multimodal graph: P-P, directed P-D, and per-relation D-D
/// edge sets over contiguous 0-based node ids. pp_edges and dd_edges hold
/// both orientations of every undirected edge.
struct MultiModalGraph {
    std::size_t num_proteins = 0;
    std::size_t num_drugs = 0;
    std::vector<std::string> relations;        // original labels, internal id = index
    std::vector<std::string> protein_names;    // original ids, internal id = index
    std::vector<std::string> drug_names;
    EdgeList pp_edges;                         // both orientations
    EdgeList pd_edges;                         // protein -> drug
    std::vector<EdgeList> dd_edges;            // per relation, both orientations

    std::size_t num_relations() const { return relations.size(); }

    /// Undirected edge count of relation r.
    std::size_t dd_count(std::size_t r) const { return dd_edges[r].size() / 2; }

    /// Canonical (min, max) pair list of relation r, insertion order.
    EdgeList dd_undirected(std::size_t r) const {
        EdgeList out;
        out.reserve(dd_count(r));
        for (const Edge& e : dd_edges[r]) {
            if (e.first < e.second) out.push_back(e);
        }
        return out;
    }

    std::shared_ptr<AdjacencyList> pp_adjacency() const {
        auto adj = std::make_shared<AdjacencyList>(num_proteins);
        for (const Edge& e : pp_edges) (*adj)[e.first].push_back(e.second);
        return adj;
    }

    /// Per-drug list of targeted proteins.
    std::shared_ptr<AdjacencyList> pd_adjacency() const {
        auto adj = std::make_shared<AdjacencyList>(num_drugs);
        for (const Edge& e : pd_edges) (*adj)[e.second].push_back(e.first);
        return adj;
    }

    std::shared_ptr<AdjacencyList> dd_adjacency(std::size_t r) const {
        auto adj = std::make_shared<AdjacencyList>(num_drugs);
        for (const Edge& e : dd_edges[r]) (*adj)[e.first].push_back(e.second);
        return adj;
    }
};

/// Per-relation drug-pair lists, canonical orientation, one entry per
/// undirected pair.
using RelationPairs = std::vector<EdgeList>;

struct SplitGraph {
    MultiModalGraph train;
    RelationPairs test_positives;
    RelationPairs test_negatives;
};

namespace detail {

class NodeInterner {
public:
    std::size_t intern(const std::string& name) {
        auto it = ids_.find(name);
        if (it != ids_.end()) return it->second;
        const std::size_t id = names_.size();
        ids_.emplace(name, id);
        names_.push_back(name);
        return id;
    }
    const std::vector<std::string>& names() const { return names_; }

private:
    std::unordered_map<std::string, std::size_t> ids_;
    std::vector<std::string> names_;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

/// Calls fn(fields, line_number) for every non-comment, non-empty line.
template <typename Fn>
void for_each_csv_row(const std::string& path, std::size_t expected_fields, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_csv_line(line);
        if (fields.size() != expected_fields) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected " + std::to_string(expected_fields) +
                                     " comma-separated fields, got " +
                                     std::to_string(fields.size()));
        }
        for (const auto& f : fields) {
            if (f.empty()) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": empty field");
            }
        }
        fn(fields, lineno);
    }
}

/// Adds an undirected edge in both orientations unless already present or
/// a self-loop.
inline void add_undirected(EdgeList& edges, std::unordered_set<std::uint64_t>& seen,
                           std::size_t a, std::size_t b) {
    if (a == b) return;
    const Edge c = canonical({a, b});
    if (!seen.insert(edge_key(c.first, c.second)).second) return;
    edges.push_back(c);
    edges.push_back({c.second, c.first});
}

}  // namespace detail

/// Loads the three CSV edge lists (pp: `protein_a,protein_b`; pd:
/// `protein,drug`; dd: `drug_a,drug_b,relation`). Node and relation ids
/// are assigned on first sight; undirected edges get symmetric closure;
/// duplicates collapse.
inline MultiModalGraph load_edge_lists(const std::string& pp_path,
                                       const std::string& pd_path,
                                       const std::string& dd_path) {
    MultiModalGraph g;
    detail::NodeInterner proteins, drugs, relations;

    std::unordered_set<std::uint64_t> pp_seen;
    detail::for_each_csv_row(pp_path, 2, [&](const std::vector<std::string>& f, std::size_t) {
        detail::add_undirected(g.pp_edges, pp_seen, proteins.intern(f[0]), proteins.intern(f[1]));
    });

    std::unordered_set<std::uint64_t> pd_seen;
    detail::for_each_csv_row(pd_path, 2, [&](const std::vector<std::string>& f, std::size_t) {
        const std::size_t p = proteins.intern(f[0]);
        const std::size_t d = drugs.intern(f[1]);
        if (pd_seen.insert(edge_key(p, d)).second) g.pd_edges.push_back({p, d});
    });

    std::vector<std::unordered_set<std::uint64_t>> dd_seen;
    detail::for_each_csv_row(dd_path, 3, [&](const std::vector<std::string>& f, std::size_t) {
        const std::size_t a = drugs.intern(f[0]);
        const std::size_t b = drugs.intern(f[1]);
        const std::size_t r = relations.intern(f[2]);
        if (r >= g.dd_edges.size()) {
            g.dd_edges.resize(r + 1);
            dd_seen.resize(r + 1);
        }
        detail::add_undirected(g.dd_edges[r], dd_seen[r], a, b);
    });

    g.protein_names = proteins.names();
    g.drug_names = drugs.names();
    g.relations = relations.names();
    g.num_proteins = g.protein_names.size();
    g.num_drugs = g.drug_names.size();
    return g;
}

/// Drops relations with fewer than min_count undirected edges; relation
/// ids are reindexed, node sets untouched.
inline MultiModalGraph filter_rare_relations(const MultiModalGraph& g,
                                             std::size_t min_count = 500) {
    MultiModalGraph out = g;
    out.relations.clear();
    out.dd_edges.clear();
    for (std::size_t r = 0; r < g.num_relations(); ++r) {
        if (g.dd_count(r) >= min_count) {
            out.relations.push_back(g.relations[r]);
            out.dd_edges.push_back(g.dd_edges[r]);
        }
    }
    return out;
}

/// Per-relation uniform split on undirected edges; both orientations of
/// an edge stay on the same side. Test size is floor((1-ratio)*count).
inline SplitGraph split_train_test(const MultiModalGraph& g, double ratio,
                                   std::uint64_t seed) {
    if (ratio < 0.0 || ratio > 1.0) {
        throw std::invalid_argument("split_train_test: ratio must be in [0,1]");
    }
    std::mt19937_64 rng(seed);
    SplitGraph split;
    split.train = g;
    split.test_positives.assign(g.num_relations(), {});
    split.test_negatives.assign(g.num_relations(), {});
    for (std::size_t r = 0; r < g.num_relations(); ++r) {
        EdgeList canon = g.dd_undirected(r);
        if (canon.size() < 2) {
            throw std::runtime_error("split_train_test: relation '" + g.relations[r] +
                                     "' has fewer than 2 edges");
        }
        shuffle_vector(canon, rng);
        const auto n_test = static_cast<std::size_t>(
            (1.0 - ratio) * static_cast<double>(canon.size()) + 1e-9);
        EdgeList& train = split.train.dd_edges[r];
        train.clear();
        for (std::size_t i = 0; i < canon.size() - n_test; ++i) {
            train.push_back(canon[i]);
            train.push_back({canon[i].second, canon[i].first});
        }
        for (std::size_t i = canon.size() - n_test; i < canon.size(); ++i) {
            split.test_positives[r].push_back(canon[i]);
        }
    }
    return split;
}

/// One negative per positive: corrupt one drug endpoint uniformly,
/// resampling until the pair is neither a self-loop nor a known positive
/// of the relation (checked against all dd edges of g).
inline RelationPairs sample_negatives(const RelationPairs& positives,
                                      const MultiModalGraph& g, std::mt19937_64& rng) {
    if (g.num_drugs < 3) {
        throw std::invalid_argument("sample_negatives: need at least 3 drugs");
    }
    RelationPairs negatives(positives.size());
    const std::size_t total_pairs = g.num_drugs * (g.num_drugs - 1) / 2;
    for (std::size_t r = 0; r < positives.size(); ++r) {
        std::unordered_set<std::uint64_t> known;
        for (const Edge& e : g.dd_edges[r]) {
            const Edge c = canonical(e);
            known.insert(edge_key(c.first, c.second));
        }
        if (known.size() * 100 >= total_pairs * 99) {
            throw std::runtime_error("sample_negatives: relation '" + g.relations[r] +
                                     "' is saturated (>=99% of all pairs are positive)");
        }
        negatives[r].reserve(positives[r].size());
        for (const Edge& pos : positives[r]) {
            for (;;) {
                const bool corrupt_first = uniform_index(rng, 2) == 0;
                const std::size_t replacement = uniform_index(rng, g.num_drugs);
                const Edge cand = canonical(corrupt_first ? Edge{replacement, pos.second}
                                                          : Edge{pos.first, replacement});
                if (cand.first == cand.second) continue;
                if (known.count(edge_key(cand.first, cand.second))) continue;
                negatives[r].push_back(cand);
                break;
            }
        }
    }
    return negatives;
}

inline RelationPairs sample_negatives(const RelationPairs& positives,
                                      const MultiModalGraph& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_negatives(positives, g, rng);
}

/// Planted-structure generator. Proteins and drugs belong to communities;
/// drugs target proteins of their own community; a D-D edge of relation r
/// is likely iff the two drugs' communities are compatible under r's
/// pattern, so the relational signal flows along the P-P -> P-D -> D-D
/// propagation path.
struct SynthConfig {
    std::size_t num_proteins = 200;
    std::size_t num_drugs = 50;
    std::size_t num_relations = 5;
    std::size_t num_communities = 0;  // 0 = max(4, num_relations)
    double pp_intra_prob = 0.3;
    double pp_inter_prob = 0.01;
    std::size_t targets_per_drug = 8;
    double dd_compatible_prob = 0.8;
    double dd_noise_prob = 0.01;
    double compat_density = 0.3;
};

/// Hidden structure behind a synthetic graph, for statistical checks.
struct SynthPlanted {
    std::size_t num_communities = 0;
    std::vector<std::size_t> drug_community;
    std::vector<std::vector<bool>> compat;  // per relation, C*C row-major

    bool compatible(std::size_t r, std::size_t drug_i, std::size_t drug_j) const {
        return compat[r][drug_community[drug_i] * num_communities + drug_community[drug_j]];
    }
};

inline MultiModalGraph synth_graph(const SynthConfig& cfg, std::uint64_t seed,
                                   SynthPlanted* planted = nullptr) {
    if (cfg.num_proteins == 0 || cfg.num_drugs == 0 || cfg.num_relations == 0) {
        throw std::invalid_argument("synth_graph: sizes must be positive");
    }
    const std::size_t C =
        cfg.num_communities ? cfg.num_communities : std::max<std::size_t>(4, cfg.num_relations);
    std::mt19937_64 rng(seed);

    MultiModalGraph g;
    g.num_proteins = cfg.num_proteins;
    g.num_drugs = cfg.num_drugs;
    for (std::size_t i = 0; i < cfg.num_proteins; ++i) {
        g.protein_names.push_back("P" + std::to_string(i));
    }
    for (std::size_t i = 0; i < cfg.num_drugs; ++i) {
        g.drug_names.push_back("D" + std::to_string(i));
    }
    for (std::size_t r = 0; r < cfg.num_relations; ++r) {
        g.relations.push_back("R" + std::to_string(r));
    }

    auto community_of = [C](std::size_t node) { return node % C; };

    std::unordered_set<std::uint64_t> pp_seen;
    for (std::size_t i = 0; i < cfg.num_proteins; ++i) {
        for (std::size_t j = i + 1; j < cfg.num_proteins; ++j) {
            const double p = community_of(i) == community_of(j) ? cfg.pp_intra_prob
                                                                : cfg.pp_inter_prob;
            if (uniform_unit(rng) < p) detail::add_undirected(g.pp_edges, pp_seen, i, j);
        }
    }

    std::vector<std::vector<std::size_t>> members(C);
    for (std::size_t i = 0; i < cfg.num_proteins; ++i) {
        members[community_of(i)].push_back(i);
    }
    for (std::size_t d = 0; d < cfg.num_drugs; ++d) {
        std::vector<std::size_t> pool = members[community_of(d)];
        shuffle_vector(pool, rng);
        const std::size_t k = std::min(cfg.targets_per_drug, pool.size());
        for (std::size_t t = 0; t < k; ++t) g.pd_edges.push_back({pool[t], d});
    }

    // symmetric compatibility pattern per relation, with one forced pair
    std::vector<std::vector<bool>> compat(cfg.num_relations, std::vector<bool>(C * C, false));
    for (std::size_t r = 0; r < cfg.num_relations; ++r) {
        for (std::size_t a = 0; a < C; ++a) {
            for (std::size_t b = a; b < C; ++b) {
                if (uniform_unit(rng) < cfg.compat_density) {
                    compat[r][a * C + b] = compat[r][b * C + a] = true;
                }
            }
        }
        const std::size_t a = r % C, b = (r + 1) % C;
        compat[r][a * C + b] = compat[r][b * C + a] = true;
    }

    if (planted) {
        planted->num_communities = C;
        planted->drug_community.resize(cfg.num_drugs);
        for (std::size_t d = 0; d < cfg.num_drugs; ++d) {
            planted->drug_community[d] = community_of(d);
        }
        planted->compat = compat;
    }

    g.dd_edges.resize(cfg.num_relations);
    for (std::size_t r = 0; r < cfg.num_relations; ++r) {
        std::unordered_set<std::uint64_t> seen;
        for (std::size_t i = 0; i < cfg.num_drugs; ++i) {
            for (std::size_t j = i + 1; j < cfg.num_drugs; ++j) {
                const bool ok = compat[r][community_of(i) * C + community_of(j)];
                const double p = ok ? cfg.dd_compatible_prob : cfg.dd_noise_prob;
                if (uniform_unit(rng) < p) detail::add_undirected(g.dd_edges[r], seen, i, j);
            }
        }
    }
    return g;
}

inline MultiModalGraph synth_graph(std::size_t num_proteins, std::size_t num_drugs,
                                   std::size_t num_relations, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.num_proteins = num_proteins;
    cfg.num_drugs = num_drugs;
    cfg.num_relations = num_relations;
    return synth_graph(cfg, seed);
}

}  // namespace tip
