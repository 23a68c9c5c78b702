#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "tip/checkpoint.hpp"
#include "tip/graph.hpp"

namespace tip {

namespace detail {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write file: " + path);
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failure: " + path);
}

}  // namespace detail

/// Emits pp.csv / pd.csv / dd.csv with original node names, the layout
/// load_edge_lists consumes. Undirected edges appear once (canonical
/// orientation).
inline void write_edge_csvs(const MultiModalGraph& g, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    std::ostringstream pp;
    for (const Edge& e : g.pp_edges) {
        if (e.first < e.second) {
            pp << g.protein_names[e.first] << ',' << g.protein_names[e.second] << '\n';
        }
    }
    detail::write_text_file(dir + "/pp.csv", pp.str());

    std::ostringstream pd;
    for (const Edge& e : g.pd_edges) {
        pd << g.protein_names[e.first] << ',' << g.drug_names[e.second] << '\n';
    }
    detail::write_text_file(dir + "/pd.csv", pd.str());

    std::ostringstream dd;
    for (std::size_t r = 0; r < g.num_relations(); ++r) {
        for (const Edge& e : g.dd_edges[r]) {
            if (e.first < e.second) {
                dd << g.drug_names[e.first] << ',' << g.drug_names[e.second] << ','
                   << g.relations[r] << '\n';
            }
        }
    }
    detail::write_text_file(dir + "/dd.csv", dd.str());
}

struct SplitMeta {
    std::uint64_t format_version = 1;
    double split_ratio = 0.8;
    std::size_t min_count = 500;
    std::uint64_t seed_split = 0;
    std::uint64_t seed_test_neg = 0;
    std::uint64_t graph_hash = 0;
};

namespace detail {

inline std::string edges_csv(const EdgeList& edges) {
    std::ostringstream os;
    for (const Edge& e : edges) os << e.first << ',' << e.second << '\n';
    return os.str();
}

inline std::string relation_pairs_csv(const RelationPairs& pairs) {
    std::ostringstream os;
    for (std::size_t r = 0; r < pairs.size(); ++r) {
        for (const Edge& e : pairs[r]) os << e.first << ',' << e.second << ',' << r << '\n';
    }
    return os.str();
}

inline std::string train_dd_csv(const MultiModalGraph& train) {
    RelationPairs pairs(train.num_relations());
    for (std::size_t r = 0; r < train.num_relations(); ++r) {
        pairs[r] = train.dd_undirected(r);
    }
    return relation_pairs_csv(pairs);
}

}  // namespace detail

/// Writes a prepared split as a directory of CSVs (internal ids) plus
/// mapping.csv and meta.json; sets meta.graph_hash from the edge-file
/// contents before writing.
inline void save_split(const std::string& dir, const SplitGraph& split, SplitMeta meta) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const MultiModalGraph& train = split.train;

    std::ostringstream pp;
    for (const Edge& e : train.pp_edges) {
        if (e.first < e.second) pp << e.first << ',' << e.second << '\n';
    }
    const std::string pp_csv = pp.str();
    const std::string pd_csv = detail::edges_csv(train.pd_edges);
    const std::string train_csv = detail::train_dd_csv(train);
    const std::string pos_csv = detail::relation_pairs_csv(split.test_positives);
    const std::string neg_csv = detail::relation_pairs_csv(split.test_negatives);

    std::uint64_t hash = fnv1a64(pp_csv);
    hash = fnv1a64(pd_csv, hash);
    hash = fnv1a64(train_csv, hash);
    hash = fnv1a64(pos_csv, hash);
    hash = fnv1a64(neg_csv, hash);
    meta.graph_hash = hash;

    detail::write_text_file(dir + "/pp.csv", pp_csv);
    detail::write_text_file(dir + "/pd.csv", pd_csv);
    detail::write_text_file(dir + "/train_dd.csv", train_csv);
    detail::write_text_file(dir + "/test_pos.csv", pos_csv);
    detail::write_text_file(dir + "/test_neg.csv", neg_csv);

    std::ostringstream mapping;
    for (std::size_t i = 0; i < train.protein_names.size(); ++i) {
        mapping << "protein," << train.protein_names[i] << ',' << i << '\n';
    }
    for (std::size_t i = 0; i < train.drug_names.size(); ++i) {
        mapping << "drug," << train.drug_names[i] << ',' << i << '\n';
    }
    detail::write_text_file(dir + "/mapping.csv", mapping.str());

    nlohmann::json j;
    j["format_version"] = meta.format_version;
    j["num_proteins"] = train.num_proteins;
    j["num_drugs"] = train.num_drugs;
    j["relations"] = train.relations;
    j["split_ratio"] = meta.split_ratio;
    j["min_count"] = meta.min_count;
    j["seed_split"] = meta.seed_split;
    j["seed_test_neg"] = meta.seed_test_neg;
    j["graph_hash"] = meta.graph_hash;
    detail::write_text_file(dir + "/meta.json", j.dump(2) + "\n");
}

struct LoadedSplit {
    SplitGraph split;
    SplitMeta meta;
};

/// Recomputed content hash of a split directory's edge files.
inline std::uint64_t compute_split_hash(const std::string& dir) {
    std::uint64_t hash = fnv1a64(read_file_bytes(dir + "/pp.csv"));
    hash = fnv1a64(read_file_bytes(dir + "/pd.csv"), hash);
    hash = fnv1a64(read_file_bytes(dir + "/train_dd.csv"), hash);
    hash = fnv1a64(read_file_bytes(dir + "/test_pos.csv"), hash);
    hash = fnv1a64(read_file_bytes(dir + "/test_neg.csv"), hash);
    return hash;
}

inline LoadedSplit load_split(const std::string& dir) {
    LoadedSplit out;
    std::ifstream meta_in(dir + "/meta.json");
    if (!meta_in) throw std::runtime_error("cannot open " + dir + "/meta.json");
    nlohmann::json j = nlohmann::json::parse(meta_in);
    if (j.at("format_version").get<std::uint64_t>() != 1) {
        throw std::runtime_error("unsupported split format version");
    }
    out.meta.format_version = j.at("format_version").get<std::uint64_t>();
    out.meta.split_ratio = j.at("split_ratio").get<double>();
    out.meta.min_count = j.at("min_count").get<std::size_t>();
    out.meta.seed_split = j.at("seed_split").get<std::uint64_t>();
    out.meta.seed_test_neg = j.at("seed_test_neg").get<std::uint64_t>();
    out.meta.graph_hash = j.at("graph_hash").get<std::uint64_t>();

    MultiModalGraph& g = out.split.train;
    g.num_proteins = j.at("num_proteins").get<std::size_t>();
    g.num_drugs = j.at("num_drugs").get<std::size_t>();
    g.relations = j.at("relations").get<std::vector<std::string>>();

    g.protein_names.resize(g.num_proteins);
    g.drug_names.resize(g.num_drugs);
    detail::for_each_csv_row(dir + "/mapping.csv", 3,
                             [&](const std::vector<std::string>& f, std::size_t lineno) {
        const std::size_t id = std::stoull(f[2]);
        if (f[0] == "protein") {
            if (id >= g.num_proteins) {
                throw std::runtime_error(dir + "/mapping.csv:" + std::to_string(lineno) +
                                         ": protein id out of range");
            }
            g.protein_names[id] = f[1];
        } else if (f[0] == "drug") {
            if (id >= g.num_drugs) {
                throw std::runtime_error(dir + "/mapping.csv:" + std::to_string(lineno) +
                                         ": drug id out of range");
            }
            g.drug_names[id] = f[1];
        } else {
            throw std::runtime_error(dir + "/mapping.csv:" + std::to_string(lineno) +
                                     ": unknown entity type " + f[0]);
        }
    });

    detail::for_each_csv_row(dir + "/pp.csv", 2,
                             [&](const std::vector<std::string>& f, std::size_t) {
        const std::size_t a = std::stoull(f[0]), b = std::stoull(f[1]);
        g.pp_edges.push_back({a, b});
        g.pp_edges.push_back({b, a});
    });
    detail::for_each_csv_row(dir + "/pd.csv", 2,
                             [&](const std::vector<std::string>& f, std::size_t) {
        g.pd_edges.push_back({std::stoull(f[0]), std::stoull(f[1])});
    });

    const std::size_t nr = g.relations.size();
    g.dd_edges.resize(nr);
    out.split.test_positives.resize(nr);
    out.split.test_negatives.resize(nr);
    auto read_pairs = [&](const std::string& path, auto&& sink) {
        detail::for_each_csv_row(path, 3, [&](const std::vector<std::string>& f, std::size_t lineno) {
            const std::size_t a = std::stoull(f[0]), b = std::stoull(f[1]);
            const std::size_t r = std::stoull(f[2]);
            if (r >= nr || a >= g.num_drugs || b >= g.num_drugs) {
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": index out of range");
            }
            sink(a, b, r);
        });
    };
    read_pairs(dir + "/train_dd.csv", [&](std::size_t a, std::size_t b, std::size_t r) {
        g.dd_edges[r].push_back({a, b});
        g.dd_edges[r].push_back({b, a});
    });
    read_pairs(dir + "/test_pos.csv", [&](std::size_t a, std::size_t b, std::size_t r) {
        out.split.test_positives[r].push_back({a, b});
    });
    read_pairs(dir + "/test_neg.csv", [&](std::size_t a, std::size_t b, std::size_t r) {
        out.split.test_negatives[r].push_back({a, b});
    });
    return out;
}

}  // namespace tip
