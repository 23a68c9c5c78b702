// tip: train and evaluate multi-relational drug-pair link prediction
// models on a protein/drug multimodal graph.
//
// Subcommands: synth | prepare | train | eval. Every command is
// deterministic given its flags and seeds.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tip/tip.hpp"

namespace {

std::vector<std::size_t> parse_dims(const std::string& csv) {
    std::vector<std::size_t> dims;
    std::stringstream ss(csv);
    std::string field;
    while (std::getline(ss, field, ',')) {
        dims.push_back(std::stoull(field));
    }
    if (dims.empty()) throw std::invalid_argument("empty dimension list");
    return dims;
}

std::string dims_to_csv(const std::vector<std::size_t>& dims) {
    std::ostringstream os;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) os << ',';
        os << dims[i];
    }
    return os.str();
}

nlohmann::json run_config_json(tip::ModelVariant variant, const tip::EncoderConfig& enc,
                               const tip::TrainConfig& tc) {
    nlohmann::json j;
    j["variant"] = tip::variant_name(variant);
    j["epochs"] = tc.epochs;
    j["learning_rate"] = tc.learning_rate;
    j["seed_init"] = tc.seed_init;
    j["seed_neg"] = tc.seed_neg;
    j["ppm_dims"] = enc.ppm_dims;
    j["ggm_mode"] = enc.ggm_mode == tip::GgmMode::Cat ? "cat" : "sum";
    j["ggm_protein_dim"] = enc.ggm_protein_dim;
    j["ggm_drug_dim"] = enc.ggm_drug_dim;
    j["ddm_dims"] = enc.ddm_dims;
    j["num_bases"] = enc.num_bases;
    j["nn_hidden"] = enc.nn_hidden;
    j["df_dim"] = enc.df_dim;
    return j;
}

tip::EncoderConfig encoder_config_from_json(const nlohmann::json& j) {
    tip::EncoderConfig enc;
    enc.ppm_dims = j.at("ppm_dims").get<std::vector<std::size_t>>();
    enc.ggm_mode = j.at("ggm_mode").get<std::string>() == "sum" ? tip::GgmMode::Sum
                                                                : tip::GgmMode::Cat;
    enc.ggm_protein_dim = j.at("ggm_protein_dim").get<std::size_t>();
    enc.ggm_drug_dim = j.at("ggm_drug_dim").get<std::size_t>();
    enc.ddm_dims = j.at("ddm_dims").get<std::vector<std::size_t>>();
    enc.num_bases = j.at("num_bases").get<std::size_t>();
    enc.nn_hidden = j.at("nn_hidden").get<std::size_t>();
    enc.df_dim = j.at("df_dim").get<std::size_t>();
    return enc;
}

void print_graph_summary(const tip::MultiModalGraph& g, std::ostream& os) {
    std::size_t dd_total = 0;
    for (std::size_t r = 0; r < g.num_relations(); ++r) dd_total += g.dd_count(r);
    os << "proteins:   " << g.num_proteins << "\n"
       << "drugs:      " << g.num_drugs << "\n"
       << "pp edges:   " << g.pp_edges.size() / 2 << "\n"
       << "pd edges:   " << g.pd_edges.size() << "\n"
       << "relations:  " << g.num_relations() << "\n"
       << "dd edges:   " << dd_total << "\n";
}

int cmd_synth(const tip::SynthConfig& cfg, std::uint64_t seed, const std::string& out) {
    const tip::MultiModalGraph g = tip::synth_graph(cfg, seed);
    tip::write_edge_csvs(g, out);
    std::cout << "wrote " << out << "/{pp,pd,dd}.csv\n";
    print_graph_summary(g, std::cout);
    return 0;
}

int cmd_prepare(const std::string& pp, const std::string& pd, const std::string& dd,
                std::size_t min_count, double ratio, std::uint64_t seed_split,
                std::uint64_t seed_test_neg, const std::string& out) {
    const tip::MultiModalGraph raw = tip::load_edge_lists(pp, pd, dd);
    std::cout << "loaded graph:\n";
    print_graph_summary(raw, std::cout);

    const tip::MultiModalGraph filtered = tip::filter_rare_relations(raw, min_count);
    if (filtered.num_relations() == 0) {
        throw std::runtime_error("no relations remain after filtering (min_count=" +
                                 std::to_string(min_count) + ")");
    }
    std::cout << "after filter (min_count=" << min_count << "): " << filtered.num_relations()
              << " relations\n";

    tip::SplitGraph split = tip::split_train_test(filtered, ratio, seed_split);
    split.test_negatives = tip::sample_negatives(split.test_positives, filtered, seed_test_neg);

    tip::SplitMeta meta;
    meta.split_ratio = ratio;
    meta.min_count = min_count;
    meta.seed_split = seed_split;
    meta.seed_test_neg = seed_test_neg;
    tip::save_split(out, split, meta);

    std::size_t train_edges = 0, test_edges = 0;
    for (std::size_t r = 0; r < filtered.num_relations(); ++r) {
        train_edges += split.train.dd_count(r);
        test_edges += split.test_positives[r].size();
    }
    std::cout << "train dd edges: " << train_edges << "\n"
              << "test dd edges:  " << test_edges << "\n"
              << "wrote split to " << out << "\n";
    return 0;
}

int cmd_train(const std::string& split_dir, const std::string& variant_name,
              const tip::TrainConfig& tc, const std::string& ppm_dims,
              const std::string& ddm_dims, std::size_t bases, std::size_t nn_hidden,
              std::size_t df_dim, const std::string& out) {
    const tip::ModelVariant variant = tip::parse_variant(variant_name);
    tip::EncoderConfig enc = tip::EncoderConfig::defaults(variant);
    if (!ppm_dims.empty()) enc.ppm_dims = parse_dims(ppm_dims);
    if (!ddm_dims.empty()) enc.ddm_dims = parse_dims(ddm_dims);
    if (bases) enc.num_bases = bases;
    if (nn_hidden) enc.nn_hidden = nn_hidden;
    if (df_dim) enc.df_dim = df_dim;

    const tip::LoadedSplit loaded = tip::load_split(split_dir);
    tip::TipModel model(variant, enc, loaded.split.train, tc.seed_init);

    const auto started = std::chrono::steady_clock::now();
    const tip::TrainResult result =
        tip::train(model, loaded.split, tc, [](std::size_t epoch, double loss) {
            std::cout << "epoch " << epoch << " loss " << loss << "\n";
        });
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (tc.epochs > 0) {
        std::cout << "trained " << tc.epochs << " epochs in " << elapsed << "s ("
                  << elapsed / static_cast<double>(tc.epochs) << "s/epoch)\n";
    }

    std::filesystem::create_directories(out);
    tip::Checkpoint ckpt = tip::Checkpoint::from_model(model);
    ckpt.config_json = run_config_json(variant, enc, tc).dump();
    ckpt.graph_hash = tip::compute_split_hash(split_dir);
    ckpt.epochs = tc.epochs;
    ckpt.final_loss = result.losses.empty() ? 0.0 : result.losses.back();
    tip::save_checkpoint(out + "/checkpoint.tip", ckpt);
    tip::detail::write_text_file(out + "/loss.csv", tip::loss_csv(result.losses));
    std::cout << "wrote " << out << "/checkpoint.tip and " << out << "/loss.csv\n";
    return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& split_dir,
             const std::string& out) {
    const tip::Checkpoint ckpt = tip::load_checkpoint(checkpoint_path);
    const std::uint64_t hash = tip::compute_split_hash(split_dir);
    if (hash != ckpt.graph_hash) {
        throw std::runtime_error("split directory does not match checkpoint (graph hash "
                                 "mismatch); refusing to evaluate");
    }
    const tip::LoadedSplit loaded = tip::load_split(split_dir);

    const nlohmann::json cfg = nlohmann::json::parse(ckpt.config_json);
    const tip::ModelVariant variant = tip::parse_variant(cfg.at("variant").get<std::string>());
    tip::TipModel model(variant, encoder_config_from_json(cfg), loaded.split.train, 0);
    ckpt.apply_to(model);

    const tip::EvalReport report = tip::evaluate(model, loaded.split);
    const tip::RankingReport extremes = tip::report_extremes(report);

    std::filesystem::create_directories(out);
    tip::detail::write_text_file(out + "/relations.jsonl", tip::report_jsonl(report));
    tip::detail::write_text_file(out + "/summary.json", tip::report_summary_json(report));
    tip::detail::write_text_file(out + "/extremes.json", tip::extremes_json(extremes));
    std::cout << "relations evaluated: " << report.relations.size()
              << " (skipped " << report.skipped.size() << ")\n"
              << "macro AUPRC " << report.macro_auprc << " AUROC " << report.macro_auroc
              << " AP@50 " << report.macro_ap50 << "\n"
              << "wrote reports to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tri-graph link prediction on protein/drug multimodal graphs"};
    app.set_config("--config", "", "Key-value config file; command-line flags win");
    app.require_subcommand(1);

    // synth
    tip::SynthConfig synth_cfg;
    std::uint64_t synth_seed = 7;
    std::string synth_out = "synth_data";
    auto* synth = app.add_subcommand("synth", "Generate a planted-structure synthetic dataset");
    synth->add_option("--proteins", synth_cfg.num_proteins, "Number of proteins");
    synth->add_option("--drugs", synth_cfg.num_drugs, "Number of drugs");
    synth->add_option("--relations", synth_cfg.num_relations, "Number of side-effect relations");
    synth->add_option("--communities", synth_cfg.num_communities,
                      "Planted communities (0 = auto)");
    synth->add_option("--dd-prob", synth_cfg.dd_compatible_prob,
                      "Edge probability on compatible pairs");
    synth->add_option("--dd-noise", synth_cfg.dd_noise_prob,
                      "Edge probability on incompatible pairs");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_option("--out", synth_out, "Output directory")->required();

    // prepare
    std::string pp_path, pd_path, dd_path, prepare_out = "prepared";
    std::size_t min_count = 500;
    double ratio = 0.8;
    std::uint64_t seed_split = 11, seed_test_neg = 13;
    auto* prepare = app.add_subcommand("prepare", "Load, filter, split, and freeze test negatives");
    prepare->add_option("--pp", pp_path, "Protein-protein edge CSV")->required();
    prepare->add_option("--pd", pd_path, "Protein-drug edge CSV")->required();
    prepare->add_option("--dd", dd_path, "Drug-drug edge CSV")->required();
    prepare->add_option("--min-count", min_count, "Minimum edges per relation");
    prepare->add_option("--ratio", ratio, "Train fraction of undirected edges");
    prepare->add_option("--seed-split", seed_split, "Split seed");
    prepare->add_option("--seed-neg", seed_test_neg, "Frozen test-negative seed");
    prepare->add_option("--out", prepare_out, "Output split directory")->required();

    // train
    std::string split_dir, variant_name = "tip-sum", train_out = "run";
    std::string ppm_dims_csv, ddm_dims_csv;
    std::size_t bases = 0, nn_hidden = 0, df_dim = 0;
    tip::TrainConfig tc;
    auto* train = app.add_subcommand("train", "Train a model on a prepared split");
    train->add_option("--split", split_dir, "Prepared split directory")->required();
    train->add_option("--variant", variant_name,
                      "tip-cat|tip-sum|ddm-df|ddm-nn|ppm-ggm-nn|df");
    train->add_option("--epochs", tc.epochs, "Training epochs");
    train->add_option("--lr", tc.learning_rate, "Adam learning rate");
    train->add_option("--seed-init", tc.seed_init, "Parameter init seed");
    train->add_option("--seed-neg", tc.seed_neg, "Training negative-sampling seed");
    train->add_option("--ppm-dims", ppm_dims_csv, "Override PPM layer dims, e.g. 32,16");
    train->add_option("--ddm-dims", ddm_dims_csv, "Override DDM layer dims, e.g. 32,16");
    train->add_option("--bases", bases, "Override basis count");
    train->add_option("--nn-hidden", nn_hidden, "Override NN decoder hidden dim");
    train->add_option("--df-dim", df_dim, "Override DF baseline feature dim");
    train->add_option("--out", train_out, "Output run directory")->required();

    // eval
    std::string ckpt_path, eval_split_dir, eval_out = "eval";
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a prepared split");
    eval->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    eval->add_option("--split", eval_split_dir, "Prepared split directory")->required();
    eval->add_option("--out", eval_out, "Output report directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth(synth_cfg, synth_seed, synth_out);
        if (prepare->parsed()) {
            return cmd_prepare(pp_path, pd_path, dd_path, min_count, ratio, seed_split,
                               seed_test_neg, prepare_out);
        }
        if (train->parsed()) {
            return cmd_train(split_dir, variant_name, tc, ppm_dims_csv, ddm_dims_csv, bases,
                             nn_hidden, df_dim, train_out);
        }
        if (eval->parsed()) return cmd_eval(ckpt_path, eval_split_dir, eval_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
