#include "tayfcs/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "tayfcs/artifacts.hpp"
#include "tayfcs/common.hpp"
#include "tayfcs/eval.hpp"

namespace tayfcs::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

void PipelineConfig::validate() const {
    double sum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw ConfigError("split ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
    if (dnn.embed_dim == 0) throw ConfigError("embed_dim must be >= 1");
    if (dnn.train.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
    if (dnn.train.batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (selection.k > 0) {
        selection.validate();
    } else if (selection.k < 0) {
        throw ConfigError("selection: K must be >= 0");
    }
    // K = 0 is the documented no-op augmentation case: the select stage
    // emits an empty artifact without running LRE.
    if (threads < 1) throw ConfigError("threads must be >= 1");
    if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

namespace {

json require(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ConfigError(std::string("config: missing key '") + key + "'");
    }
    return j.at(key);
}

data::SyntheticSpec parse_synth(const json& j) {
    data::SyntheticSpec spec;
    spec.num_fields = require(j, "num_fields").get<int>();
    spec.value_counts = require(j, "value_counts").get<std::vector<uint32_t>>();
    if (j.contains("main_effect_weights")) {
        spec.main_effect_weights = j.at("main_effect_weights").get<std::vector<double>>();
    }
    if (j.contains("planted_combos")) {
        for (const auto& pc : j.at("planted_combos")) {
            data::PlantedCombo combo;
            combo.fields = require(pc, "fields").get<std::vector<int>>();
            const std::string pattern = pc.value("pattern", "xor-parity");
            if (pattern == "xor-parity") {
                combo.pattern = data::InteractionPattern::XorParity;
            } else if (pattern == "lookup-table") {
                combo.pattern = data::InteractionPattern::LookupTable;
            } else {
                throw ConfigError("synth: unknown pattern '" + pattern + "'");
            }
            combo.weight = require(pc, "weight").get<double>();
            spec.planted_combos.push_back(std::move(combo));
        }
    }
    spec.value_skew = j.value("value_skew", 1.0);
    spec.noise_level = j.value("noise_level", 0.0);
    spec.bias = j.value("bias", 0.0);
    spec.num_records = require(j, "num_records").get<size_t>();
    spec.seed = j.value("seed", uint64_t{0});
    return spec;
}

json synth_to_json(const data::SyntheticSpec& spec) {
    json j;
    j["num_fields"] = spec.num_fields;
    j["value_counts"] = spec.value_counts;
    if (!spec.main_effect_weights.empty()) j["main_effect_weights"] = spec.main_effect_weights;
    json combos = json::array();
    for (const auto& pc : spec.planted_combos) {
        json c;
        c["fields"] = pc.fields;
        c["pattern"] = pc.pattern == data::InteractionPattern::XorParity ? "xor-parity"
                                                                         : "lookup-table";
        c["weight"] = pc.weight;
        combos.push_back(std::move(c));
    }
    j["planted_combos"] = std::move(combos);
    j["value_skew"] = spec.value_skew;
    j["noise_level"] = spec.noise_level;
    j["bias"] = spec.bias;
    j["num_records"] = spec.num_records;
    j["seed"] = spec.seed;
    return j;
}

}  // namespace

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }

    PipelineConfig cfg;
    const json jd = require(j, "data");
    cfg.csv_path = jd.value("csv_path", "");
    cfg.label_column = jd.value("label_column", "label");
    const std::string delim = jd.value("delimiter", ",");
    if (delim.size() != 1) throw ConfigError("config: delimiter must be one character");
    cfg.delimiter = delim[0];
    if (jd.contains("ratios")) {
        const auto r = jd.at("ratios").get<std::vector<double>>();
        if (r.size() != 3) throw ConfigError("config: ratios must have 3 entries");
        cfg.ratios = {r[0], r[1], r[2]};
    }
    cfg.data_seed = jd.value("seed", uint64_t{42});

    if (j.contains("synth")) cfg.synth = parse_synth(j.at("synth"));

    if (j.contains("model")) {
        const json jm = j.at("model");
        cfg.dnn.embed_dim = jm.value("embed_dim", size_t{16});
        cfg.dnn.hidden_dims = jm.value("hidden_dims", std::vector<size_t>{64, 64});
        cfg.dnn.train.adam.lr = jm.value("learning_rate", 1e-3);
        cfg.dnn.train.batch_size = jm.value("batch_size", size_t{10000});
        cfg.dnn.train.max_epochs = jm.value("max_epochs", size_t{100});
        cfg.dnn.train.patience = jm.value("patience", size_t{2});
        cfg.dnn.train.seed = jm.value("seed", uint64_t{1});
    }

    if (j.contains("selection")) {
        const json js = j.at("selection");
        cfg.selection.k = js.value("k", 5);
        cfg.selection.window_size = js.value("window_size", 10);
        cfg.selection.max_iterations = js.value("t_iter", 1);
        cfg.selection.max_order = js.value("od_max", 3);
        cfg.selection.scoring_fraction = js.value("scoring_fraction", 1.0);
        cfg.selection.tau = js.value("tau", combiner::kDefaultTau);
        cfg.selection.seed = js.value("seed", uint64_t{3});
        const std::string source = js.value("signal_source", "loss");
        if (source == "loss") {
            cfg.signal_source = tayscorer::SignalSource::Loss;
        } else if (source == "logit") {
            cfg.signal_source = tayscorer::SignalSource::Logit;
        } else {
            throw ConfigError("config: signal_source must be 'loss' or 'logit'");
        }
        const std::string expansion = js.value("expansion_point", "data_mean");
        if (expansion == "data_mean") {
            cfg.expansion_mode = tayscorer::ExpansionMode::DataMean;
        } else if (expansion == "vocab_mean") {
            cfg.expansion_mode = tayscorer::ExpansionMode::VocabMean;
        } else {
            throw ConfigError("config: expansion_point must be 'data_mean' or 'vocab_mean'");
        }
        if (js.contains("surrogate")) {
            const json jr = js.at("surrogate");
            auto& s = cfg.selection.surrogate;
            s.originals.lr = jr.value("learning_rate", 0.1);
            s.originals.epochs = jr.value("epochs", size_t{5});
            s.originals.batch_size = jr.value("batch_size", size_t{512});
            s.originals.l2 = jr.value("l2", 1e-6);
            s.window_lr = jr.value("window_learning_rate", 0.5);
            s.window_iterations = jr.value("window_iterations", size_t{50});
            s.window_l1 = jr.value("window_l1", 0.05);
        }
        cfg.selection.surrogate.originals.seed = js.value("surrogate_seed", uint64_t{11});
    }

    cfg.output_dir = j.value("output_dir", "out");
    cfg.threads = j.value("threads", 1);
    cfg.validate();
    return cfg;
}

namespace {

json semantic_json(const PipelineConfig& cfg) {
    json j;
    j["data"] = {{"csv_path", cfg.csv_path},
                 {"label_column", cfg.label_column},
                 {"delimiter", std::string(1, cfg.delimiter)},
                 {"ratios", cfg.ratios},
                 {"seed", cfg.data_seed}};
    if (cfg.synth) j["synth"] = synth_to_json(*cfg.synth);
    j["model"] = {{"embed_dim", cfg.dnn.embed_dim},
                  {"hidden_dims", cfg.dnn.hidden_dims},
                  {"learning_rate", cfg.dnn.train.adam.lr},
                  {"batch_size", cfg.dnn.train.batch_size},
                  {"max_epochs", cfg.dnn.train.max_epochs},
                  {"patience", cfg.dnn.train.patience},
                  {"seed", cfg.dnn.train.seed}};
    const auto& s = cfg.selection.surrogate;
    j["selection"] = {
        {"k", cfg.selection.k},
        {"window_size", cfg.selection.window_size},
        {"t_iter", cfg.selection.max_iterations},
        {"od_max", cfg.selection.max_order},
        {"scoring_fraction", cfg.selection.scoring_fraction},
        {"tau", cfg.selection.tau},
        {"seed", cfg.selection.seed},
        {"signal_source",
         cfg.signal_source == tayscorer::SignalSource::Loss ? "loss" : "logit"},
        {"expansion_point",
         cfg.expansion_mode == tayscorer::ExpansionMode::DataMean ? "data_mean"
                                                                  : "vocab_mean"},
        {"surrogate",
         {{"learning_rate", s.originals.lr},
          {"epochs", s.originals.epochs},
          {"batch_size", s.originals.batch_size},
          {"l2", s.originals.l2},
          {"seed", s.originals.seed},
          {"window_learning_rate", s.window_lr},
          {"window_iterations", s.window_iterations},
          {"window_l1", s.window_l1}}}};
    return j;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write artifact: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw DataError("failed writing artifact: " + path);
}

json read_json_file(const std::string& path, const char* what) {
    std::ifstream in(path);
    if (!in) {
        throw DataError(std::string("missing ") + what + " artifact: " + path +
                        " (run the upstream stage first)");
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError(std::string("corrupt ") + what + " artifact " + path + ": " + e.what());
    }
    return j;
}

void check_hash(const json& artifact, const PipelineConfig& cfg, const char* what) {
    const std::string expected = config_hash(cfg);
    const std::string actual = artifact.value("config_hash", "");
    if (actual != expected) {
        throw ConfigError(std::string(what) + " artifact was produced by a different config (" +
                          actual + " != " + expected + "); refusing to run");
    }
}

json metrics_to_json(const eval::MetricsReport& r) {
    json j;
    j["auc"] = r.auc;
    j["logloss"] = r.logloss;
    j["record_count"] = r.record_count;
    j["model_id"] = r.model_id;
    j["split"] = r.split_tag;
    if (r.rel_imp_pct) j["rel_imp_pct"] = *r.rel_imp_pct;
    if (r.baseline_auc) j["baseline_auc"] = *r.baseline_auc;
    j["noteworthy"] = r.noteworthy;
    return j;
}

data::Dataset scoring_subset(const data::Dataset& val, double fraction, uint64_t seed) {
    if (fraction >= 1.0) return val;
    const size_t n = val.num_records();
    const size_t take = std::max<size_t>(1, static_cast<size_t>(
                                                std::ceil(fraction * static_cast<double>(n))));
    Rng rng(derive_seed(seed, "score.subsample"));
    std::vector<size_t> order = rng.permutation(n);
    order.resize(take);

    data::Dataset out;
    out.fields = val.fields;
    out.split_tag = val.split_tag + "-subsample";
    out.columns.assign(val.columns.size(), {});
    for (size_t f = 0; f < val.columns.size(); ++f) {
        out.columns[f].reserve(take);
        for (size_t r : order) out.columns[f].push_back(val.columns[f][r]);
    }
    out.labels.reserve(take);
    for (size_t r : order) out.labels.push_back(val.labels[r]);
    return out;
}

}  // namespace

std::string config_hash(const PipelineConfig& cfg) {
    return to_hex(fnv1a64(semantic_json(cfg).dump()));
}

StagePaths StagePaths::in(const std::string& out_dir) {
    StagePaths p;
    const fs::path d(out_dir);
    p.splits = (d / "splits.bin").string();
    p.prepare_meta = (d / "prepare.json").string();
    p.base_ckpt = (d / "base_model.ckpt").string();
    p.base_metrics = (d / "base_metrics.json").string();
    p.score_report = (d / "score_report.json").string();
    p.selection = (d / "selection.json").string();
    p.aug_ckpt = (d / "augmented_model.ckpt").string();
    p.final_metrics = (d / "final_metrics.json").string();
    p.ledger = (d / "results.jsonl").string();
    return p;
}

void stage_synth(const PipelineConfig& cfg) {
    if (!cfg.synth) throw ConfigError("synth stage requires a 'synth' config block");
    if (cfg.csv_path.empty()) {
        throw ConfigError("synth stage requires data.csv_path as the output location");
    }
    const data::Dataset ds = data::generate_synthetic(*cfg.synth);
    fs::create_directories(fs::path(cfg.csv_path).parent_path().empty()
                               ? "."
                               : fs::path(cfg.csv_path).parent_path().string());
    data::write_csv(ds, cfg.label_column, cfg.csv_path, cfg.delimiter);
}

void stage_prepare(const PipelineConfig& cfg) {
    if (cfg.csv_path.empty()) throw ConfigError("data.csv_path must be set");
    fs::create_directories(cfg.output_dir);
    const StagePaths paths = StagePaths::in(cfg.output_dir);

    const data::RawTable table = data::load_csv(cfg.csv_path, cfg.label_column, cfg.delimiter);
    const data::SplitIndices idx = data::split(table.rows.size(), cfg.ratios.data(),
                                               cfg.data_seed);
    const data::EncodedSplits splits = data::build_vocab_and_encode(table, idx);
    artifacts::save_splits(splits, paths.splits);

    json meta;
    meta["config_hash"] = config_hash(cfg);
    meta["splits_checksum"] = to_hex(artifacts::file_checksum(paths.splits));
    meta["num_fields"] = splits.train.num_fields();
    meta["rows"] = {{"train", splits.train.num_records()},
                    {"val", splits.val.num_records()},
                    {"test", splits.test.num_records()}};
    write_json_file(meta, paths.prepare_meta);
}

namespace {

data::EncodedSplits load_prepared(const PipelineConfig& cfg, const StagePaths& paths) {
    const json meta = read_json_file(paths.prepare_meta, "prepare");
    check_hash(meta, cfg, "prepare");
    const std::string expect = meta.value("splits_checksum", "");
    if (to_hex(artifacts::file_checksum(paths.splits)) != expect) {
        throw DataError("splits file does not match prepare metadata: " + paths.splits);
    }
    return artifacts::load_splits(paths.splits);
}

std::vector<int> identity_fields(const data::Dataset& ds) {
    std::vector<int> fields(ds.num_fields());
    for (size_t i = 0; i < fields.size(); ++i) fields[i] = static_cast<int>(i);
    return fields;
}

}  // namespace

void stage_train_base(const PipelineConfig& cfg) {
    const StagePaths paths = StagePaths::in(cfg.output_dir);
    const data::EncodedSplits splits = load_prepared(cfg, paths);

    nn::TrainResult history;
    const models::DnnModel model = models::train_dnn(
        splits.train, splits.val, identity_fields(splits.train), cfg.dnn, &history);
    models::save_dnn(model, paths.base_ckpt);

    const std::vector<double> probs = models::dnn_predict(model, splits.test, cfg.threads);
    const eval::MetricsReport report =
        eval::evaluate(splits.test.labels, probs, "dnn-base", "test");

    json meta;
    meta["config_hash"] = config_hash(cfg);
    meta["upstream"] = {{"splits_checksum", to_hex(artifacts::file_checksum(paths.splits))}};
    meta["checkpoint_checksum"] = to_hex(artifacts::file_checksum(paths.base_ckpt));
    meta["metrics"] = metrics_to_json(report);
    json hist = json::array();
    for (const auto& e : history.history) {
        hist.push_back({{"epoch", e.epoch},
                        {"train_loss", e.train_loss},
                        {"val_auc", e.val_auc},
                        {"val_logloss", e.val_logloss},
                        {"val_metric", e.val_metric}});
    }
    meta["history"] = std::move(hist);
    meta["best_epoch"] = history.best_epoch;
    write_json_file(meta, paths.base_metrics);
}

void stage_score(const PipelineConfig& cfg, const std::string& ckpt_override) {
    const StagePaths paths = StagePaths::in(cfg.output_dir);
    const data::EncodedSplits splits = load_prepared(cfg, paths);

    const std::string ckpt = ckpt_override.empty() ? paths.base_ckpt : ckpt_override;
    if (ckpt_override.empty()) {
        const json base_meta = read_json_file(paths.base_metrics, "train-base");
        check_hash(base_meta, cfg, "train-base");
    }
    const models::DnnModel model = models::load_dnn(ckpt);

    const data::Dataset scoring =
        scoring_subset(splits.val, cfg.selection.scoring_fraction, cfg.selection.seed);
    const tayscorer::ExpansionPoint x0 =
        tayscorer::compute_expansion_point(model, scoring, cfg.expansion_mode);
    const tayscorer::SignalMatrix signals =
        tayscorer::field_signals(model, x0, scoring, cfg.scoring_batch, cfg.signal_source);

    std::vector<tayscorer::ComboScore> order2 = tayscorer::score_order2(signals);
    std::vector<tayscorer::ComboScore> order3;
    if (cfg.selection.max_order >= 3) order3 = tayscorer::score_order3(signals);
    const std::vector<tayscorer::ComboScore> ranked =
        tayscorer::rank_combinations(std::move(order2), std::move(order3));

    json report;
    report["config_hash"] = config_hash(cfg);
    report["upstream"] = {{"checkpoint_checksum", to_hex(artifacts::file_checksum(ckpt))}};
    report["seed"] = cfg.selection.seed;
    report["scoring_records"] = scoring.num_records();
    report["od_max"] = cfg.selection.max_order;
    report["backward_passes"] = model.net.backward_passes;
    json entries = json::array();
    size_t rank = 1;
    for (const auto& cs : ranked) {
        json e;
        e["rank"] = rank++;
        e["fields"] = cs.fields;
        std::string name;
        for (size_t i = 0; i < cs.fields.size(); ++i) {
            if (i) name += 'x';
            name += splits.train.fields[static_cast<size_t>(cs.fields[i])].name;
        }
        e["name"] = name;
        e["order"] = cs.order();
        e["score"] = cs.score;
        entries.push_back(std::move(e));
    }
    report["entries"] = std::move(entries);
    write_json_file(report, paths.score_report);
}

void stage_select(const PipelineConfig& cfg, const std::string& report_override) {
    const StagePaths paths = StagePaths::in(cfg.output_dir);
    const data::EncodedSplits splits = load_prepared(cfg, paths);

    const std::string report_path =
        report_override.empty() ? paths.score_report : report_override;
    const json report = read_json_file(report_path, "score");
    if (report_override.empty()) check_hash(report, cfg, "score");

    json artifact;
    artifact["config_hash"] = config_hash(cfg);
    artifact["config"] = semantic_json(cfg);
    artifact["upstream"] = {{"score_report_checksum",
                             to_hex(artifacts::file_checksum(report_path))}};
    artifact["hash_algorithm"] = kHashAlgorithmId;
    artifact["tau"] = cfg.selection.tau;

    if (cfg.selection.k == 0) {
        artifact["selected"] = json::array();
        artifact["eviction_log"] = json::array();
        artifact["rounds"] = json::array();
        artifact["truncated"] = false;
        write_json_file(artifact, paths.selection);
        return;
    }

    std::vector<lre::Candidate> ranked;
    for (const auto& e : report.at("entries")) {
        lre::Candidate cand;
        cand.combo = combiner::make_combo(e.at("fields").get<std::vector<int>>(),
                                          splits.train.fields);
        cand.score = e.at("score").get<double>();
        cand.rank = e.at("rank").get<size_t>();
        ranked.push_back(std::move(cand));
    }

    const lre::SelectionArtifact result =
        lre::run_lre(ranked, splits.train, splits.val, cfg.selection);

    auto candidate_json = [&](const lre::Candidate& cand) {
        const combiner::HashedVocab hv = combiner::make_hashed_vocab(
            combiner::combined_cardinality(cand.combo, splits.train.fields),
            cfg.selection.tau);
        json c;
        c["fields"] = cand.combo.fields;
        c["name"] = cand.combo.name;
        c["order"] = cand.combo.order();
        c["score"] = cand.score;
        c["rank"] = cand.rank;
        c["raw_cardinality"] = combiner::format_uint128(hv.raw);
        c["effective_cardinality"] = hv.effective;
        c["hashed"] = hv.hashed();
        return c;
    };

    json selected = json::array();
    for (const auto& entry : result.selected) {
        json c = candidate_json(entry.candidate);
        if (entry.gain) {
            c["gain"] = *entry.gain;
        } else {
            c["gain"] = nullptr;
        }
        selected.push_back(std::move(c));
    }
    artifact["selected"] = std::move(selected);

    json evictions = json::array();
    for (const auto& rec : result.eviction_log) {
        json e = candidate_json(rec.candidate);
        e["gain"] = rec.gain;
        e["iteration"] = rec.iteration;
        evictions.push_back(std::move(e));
    }
    artifact["eviction_log"] = std::move(evictions);

    json rounds = json::array();
    for (const auto& round : result.rounds) {
        json r;
        r["iteration"] = round.iteration;
        r["baseline_logloss"] = round.baseline_logloss;
        json gains = json::array();
        for (const auto& rec : round.entries) {
            gains.push_back({{"name", rec.candidate.combo.name},
                             {"gain", rec.gain},
                             {"evicted", rec.evicted}});
        }
        r["gains"] = std::move(gains);
        rounds.push_back(std::move(r));
    }
    artifact["rounds"] = std::move(rounds);
    artifact["truncated"] = result.truncated;
    write_json_file(artifact, paths.selection);
}

void stage_augment(const PipelineConfig& cfg, const std::string& selection_override) {
    const StagePaths paths = StagePaths::in(cfg.output_dir);
    const data::EncodedSplits splits = load_prepared(cfg, paths);

    const std::string sel_path =
        selection_override.empty() ? paths.selection : selection_override;
    const json artifact = read_json_file(sel_path, "selection");
    check_hash(artifact, cfg, "selection");

    const json base_meta = read_json_file(paths.base_metrics, "train-base");
    check_hash(base_meta, cfg, "train-base");

    std::vector<combiner::CombinationSpec> combos;
    for (const auto& c : artifact.at("selected")) {
        combos.push_back(combiner::make_combo(c.at("fields").get<std::vector<int>>(),
                                              splits.train.fields));
    }
    const uint64_t tau = artifact.value("tau", cfg.selection.tau);
    const data::Dataset train_aug = combiner::materialize(splits.train, combos, tau);
    const data::Dataset val_aug = combiner::materialize(splits.val, combos, tau);
    const data::Dataset test_aug = combiner::materialize(splits.test, combos, tau);

    nn::TrainResult history;
    const models::DnnModel model = models::train_dnn(
        train_aug, val_aug, identity_fields(train_aug), cfg.dnn, &history);
    models::save_dnn(model, paths.aug_ckpt);

    eval::MetricsReport base_report;
    base_report.auc = base_meta.at("metrics").at("auc").get<double>();
    base_report.logloss = base_meta.at("metrics").at("logloss").get<double>();

    const std::vector<double> probs = models::dnn_predict(model, test_aug, cfg.threads);
    const eval::MetricsReport report =
        eval::evaluate(test_aug.labels, probs, "dnn-augmented", "test", &base_report);

    json meta;
    meta["config_hash"] = config_hash(cfg);
    meta["upstream"] = {
        {"selection_checksum", to_hex(artifacts::file_checksum(sel_path))},
        {"base_checkpoint_checksum", base_meta.value("checkpoint_checksum", "")}};
    meta["checkpoint_checksum"] = to_hex(artifacts::file_checksum(paths.aug_ckpt));
    meta["base"] = {{"auc", base_report.auc}, {"logloss", base_report.logloss}};
    meta["augmented"] = metrics_to_json(report);
    meta["num_combinations"] = combos.size();
    meta["best_epoch"] = history.best_epoch;
    write_json_file(meta, paths.final_metrics);

    json row;
    row["run"] = config_hash(cfg);
    row["k"] = combos.size();
    row["base_auc"] = base_report.auc;
    row["auc"] = report.auc;
    row["logloss"] = report.logloss;
    if (report.rel_imp_pct) row["rel_imp_pct"] = *report.rel_imp_pct;
    artifacts::append_jsonl(paths.ledger, row.dump());
}

namespace {

// A stage is current when its metadata exists, was produced by this config,
// and its recorded upstream checksums still match the files on disk.
bool stage_current(const PipelineConfig& cfg, const std::string& meta_path,
                   const std::vector<std::pair<std::string, std::string>>& upstream) {
    std::ifstream in(meta_path);
    if (!in) return false;
    json meta;
    try {
        in >> meta;
    } catch (...) {
        return false;
    }
    if (meta.value("config_hash", "") != config_hash(cfg)) return false;
    for (const auto& [key, path] : upstream) {
        std::string recorded;
        if (meta.contains("upstream") && meta.at("upstream").contains(key)) {
            recorded = meta.at("upstream").at(key).get<std::string>();
        }
        try {
            if (recorded != to_hex(artifacts::file_checksum(path))) return false;
        } catch (...) {
            return false;
        }
    }
    return true;
}

}  // namespace

void run_pipeline(const PipelineConfig& cfg) {
    const StagePaths paths = StagePaths::in(cfg.output_dir);
    fs::create_directories(cfg.output_dir);

    if (cfg.synth && !fs::exists(cfg.csv_path)) stage_synth(cfg);

    if (!stage_current(cfg, paths.prepare_meta, {})) stage_prepare(cfg);
    if (!stage_current(cfg, paths.base_metrics, {{"splits_checksum", paths.splits}})) {
        stage_train_base(cfg);
    }
    if (!stage_current(cfg, paths.score_report,
                       {{"checkpoint_checksum", paths.base_ckpt}})) {
        stage_score(cfg);
    }
    if (!stage_current(cfg, paths.selection,
                       {{"score_report_checksum", paths.score_report}})) {
        stage_select(cfg);
    }
    if (!stage_current(cfg, paths.final_metrics,
                       {{"selection_checksum", paths.selection}})) {
        stage_augment(cfg);
    }
}

}  // namespace tayfcs::pipeline
