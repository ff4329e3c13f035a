// Command-line driver: knowledge-base construction and scoring, definition
// model training, dataset augmentation, continual-learning experiment runs,
// and report aggregation.
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <kgcl/continual.hpp>
#include <kgcl/synthetic.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kgcl::ConfigError("cannot open " + path);
    json doc;
    in >> doc;
    return doc;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw kgcl::ConfigError("cannot write " + path.string());
    out << text;
}

void write_json_file(const fs::path& path, const json& doc) {
    write_text_file(path, doc.dump(2) + "\n");
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw kgcl::ConfigError(what + " does not exist: " + path);
}

kgcl::data::Format format_from_name(const std::string& name) {
    if (name == "jsonl") return kgcl::data::Format::jsonl;
    if (name == "csv") return kgcl::data::Format::csv;
    throw kgcl::ConfigError("unknown dataset format: " + name);
}

// ---------------------------------------------------------------- kb-build

int cmd_kb_build(const std::string& dump_path, const std::string& out_path, bool strict,
                 const std::string& tsv_path) {
    require_file(dump_path, "dump file");
    std::ifstream in(dump_path);
    kgcl::kb::IngestOptions options;
    options.strict = strict;
    auto result = kgcl::kb::ingest_dump(in, options);

    write_json_file(out_path, kgcl::kb::graph_to_json(result.graph));
    if (!tsv_path.empty()) {
        std::ofstream tsv(tsv_path, std::ios::binary);
        kgcl::kb::export_triples_tsv(result.graph, tsv);
    }
    json stats = {{"senses", result.graph.senses().size()},
                  {"parsed_records", result.stats.parsed_records},
                  {"skipped_records", result.stats.skipped_records},
                  {"unsupported_relations", result.stats.unsupported_relations},
                  {"duplicate_triples", result.stats.duplicate_triples},
                  {"triples_per_predicate", result.stats.triples_per_predicate},
                  {"errors", result.stats.errors}};
    std::cout << stats.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------- kb-score

int cmd_kb_score(const std::string& graph_path, const std::string& model_path,
                 const std::string& out_path) {
    require_file(graph_path, "graph file");
    require_file(model_path, "model file");
    auto graph = kgcl::kb::graph_from_json(read_json_file(graph_path));
    auto model = kgcl::semantics::model_from_json(read_json_file(model_path));
    auto scored = kgcl::semantics::score_graph(model, graph);
    write_json_file(out_path, kgcl::kb::graph_to_json(scored));
    size_t relevant = 0, not_relevant = 0, unscored = 0;
    for (const auto& [id, sense] : scored.senses()) {
        switch (sense.relevance) {
            case kgcl::kb::Relevance::relevant: ++relevant; break;
            case kgcl::kb::Relevance::not_relevant: ++not_relevant; break;
            default: ++unscored; break;
        }
    }
    std::cout << json{{"relevant", relevant},
                      {"not_relevant", not_relevant},
                      {"unscored", unscored}}
                     .dump(2)
              << "\n";
    return 0;
}

// ----------------------------------------------------------- semantic-train

int cmd_semantic_train(const std::string& csv_path, const std::string& out_path, uint64_t seed,
                       double holdout) {
    require_file(csv_path, "definitions CSV");
    std::ifstream in(csv_path);
    auto rows = kgcl::semantics::load_definition_rows(in);
    kgcl::semantics::DeriveStats derive_stats;
    auto examples = kgcl::semantics::derive_definition_dataset(rows, &derive_stats);

    // Seeded held-out split for the reported accuracy; the persisted model is
    // trained on the full derived set.
    kgcl::Rng rng(kgcl::mix64(seed, 0x686f6c64ull));
    std::vector<size_t> order(examples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    size_t held = static_cast<size_t>(static_cast<double>(examples.size()) * holdout);
    std::vector<kgcl::semantics::DefinitionExample> train_part, held_part;
    for (size_t i = 0; i < order.size(); ++i) {
        (i < held ? held_part : train_part).push_back(examples[order[i]]);
    }

    double held_accuracy = -1.0;
    if (!held_part.empty()) {
        bool pos = false, neg = false;
        for (const auto& ex : train_part) (ex.relevant ? pos : neg) = true;
        if (pos && neg) {
            auto probe = kgcl::semantics::train_definition_model(train_part, {}, seed);
            size_t hit = 0;
            for (const auto& ex : held_part) {
                if (probe.relevant(ex.gloss) == ex.relevant) ++hit;
            }
            held_accuracy = static_cast<double>(hit) / static_cast<double>(held_part.size());
        }
    }

    auto model = kgcl::semantics::train_definition_model(examples, {}, seed);
    write_json_file(out_path, kgcl::semantics::model_to_json(model));
    json stats = {{"rows", rows.size()},
                  {"unique_definitions", derive_stats.unique_definitions},
                  {"ties_dropped", derive_stats.ties_dropped},
                  {"holdout_fraction", holdout}};
    if (held_accuracy >= 0.0) stats["holdout_accuracy"] = held_accuracy;
    std::cout << stats.dump(2) << "\n";
    return 0;
}

// ----------------------------------------------------------------- augment

int cmd_augment(const std::string& graph_path, const std::string& dataset_path,
                const std::string& format_name, const std::string& out_path,
                const std::string& strategy_name, double p, size_t copies,
                const std::vector<std::string>& deviant_labels, uint64_t seed) {
    require_file(graph_path, "graph file");
    require_file(dataset_path, "dataset file");
    auto graph = kgcl::kb::graph_from_json(read_json_file(graph_path));
    std::ifstream in(dataset_path);
    auto records = kgcl::data::load_records(in, format_from_name(format_name));

    std::vector<kgcl::LabeledInstance> instances;
    for (const auto& rec : records) {
        kgcl::LabeledInstance inst;
        inst.text = rec.text;
        inst.label = rec.target + ":" + rec.label;
        inst.task = rec.target;
        instances.push_back(std::move(inst));
    }

    kgcl::augment::AugmentConfig config;
    if (strategy_name == "random") {
        config.strategy = kgcl::augment::Strategy::random;
    } else if (strategy_name == "semantic") {
        config.strategy = kgcl::augment::Strategy::semantic;
    } else {
        throw kgcl::ConfigError("unknown strategy: " + strategy_name);
    }
    config.replace_prob = p;
    config.copies_per_instance = copies;
    config.deviant_labels.insert(deviant_labels.begin(), deviant_labels.end());
    config.seed = seed;

    auto trie = kgcl::mention::build_trie(graph);
    auto out_instances = kgcl::augment::augment_dataset(instances, graph, trie, config);

    std::ostringstream body;
    for (const auto& inst : out_instances) {
        body << kgcl::instance_to_json(inst).dump() << "\n";
    }
    write_text_file(out_path, body.str());
    std::cout << json{{"input", instances.size()}, {"output", out_instances.size()}}.dump(2)
              << "\n";
    return 0;
}

// --------------------------------------------------------------------- run

struct LoadedExperiment {
    kgcl::data::TaskStream stream;
    kgcl::kb::KnowledgeGraph graph;
    std::shared_ptr<kgcl::encoder::Encoder> encoder;
    kgcl::continual::Approach approach;
    kgcl::continual::RunConfig run_config;
    std::vector<uint64_t> seeds;
    fs::path out_dir;
    json resolved;
};

LoadedExperiment load_experiment(const json& config) {
    LoadedExperiment exp;
    json resolved;

    // Dataset and stream.
    const json& dataset = config.at("dataset");
    std::string ds_format = dataset.value("format", "jsonl");
    json stream_cfg = config.value("stream", json::object());
    kgcl::data::StreamSpec stream_spec;
    stream_spec.order_seed = stream_cfg.value("order_seed", 0ull);
    stream_spec.train_cap = stream_cfg.value("train_cap", 2000ull);
    if (stream_cfg.contains("task_order")) {
        stream_spec.task_order = stream_cfg.at("task_order").get<std::vector<std::string>>();
    }

    std::optional<kgcl::synthetic::SyntheticData> synthetic;
    if (ds_format == "synthetic") {
        kgcl::synthetic::SyntheticSpec spec;
        json sp = dataset.value("synthetic", json::object());
        spec.tasks = sp.value("tasks", spec.tasks);
        spec.classes_per_task = sp.value("classes_per_task", spec.classes_per_task);
        spec.train_per_task = sp.value("train_per_task", spec.train_per_task);
        spec.valid_per_task = sp.value("valid_per_task", spec.valid_per_task);
        spec.test_per_task = sp.value("test_per_task", spec.test_per_task);
        uint64_t data_seed = sp.value("seed", 42ull);
        synthetic = kgcl::synthetic::make_synthetic_stream(spec, data_seed);
        exp.stream = synthetic->stream;
        resolved["dataset"] = {{"format", "synthetic"},
                               {"synthetic",
                                {{"tasks", spec.tasks},
                                 {"classes_per_task", spec.classes_per_task},
                                 {"train_per_task", spec.train_per_task},
                                 {"valid_per_task", spec.valid_per_task},
                                 {"test_per_task", spec.test_per_task},
                                 {"seed", data_seed}}}};
    } else {
        std::string path = dataset.at("path").get<std::string>();
        require_file(path, "dataset");
        std::ifstream in(path);
        auto records = kgcl::data::load_records(in, format_from_name(ds_format));
        exp.stream = kgcl::data::build_stream(records, stream_spec);
        resolved["dataset"] = {{"format", ds_format}, {"path", path}};
    }
    resolved["stream"] = {{"order_seed", stream_spec.order_seed},
                          {"train_cap", stream_spec.train_cap},
                          {"task_order", stream_spec.task_order}};

    // Approach and seeds.
    exp.approach =
        kgcl::continual::make_approach(kgcl::continual::approach_from_name(
            config.at("approach").get<std::string>()));
    exp.seeds = config.value("seeds", std::vector<uint64_t>{1, 2, 3});
    if (exp.seeds.empty()) throw kgcl::ConfigError("seeds must be non-empty");
    resolved["approach"] = kgcl::continual::approach_name(exp.approach.name);
    resolved["seeds"] = exp.seeds;

    // Encoder.
    json enc_cfg = config.value(
        "encoder", json{{"descriptor", "hashed-ngram"}});
    exp.encoder = kgcl::encoder::make_encoder(enc_cfg);
    resolved["encoder"] = kgcl::encoder::encoder_spec_to_json(*exp.encoder);

    // Train / buffer / augment configs.
    json train = config.value("train", json::object());
    auto& tc = exp.run_config.train;
    tc.learning_rate = train.value("learning_rate", tc.learning_rate);
    tc.batch_size = train.value("batch_size", tc.batch_size);
    tc.max_epochs = train.value("max_epochs", tc.max_epochs);
    tc.patience = train.value("patience", tc.patience);
    tc.weight_decay = train.value("weight_decay", tc.weight_decay);
    tc.replay_weight = train.value("replay_weight", tc.replay_weight);
    tc.seed = train.value("seed", tc.seed);
    resolved["train"] = {{"learning_rate", tc.learning_rate},
                         {"batch_size", tc.batch_size},
                         {"max_epochs", tc.max_epochs},
                         {"patience", tc.patience},
                         {"weight_decay", tc.weight_decay},
                         {"replay_weight", tc.replay_weight},
                         {"seed", tc.seed}};

    json buffer = config.value("buffer", json::object());
    auto& bc = exp.run_config.buffer;
    bc.capacity = buffer.value("capacity", bc.capacity);
    bc.seed = buffer.value("seed", bc.seed);
    resolved["buffer"] = {{"capacity", bc.capacity}, {"seed", bc.seed}};

    json aug = config.value("augment", json::object());
    auto& ac = exp.run_config.aug;
    ac.replace_prob = aug.value("p", ac.replace_prob);
    ac.copies_per_instance = aug.value("copies", ac.copies_per_instance);
    ac.seed = aug.value("seed", ac.seed);
    if (aug.contains("predicates")) {
        ac.predicates.clear();
        for (const auto& name : aug.at("predicates")) {
            auto pred = kgcl::kb::predicate_from_name(name.get<std::string>());
            if (!pred) throw kgcl::ConfigError("unknown predicate: " + name.get<std::string>());
            ac.predicates.insert(*pred);
        }
    }
    if (aug.contains("deviant_labels")) {
        for (const auto& label : aug.at("deviant_labels")) {
            ac.deviant_labels.insert(label.get<std::string>());
        }
    } else if (synthetic) {
        ac.deviant_labels = synthetic->deviant_labels;
    }
    json predicates = json::array();
    for (auto pred : ac.predicates) predicates.push_back(kgcl::kb::predicate_name(pred));
    resolved["augment"] = {{"p", ac.replace_prob},
                           {"copies", ac.copies_per_instance},
                           {"seed", ac.seed},
                           {"predicates", predicates},
                           {"deviant_labels", ac.deviant_labels}};

    json ablation = config.value("ablation", json::object());
    exp.run_config.pre_selection_augmentation =
        ablation.value("pre_selection_augmentation", true);
    exp.run_config.pre_learning_augmentation = ablation.value("pre_learning_augmentation", true);
    resolved["ablation"] = {
        {"pre_selection_augmentation", exp.run_config.pre_selection_augmentation},
        {"pre_learning_augmentation", exp.run_config.pre_learning_augmentation}};

    // Knowledge graph: explicit artifact, or the synthetic companion graph.
    bool needs_kb = exp.approach.replay_augmentation != kgcl::continual::ReplayAugmentation::none;
    bool needs_scored =
        exp.approach.replay_augmentation == kgcl::continual::ReplayAugmentation::semantic;
    if (config.contains("kb_path")) {
        std::string path = config.at("kb_path").get<std::string>();
        require_file(path, "kb artifact");
        exp.graph = kgcl::kb::graph_from_json(read_json_file(path));
        resolved["kb_path"] = path;
        if (needs_scored && config.contains("semantic_model_path")) {
            std::string mp = config.at("semantic_model_path").get<std::string>();
            require_file(mp, "semantic model");
            auto model = kgcl::semantics::model_from_json(read_json_file(mp));
            exp.graph = kgcl::semantics::score_graph(model, exp.graph);
            resolved["semantic_model_path"] = mp;
        }
    } else if (synthetic) {
        exp.graph = synthetic->graph;
        if (needs_scored) {
            uint64_t sseed = config.value("semantic_seed", 7ull);
            auto model =
                kgcl::semantics::train_definition_model(synthetic->definitions, {}, sseed);
            exp.graph = kgcl::semantics::score_graph(model, exp.graph);
            resolved["semantic_seed"] = sseed;
        }
    } else if (needs_kb) {
        throw kgcl::ConfigError("approach requires kb_path");
    }
    if (needs_scored) {
        bool any_scored = false;
        for (const auto& [id, sense] : exp.graph.senses()) {
            if (sense.relevance != kgcl::kb::Relevance::unscored) {
                any_scored = true;
                break;
            }
        }
        if (!any_scored) {
            throw kgcl::ConfigError(
                "KR_sem requires a relevance-scored kb (kb-score) or a semantic model");
        }
        if (ac.deviant_labels.empty()) {
            throw kgcl::ConfigError("KR_sem requires augment.deviant_labels");
        }
    }

    exp.out_dir = config.at("output_dir").get<std::string>();
    resolved["output_dir"] = exp.out_dir.string();
    exp.resolved = std::move(resolved);
    return exp;
}

void write_run_artifacts(const LoadedExperiment& exp,
                         const kgcl::continual::ExperimentReport& report,
                         const std::vector<kgcl::continual::RunState>& final_states) {
    write_json_file(exp.out_dir / "report.json",
                    kgcl::continual::report_to_json(report, exp.seeds));

    kgcl::data::StreamSpec manifest_spec;  // counts only; order already applied
    write_json_file(exp.out_dir / "stream_manifest.json",
                    kgcl::data::stream_manifest(exp.stream, manifest_spec));

    size_t state_idx = 0;
    for (const auto& result : report.per_seed) {
        if (result.failure) continue;
        const auto& state = final_states[state_idx++];
        std::string tag = "seed" + std::to_string(result.seed);

        for (auto metric : {kgcl::eval::Metric::accuracy, kgcl::eval::Metric::auc}) {
            std::string name = metric == kgcl::eval::Metric::accuracy ? "accuracy" : "auc";
            std::ofstream out(exp.out_dir / ("matrix_" + name + "_" + tag + ".csv"),
                              std::ios::binary);
            kgcl::eval::export_matrix_csv(result.matrix, metric, out);
        }

        if (state.buffer) {
            std::ostringstream body;
            for (const auto& inst : state.buffer->contents()) {
                body << kgcl::instance_to_json(inst).dump() << "\n";
            }
            write_text_file(exp.out_dir / ("buffer_" + tag + ".jsonl"), body.str());
            write_json_file(exp.out_dir / ("buffer_manifest_" + tag + ".json"),
                            state.buffer->manifest());
        }

        // Final-model embeddings of every test instance: task, label, D floats.
        std::ostringstream emb;
        for (const auto& task : exp.stream.tasks) {
            for (const auto& inst : task.test) {
                emb << kgcl::csv::quote(inst.task) << "," << kgcl::csv::quote(inst.label);
                for (double v : state.model.embed(inst.text)) emb << "," << v;
                emb << "\n";
            }
        }
        write_text_file(exp.out_dir / ("embeddings_" + tag + ".csv"), emb.str());
    }
}

int cmd_run(const std::string& config_path, size_t jobs) {
    require_file(config_path, "config file");
    auto exp = load_experiment(read_json_file(config_path));
    fs::create_directories(exp.out_dir);
    write_json_file(exp.out_dir / "resolved_config.json", exp.resolved);

    auto trie = kgcl::mention::build_trie(exp.graph);
    fs::create_directories(exp.out_dir / "checkpoints");
    kgcl::continual::StageObserver on_stage = [&](uint64_t seed, size_t stage,
                                                  const kgcl::continual::RunState& state) {
        write_json_file(exp.out_dir / "checkpoints" /
                            ("seed" + std::to_string(seed) + "_stage" + std::to_string(stage) +
                             ".json"),
                        kgcl::learner::checkpoint_to_json(state.model));
    };

    kgcl::continual::ExperimentReport report;
    std::vector<kgcl::continual::RunState> final_states;
    if (jobs <= 1 || exp.seeds.size() == 1) {
        report = kgcl::continual::run_experiment(exp.stream, exp.approach, exp.run_config,
                                                 exp.graph, trie, exp.encoder, exp.seeds,
                                                 &final_states, on_stage);
    } else {
        // Independent seed cells in parallel; results merged in seed order so
        // the report is byte-identical to a sequential run.
        std::vector<std::future<std::pair<kgcl::continual::ExperimentReport,
                                          std::vector<kgcl::continual::RunState>>>>
            cells;
        for (uint64_t seed : exp.seeds) {
            cells.push_back(std::async(std::launch::async, [&, seed] {
                std::vector<kgcl::continual::RunState> states;
                auto cell = kgcl::continual::run_experiment(
                    exp.stream, exp.approach, exp.run_config, exp.graph, trie, exp.encoder,
                    {seed}, &states, on_stage);
                return std::make_pair(std::move(cell), std::move(states));
            }));
        }
        report.approach = exp.approach;
        std::vector<double> acc, auc, f_acc, f_auc;
        for (auto& cell : cells) {
            auto [cell_report, states] = cell.get();
            const auto& r = cell_report.per_seed.front();
            if (!r.failure) {
                acc.push_back(r.final_accuracy);
                auc.push_back(r.final_auc);
                f_acc.push_back(r.forgetting_accuracy);
                f_auc.push_back(r.forgetting_auc);
                final_states.push_back(std::move(states.front()));
            }
            report.per_seed.push_back(r);
        }
        report.accuracy = kgcl::continual::detail::aggregate(acc);
        report.auc = kgcl::continual::detail::aggregate(auc);
        report.forgetting_accuracy = kgcl::continual::detail::aggregate(f_acc);
        report.forgetting_auc = kgcl::continual::detail::aggregate(f_auc);
    }

    write_run_artifacts(exp, report, final_states);
    std::cout << json{{"approach", kgcl::continual::approach_name(exp.approach.name)},
                      {"A_mean", report.accuracy.mean},
                      {"AUC_mean", report.auc.mean},
                      {"F_A_mean", report.forgetting_accuracy.mean},
                      {"output_dir", exp.out_dir.string()}}
                     .dump(2)
              << "\n";
    for (const auto& r : report.per_seed) {
        if (r.failure) {
            std::cerr << "seed " << r.seed << " failed: " << *r.failure << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------------ report

std::string pct(double mean, double std_dev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f ± %.1f", mean * 100.0, std_dev * 100.0);
    return buf;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out_path) {
    std::ostringstream table;
    table << "| approach | A | AUC | F_A | F_AUC |\n";
    table << "| --- | --- | --- | --- | --- |\n";
    for (const auto& dir : run_dirs) {
        auto doc = read_json_file((fs::path(dir) / "report.json").string());
        const auto& agg = doc.at("aggregate");
        table << "| " << doc.at("approach").get<std::string>() << " | "
              << pct(agg.at("A_mean"), agg.at("A_std")) << " | "
              << pct(agg.at("AUC_mean"), agg.at("AUC_std")) << " | "
              << pct(agg.at("F_A_mean"), agg.at("F_A_std")) << " | "
              << pct(agg.at("F_AUC_mean"), agg.at("F_AUC_std")) << " |\n";
    }
    if (out_path.empty()) {
        std::cout << table.str();
    } else {
        write_text_file(out_path, table.str());
    }
    return 0;
}

// ------------------------------------------------------- export-embeddings

int cmd_export_embeddings(const std::string& checkpoint_path, const std::string& dataset_path,
                          const std::string& format_name, const std::string& out_path) {
    require_file(checkpoint_path, "checkpoint");
    require_file(dataset_path, "dataset");
    auto model = kgcl::learner::checkpoint_from_json(read_json_file(checkpoint_path));
    std::ifstream in(dataset_path);
    auto records = kgcl::data::load_records(in, format_from_name(format_name));
    std::ostringstream out;
    for (const auto& rec : records) {
        out << kgcl::csv::quote(rec.target) << ","
            << kgcl::csv::quote(rec.target + ":" + rec.label);
        for (double v : model.embed(rec.text)) out << "," << v;
        out << "\n";
    }
    write_text_file(out_path, out.str());
    std::cout << json{{"rows", records.size()}}.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Knowledge-guided continual text classification toolkit"};
    app.require_subcommand(1);

    // kb-build
    std::string kb_dump, kb_out, kb_tsv;
    bool kb_strict = false;
    auto* kb_build = app.add_subcommand("kb-build", "Ingest a JSONL dump into a graph artifact");
    kb_build->add_option("dump", kb_dump, "JSONL dump path")->required();
    kb_build->add_option("-o,--out", kb_out, "Output graph JSON")->required();
    kb_build->add_flag("--strict", kb_strict, "Fail on the first malformed line");
    kb_build->add_option("--tsv", kb_tsv, "Also export triples as TSV");

    // kb-score
    std::string score_graph_path, score_model, score_out;
    auto* kb_score = app.add_subcommand("kb-score", "Score graph senses with a definition model");
    kb_score->add_option("--graph", score_graph_path, "Graph artifact")->required();
    kb_score->add_option("--model", score_model, "Definition model JSON")->required();
    kb_score->add_option("-o,--out", score_out, "Output scored graph")->required();

    // semantic-train
    std::string sem_csv, sem_out;
    uint64_t sem_seed = 7;
    double sem_holdout = 0.2;
    auto* sem_train =
        app.add_subcommand("semantic-train", "Train the definition relevance model");
    sem_train->add_option("definitions", sem_csv, "Definitions CSV")->required();
    sem_train->add_option("-o,--out", sem_out, "Output model JSON")->required();
    sem_train->add_option("--seed", sem_seed, "Training seed");
    sem_train->add_option("--holdout", sem_holdout, "Held-out fraction for reported accuracy")
        ->check(CLI::Range(0.0, 0.9));

    // augment
    std::string aug_graph, aug_dataset, aug_format = "jsonl", aug_out, aug_strategy = "random";
    double aug_p = 0.15;
    size_t aug_copies = 3;
    std::vector<std::string> aug_deviant;
    uint64_t aug_seed = 0;
    auto* augment = app.add_subcommand("augment", "Augment a dataset via the knowledge graph");
    augment->add_option("--graph", aug_graph, "Graph artifact")->required();
    augment->add_option("--dataset", aug_dataset, "Dataset path")->required();
    augment->add_option("--format", aug_format, "Dataset format: jsonl|csv");
    augment->add_option("-o,--out", aug_out, "Output JSONL")->required();
    augment->add_option("--strategy", aug_strategy, "random|semantic");
    augment->add_option("-p,--replace-prob", aug_p, "Per-mention replacement probability");
    augment->add_option("--copies", aug_copies, "Copies per instance");
    augment->add_option("--deviant", aug_deviant, "Deviant labels (semantic strategy)");
    augment->add_option("--seed", aug_seed, "Augmentation seed");

    // run
    std::string run_config;
    size_t run_jobs = 1;
    auto* run = app.add_subcommand("run", "Execute a continual-learning experiment");
    run->add_option("-c,--config", run_config, "Experiment config JSON")->required();
    run->add_option("-j,--jobs", run_jobs, "Parallel seed cells");

    // report
    std::vector<std::string> report_dirs;
    std::string report_out;
    auto* report = app.add_subcommand("report", "Aggregate run directories into a table");
    report->add_option("dirs", report_dirs, "Run directories")->required();
    report->add_option("-o,--out", report_out, "Write the table here instead of stdout");

    // export-embeddings
    std::string emb_ckpt, emb_dataset, emb_format = "jsonl", emb_out;
    auto* export_emb =
        app.add_subcommand("export-embeddings", "Embed a dataset with a model checkpoint");
    export_emb->add_option("--checkpoint", emb_ckpt, "Checkpoint JSON")->required();
    export_emb->add_option("--dataset", emb_dataset, "Dataset path")->required();
    export_emb->add_option("--format", emb_format, "Dataset format: jsonl|csv");
    export_emb->add_option("-o,--out", emb_out, "Output CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*kb_build) return cmd_kb_build(kb_dump, kb_out, kb_strict, kb_tsv);
        if (*kb_score) return cmd_kb_score(score_graph_path, score_model, score_out);
        if (*sem_train) return cmd_semantic_train(sem_csv, sem_out, sem_seed, sem_holdout);
        if (*augment) {
            return cmd_augment(aug_graph, aug_dataset, aug_format, aug_out, aug_strategy, aug_p,
                               aug_copies, aug_deviant, aug_seed);
        }
        if (*run) return cmd_run(run_config, run_jobs);
        if (*report) return cmd_report(report_dirs, report_out);
        if (*export_emb) return cmd_export_embeddings(emb_ckpt, emb_dataset, emb_format, emb_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
