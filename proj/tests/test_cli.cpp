#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) { return std::string(KGCL_FIXTURE_DIR "/") + name; }

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "kgcl_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run_cli(const std::string& args, const fs::path& stdout_path = {}) {
    std::string cmd = std::string(KGCL_CLI_PATH) + " " + args;
    if (stdout_path.empty()) {
        cmd += " >/dev/null 2>&1";
    } else {
        cmd += " > " + stdout_path.string() + " 2>/dev/null";
    }
    int rc = std::system(cmd.c_str());
    return rc == 0 ? 0 : 1;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

json slurp_json(const fs::path& path) { return json::parse(slurp(path)); }

void write_config(const fs::path& path, const std::string& approach, const fs::path& out_dir,
                  json extra = json::object()) {
    json config = {{"dataset",
                    {{"format", "synthetic"},
                     {"synthetic",
                      {{"tasks", 2},
                       {"train_per_task", 30},
                       {"valid_per_task", 10},
                       {"test_per_task", 10},
                       {"seed", 11}}}}},
                   {"approach", approach},
                   {"seeds", {1, 2}},
                   {"encoder",
                    {{"descriptor", "hashed-ngram"}, {"dim", 512}, {"ngram_orders", {1}}}},
                   {"train", {{"max_epochs", 4}, {"patience", 2}}},
                   {"buffer", {{"capacity", 10}}},
                   {"output_dir", out_dir.string()}};
    config.update(extra);
    std::ofstream out(path);
    out << config.dump(2);
}

}  // namespace

TEST_CASE("kb-build reports audited ingest statistics") {
    auto dir = fresh_dir("kb_build");
    auto stats_path = dir / "stats.json";
    int rc = run_cli("kb-build " + fixture("kb_dump.jsonl") + " -o " + (dir / "graph.json").string() +
                         " --tsv " + (dir / "triples.tsv").string(),
                     stats_path);
    REQUIRE(rc == 0);
    auto stats = slurp_json(stats_path);
    CHECK(stats.at("parsed_records") == 43);
    CHECK(stats.at("skipped_records") == 7);
    CHECK(stats.at("senses") == 55);
    CHECK(stats.at("unsupported_relations") == 9);
    CHECK(stats.at("duplicate_triples") == 6);
    CHECK(fs::exists(dir / "graph.json"));
    CHECK(slurp(dir / "triples.tsv").find('\t') != std::string::npos);
}

TEST_CASE("kb-build --strict fails on the first malformed line") {
    auto dir = fresh_dir("kb_strict");
    int rc = run_cli("kb-build " + fixture("kb_dump.jsonl") + " --strict -o " +
                     (dir / "graph.json").string());
    CHECK(rc != 0);
}

TEST_CASE("semantic-train separates the toy definitions and is reproducible") {
    auto dir = fresh_dir("sem_train");
    auto stats_path = dir / "stats.json";
    std::string base = "semantic-train " + fixture("definitions_toy.csv") + " -o ";
    REQUIRE(run_cli(base + (dir / "model.json").string(), stats_path) == 0);
    auto stats = slurp_json(stats_path);
    CHECK(stats.at("unique_definitions") == 20);
    CHECK(stats.at("holdout_accuracy") == 1.0);
    REQUIRE(run_cli(base + (dir / "model2.json").string()) == 0);
    CHECK(slurp(dir / "model.json") == slurp(dir / "model2.json"));
}

TEST_CASE("run produces the full artifact set for a replay approach") {
    auto dir = fresh_dir("run_rd");
    write_config(dir / "config.json", "RD", dir / "out");
    REQUIRE(run_cli("run -c " + (dir / "config.json").string()) == 0);

    for (const char* name :
         {"report.json", "resolved_config.json", "stream_manifest.json",
          "matrix_accuracy_seed1.csv", "matrix_auc_seed1.csv", "matrix_accuracy_seed2.csv",
          "buffer_seed1.jsonl", "buffer_manifest_seed1.json", "embeddings_seed1.csv"}) {
        CHECK(fs::exists(dir / "out" / name));
    }
    CHECK(fs::exists(dir / "out" / "checkpoints" / "seed1_stage0.json"));
    CHECK(fs::exists(dir / "out" / "checkpoints" / "seed2_stage1.json"));

    auto report = slurp_json(dir / "out" / "report.json");
    CHECK(report.at("approach") == "RD");
    CHECK(report.at("per_seed").size() == 2);
    CHECK_FALSE(report.at("per_seed")[0].contains("failure"));

    auto manifest = slurp_json(dir / "out" / "buffer_manifest_seed1.json");
    size_t total = 0;
    for (const auto& [task, count] : manifest.at("per_task_counts").items()) {
        total += count.get<size_t>();
    }
    CHECK(total <= 10);
}

TEST_CASE("run with NF emits no buffer artifacts") {
    auto dir = fresh_dir("run_nf");
    write_config(dir / "config.json", "NF", dir / "out");
    REQUIRE(run_cli("run -c " + (dir / "config.json").string()) == 0);
    CHECK(fs::exists(dir / "out" / "report.json"));
    CHECK_FALSE(fs::exists(dir / "out" / "buffer_seed1.jsonl"));
}

TEST_CASE("run is byte-identical across repeats and job counts") {
    auto dir = fresh_dir("run_repeat");
    write_config(dir / "config.json", "KR_sem", dir / "a");
    write_config(dir / "config2.json", "KR_sem", dir / "b");
    REQUIRE(run_cli("run -c " + (dir / "config.json").string()) == 0);
    REQUIRE(run_cli("run -c " + (dir / "config2.json").string() + " -j 2") == 0);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "buffer_seed1.jsonl") == slurp(dir / "b" / "buffer_seed1.jsonl"));
}

TEST_CASE("run rejects a semantic approach without deviant labels") {
    auto dir = fresh_dir("run_bad");
    write_config(dir / "config.json", "KR_sem", dir / "out",
                 {{"kb_path", fixture("kb_dump.jsonl")}});
    // kb_path points at an unscored dump-shaped file; loading it as a graph
    // artifact fails, so the run exits non-zero instead of silently degrading.
    CHECK(run_cli("run -c " + (dir / "config.json").string()) != 0);
}

TEST_CASE("report renders one markdown row per run directory") {
    auto dir = fresh_dir("report");
    write_config(dir / "config.json", "RD", dir / "out");
    REQUIRE(run_cli("run -c " + (dir / "config.json").string()) == 0);
    auto table_path = dir / "table.md";
    REQUIRE(run_cli("report " + (dir / "out").string() + " -o " + table_path.string()) == 0);
    std::string table = slurp(table_path);
    CHECK(table.find("| approach | A | AUC | F_A | F_AUC |") != std::string::npos);
    CHECK(table.find("| RD | ") != std::string::npos);
}

TEST_CASE("export-embeddings embeds a dataset with a checkpoint") {
    auto dir = fresh_dir("export_emb");
    write_config(dir / "config.json", "RD", dir / "out");
    REQUIRE(run_cli("run -c " + (dir / "config.json").string()) == 0);
    auto out_csv = dir / "emb.csv";
    REQUIRE(run_cli("export-embeddings --checkpoint " +
                    (dir / "out" / "checkpoints" / "seed1_stage1.json").string() + " --dataset " +
                    fixture("dataset_small.jsonl") + " -o " + out_csv.string()) == 0);
    std::istringstream lines(slurp(out_csv));
    std::string line;
    size_t count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 24);
}
