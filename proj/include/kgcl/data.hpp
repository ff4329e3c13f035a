#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>
#include <kgcl/common.hpp>
#include <kgcl/csv.hpp>
#include <kgcl/instance.hpp>

namespace kgcl::data {

enum class Split { train, valid, test };

inline std::optional<Split> split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "valid") return Split::valid;
    if (name == "test") return Split::test;
    return std::nullopt;
}

struct RawRecord {
    std::string text;
    std::string label;
    std::string target;  // task key, e.g. identity group
    Split split = Split::train;
};

struct LoadStats {
    size_t loaded = 0;
    size_t skipped = 0;
    std::vector<std::string> errors;
};

enum class Format { jsonl, csv };

namespace detail {

inline std::optional<RawRecord> make_record(const std::string& text, const std::string& label,
                                            const std::string& target, const std::string& split,
                                            std::string& error) {
    if (text.empty() || label.empty() || target.empty()) {
        error = "empty required field";
        return std::nullopt;
    }
    auto s = split_from_name(split);
    if (!s) {
        error = "unknown split: " + split;
        return std::nullopt;
    }
    return RawRecord{text, label, target, *s};
}

}  // namespace detail

// Dataset rows: {"text", "label", "target", "split"} as JSONL or CSV.
inline std::vector<RawRecord> load_records(std::istream& in, Format format, bool strict = false,
                                           LoadStats* stats_out = nullptr) {
    std::vector<RawRecord> records;
    LoadStats stats;
    auto reject = [&](size_t row_no, const std::string& message) {
        std::string msg = "row " + std::to_string(row_no) + ": " + message;
        if (strict) throw ParseError(msg);
        ++stats.skipped;
        stats.errors.push_back(std::move(msg));
    };

    if (format == Format::jsonl) {
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            try {
                nlohmann::json j = nlohmann::json::parse(line);
                std::string error;
                auto rec = detail::make_record(j.value("text", ""), j.value("label", ""),
                                               j.value("target", ""), j.value("split", ""),
                                               error);
                if (!rec) {
                    reject(line_no, error);
                    continue;
                }
                records.push_back(std::move(*rec));
                ++stats.loaded;
            } catch (const nlohmann::json::exception& e) {
                reject(line_no, e.what());
            }
        }
    } else {
        std::vector<std::string> header;
        if (!csv::read_row(in, header)) {
            if (stats_out) *stats_out = stats;
            return records;
        }
        std::map<std::string, size_t> cols;
        for (size_t i = 0; i < header.size(); ++i) cols[header[i]] = i;
        for (const char* required : {"text", "label", "target", "split"}) {
            if (!cols.contains(required)) {
                throw ParseError(std::string("missing column: ") + required);
            }
        }
        std::vector<std::string> row;
        size_t row_no = 1;
        while (csv::read_row(in, row)) {
            ++row_no;
            if (row.size() == 1 && row[0].empty()) continue;
            if (row.size() < header.size()) {
                reject(row_no, "too few fields");
                continue;
            }
            std::string error;
            auto rec = detail::make_record(row[cols["text"]], row[cols["label"]],
                                           row[cols["target"]], row[cols["split"]], error);
            if (!rec) {
                reject(row_no, error);
                continue;
            }
            records.push_back(std::move(*rec));
            ++stats.loaded;
        }
    }
    if (stats_out) *stats_out = stats;
    return records;
}

struct TaskBundle {
    size_t task_id = 0;
    std::string name;  // target string
    std::vector<std::string> classes;  // namespaced "target:label"
    std::vector<LabeledInstance> train;
    std::vector<LabeledInstance> valid;
    std::vector<LabeledInstance> test;
};

struct TaskStream {
    std::vector<TaskBundle> tasks;
    uint64_t order_seed = 0;
};

struct StreamSpec {
    std::vector<std::string> task_order;  // explicit order; empty -> seeded shuffle
    uint64_t order_seed = 0;
    size_t train_cap = 2000;
};

// Groups records by target, namespaces labels as "target:label", caps train
// splits by seeded uniform subsampling, and orders tasks per the spec.
inline TaskStream build_stream(const std::vector<RawRecord>& records, const StreamSpec& spec) {
    std::map<std::string, std::vector<const RawRecord*>> by_target;
    for (const auto& rec : records) by_target[rec.target].push_back(&rec);

    std::vector<std::string> order = spec.task_order;
    if (order.empty()) {
        for (const auto& [target, rows] : by_target) order.push_back(target);
        Rng rng(mix64(spec.order_seed, 0x6f72646572ull));
        rng.shuffle(order);
    } else {
        for (const auto& name : order) {
            if (!by_target.contains(name)) {
                throw ConfigError("task order names unknown target: " + name);
            }
        }
    }

    TaskStream stream;
    stream.order_seed = spec.order_seed;
    for (size_t t = 0; t < order.size(); ++t) {
        const std::string& target = order[t];
        TaskBundle bundle;
        bundle.task_id = t;
        bundle.name = target;
        std::set<std::string> classes;
        for (const RawRecord* rec : by_target[target]) {
            LabeledInstance inst;
            inst.text = rec->text;
            inst.label = target + ":" + rec->label;
            inst.task = target;
            classes.insert(inst.label);
            switch (rec->split) {
                case Split::train: bundle.train.push_back(std::move(inst)); break;
                case Split::valid: bundle.valid.push_back(std::move(inst)); break;
                case Split::test: bundle.test.push_back(std::move(inst)); break;
            }
        }
        bundle.classes.assign(classes.begin(), classes.end());
        if (bundle.train.empty() || bundle.test.empty()) {
            throw ConfigError("task '" + target + "' has an empty train or test split");
        }
        if (spec.train_cap > 0 && bundle.train.size() > spec.train_cap) {
            Rng rng(mix64(spec.order_seed, fnv1a64(target)));
            std::vector<LabeledInstance> capped;
            for (size_t idx : rng.sample_indices(bundle.train.size(), spec.train_cap)) {
                capped.push_back(std::move(bundle.train[idx]));
            }
            bundle.train = std::move(capped);
        }
        stream.tasks.push_back(std::move(bundle));
    }
    return stream;
}

inline nlohmann::json stream_manifest(const TaskStream& stream, const StreamSpec& spec) {
    nlohmann::json tasks = nlohmann::json::array();
    for (const auto& t : stream.tasks) {
        tasks.push_back({{"name", t.name},
                         {"classes", t.classes},
                         {"counts",
                          {{"train", t.train.size()},
                           {"valid", t.valid.size()},
                           {"test", t.test.size()}}}});
    }
    return {{"tasks", tasks}, {"order_seed", spec.order_seed}, {"cap", spec.train_cap}};
}

}  // namespace kgcl::data
