#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>
#include <kgcl/kb.hpp>

namespace kgcl {

enum class Provenance { original, augmented };

// One replaced span, recorded on augmented copies for gating audits.
struct Replacement {
    size_t start = 0;  // character span in the source text
    size_t end = 0;
    std::string original;
    std::string replacement;
    std::string sense_id;
    kb::Predicate predicate = kb::Predicate::synonym;
};

struct LabeledInstance {
    std::string text;
    std::string label;  // namespaced class identifier, e.g. "gender:hateful"
    std::string task;
    Provenance provenance = Provenance::original;
    std::optional<std::string> source_id;  // set when provenance == augmented
    std::vector<Replacement> replacements;
};

inline nlohmann::json instance_to_json(const LabeledInstance& inst) {
    nlohmann::json j = {{"text", inst.text},
                        {"label", inst.label},
                        {"task", inst.task},
                        {"provenance",
                         inst.provenance == Provenance::original ? "original" : "augmented"}};
    if (inst.source_id) j["source_id"] = *inst.source_id;
    if (!inst.replacements.empty()) {
        nlohmann::json reps = nlohmann::json::array();
        for (const auto& r : inst.replacements) {
            reps.push_back({{"start", r.start},
                            {"end", r.end},
                            {"original", r.original},
                            {"replacement", r.replacement},
                            {"sense_id", r.sense_id},
                            {"predicate", kb::predicate_name(r.predicate)}});
        }
        j["replacements"] = std::move(reps);
    }
    return j;
}

}  // namespace kgcl
