#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/datapoint.hpp"
#include "seqa/scene_graph.hpp"

namespace seqa {

/// Generation prompt templates. Slots are written `{NAME}`; recognised
/// names are OBJ_STATE_DICT, OBJ_REL_DICT, GENERATED_QUERIES, X, Y, QUERIES.
struct PromptBundle {
    std::string system_template;
    std::string user_template;
    std::string regen_template;

    static PromptBundle defaults();
    /// JSON object {system, user, regen}; missing keys keep the defaults.
    static PromptBundle from_file(const std::filesystem::path& path);
};

/// Replaces every `{NAME}` whose NAME is a key of `slots`; other braces stay.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots);

/// One "class: [STATE, ...]" line per class, sorted by class name.
std::string obj_state_dict(const SceneGraph& scene);
/// One "subject RELATION target" line per relationship (class names), plus
/// "class INSIDE room" for objects carrying a room.
std::string obj_rel_dict(const SceneGraph& scene);

std::string render_system_prompt(const PromptBundle& prompts, const SceneGraph& scene,
                                 const std::vector<std::string>& representatives);
std::string render_user_prompt(const PromptBundle& prompts, std::size_t batch_size);
std::string render_regen_prompt(const PromptBundle& prompts, double percent_similar, std::size_t batch_size,
                                const std::vector<std::string>& similar_queries);

/// "[lightswitch: [ON], towels: [PRESENT]]"
std::string format_states(const std::vector<ConsensusState>& states);
/// "[lightswitch INSIDE bathroom, ...]"
std::string format_relations(const std::vector<ConsensusRelation>& relations);

}  // namespace seqa
