#include "seqa/prompts.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <set>

namespace seqa {

namespace {

constexpr std::string_view kSystemTemplate =
    "I have a list of objects, and their states, and relationships in a household.\n"
    "Object states are listed in the OBJ_STATE_DICT dictionary below. Each item has the format OBJECT: [STATES].\n"
    "STATES, IF PRESENT, can switch between ON/OFF and OPEN/CLOSED. Do not conjure any new objects or states.\n"
    "OBJ_REL_DICT contains the initial relationships between the objects. These can be changed. "
    "For instance, \"apple INSIDE fridge\" is a valid relation.\n"
    "OBJ_STATE_DICT :-\n"
    "{OBJ_STATE_DICT}\n"
    "OBJ_REL_DICT :-\n"
    "{OBJ_REL_DICT}\n"
    "GENERATED_QUERIES :-\n"
    "{GENERATED_QUERIES}\n";

constexpr std::string_view kUserTemplate =
    "Using OBJ_STATE_DICT and OBJ_REL_DICT, can you generate {X} potential questions, states and relationships "
    "that the user might ask about the environment?\n"
    "These must be about a potential scenario, requiring situational awareness and a consensus on multiple "
    "object, their states and relationships.\n"
    "The output should be lines of the form [Question, Object-State Pairs, Relationships].\n"
    "Make sure you generate questions very different from those in GENERATED_QUERIES. "
    "Get creative with the potential scenarios!\n"
    "Make sure to use an exhaustive set of relationships and object-state pairs for each query.\n"
    "The query must have a Yes/No answer.\n"
    "The query must not directly reference any object or even contain the word 'object'.\n"
    "Format: reply with only a JSON array of {X} elements. Each element is an object "
    "{\"query\": \"<question>\", \"states\": [[\"<object>\", \"<STATE>\"], ...], "
    "\"relations\": [[\"<object>\", \"INSIDE|ON\", \"<object or room>\"], ...]}.\n";

constexpr std::string_view kRegenTemplate =
    "{X}% of the questions are similar to what you've already generated earlier! Try again, give me {Y} more.\n"
    "QUERIES:\n"
    "{QUERIES}\n";

}  // namespace

PromptBundle PromptBundle::defaults() {
    return {std::string(kSystemTemplate), std::string(kUserTemplate), std::string(kRegenTemplate)};
}

PromptBundle PromptBundle::from_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::parse_error& e) {
        throw SchemaError(path.string(), e.what());
    }
    auto out = defaults();
    const auto take = [&](const char* key, std::string& dst) {
        if (!doc.contains(key)) return;
        if (!doc[key].is_string()) throw SchemaError(path.string(), fmt::format("'{}' must be a string", key));
        dst = doc[key].get<std::string>();
    };
    take("system", out.system_template);
    take("user", out.user_template);
    take("regen", out.regen_template);
    return out;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                const auto it = slots.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != slots.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::string obj_state_dict(const SceneGraph& scene) {
    std::map<std::string, std::set<StateDomain>> by_class;
    for (const auto& [id, obj] : scene.objects()) {
        auto& domains = by_class[obj.class_name];
        for (const auto& [d, v] : obj.states) domains.insert(d);
    }
    std::string out;
    for (const auto& [cls, domains] : by_class) {
        std::vector<std::string_view> values;
        for (const auto d : domains) {
            const auto [a, b] = values_of(d);
            values.push_back(to_string(a));
            values.push_back(to_string(b));
        }
        out += fmt::format("{}: [{}]\n", cls, fmt::join(values, ", "));
    }
    if (!out.empty()) out.pop_back();
    return out;
}

std::string obj_rel_dict(const SceneGraph& scene) {
    std::set<std::string> seen;
    std::vector<std::string> lines;
    const auto add = [&](std::string line) {
        if (seen.insert(line).second) lines.push_back(std::move(line));
    };
    for (const auto& rel : scene.relationships()) {
        const auto* subject = scene.find(rel.subject);
        const auto* target = scene.find(rel.target);
        add(fmt::format("{} {} {}", subject->class_name, to_string(rel.relation),
                        target ? target->class_name : rel.target));
    }
    for (const auto& [id, obj] : scene.objects())
        if (obj.room) add(fmt::format("{} INSIDE {}", obj.class_name, to_string(*obj.room)));
    return fmt::format("{}", fmt::join(lines, "\n"));
}

std::string render_system_prompt(const PromptBundle& prompts, const SceneGraph& scene,
                                 const std::vector<std::string>& representatives) {
    return render_template(prompts.system_template,
                           {{"OBJ_STATE_DICT", obj_state_dict(scene)},
                            {"OBJ_REL_DICT", obj_rel_dict(scene)},
                            {"GENERATED_QUERIES", fmt::format("{}", fmt::join(representatives, "\n"))}});
}

std::string render_user_prompt(const PromptBundle& prompts, std::size_t batch_size) {
    return render_template(prompts.user_template, {{"X", std::to_string(batch_size)}});
}

std::string render_regen_prompt(const PromptBundle& prompts, double percent_similar, std::size_t batch_size,
                                const std::vector<std::string>& similar_queries) {
    return render_template(prompts.regen_template,
                           {{"X", text::format_number(percent_similar)},
                            {"Y", std::to_string(batch_size)},
                            {"QUERIES", fmt::format("{}", fmt::join(similar_queries, "\n"))}});
}

std::string format_states(const std::vector<ConsensusState>& states) {
    std::vector<std::string> parts;
    for (const auto& s : states) parts.push_back(fmt::format("{}: [{}]", s.class_name, to_string(s.value)));
    return fmt::format("[{}]", fmt::join(parts, ", "));
}

std::string format_relations(const std::vector<ConsensusRelation>& relations) {
    std::vector<std::string> parts;
    for (const auto& r : relations) parts.push_back(fmt::format("{} {} {}", r.subject, to_string(r.relation), r.target));
    return fmt::format("[{}]", fmt::join(parts, ", "));
}

}  // namespace seqa
