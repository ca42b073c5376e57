#include "seqa/decomposition.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <cctype>
#include <regex>

namespace seqa {

std::string_view surface_form(StateValue v) {
    switch (v) {
        case StateValue::On: return "On";
        case StateValue::Off: return "Off";
        case StateValue::Open: return "Open";
        case StateValue::Closed: return "Closed";
        case StateValue::Present: return "Present";
        case StateValue::None: return "Absent";
    }
    return "?";
}

std::vector<ConsensusQuery> decompose(const SituationalDatapoint& d) {
    std::vector<ConsensusQuery> out;
    out.reserve(d.states.size());
    for (const auto& s : d.states)
        out.push_back({d.id, s.class_name, s.value, fmt::format("Is the {} {}?", s.class_name, surface_form(s.value))});
    return out;
}

std::string genericize_room(std::string_view query) {
    static const std::regex room_mention(
        R"(\b(?:(?:the|a|an|your|my|our|this)\s+)?(?:living[\s_]+room|livingroom|kitchen|bedroom|bathroom)\b)",
        std::regex::ECMAScript | std::regex::icase);
    const std::string input(query);
    std::string out;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(input.begin(), input.end(), room_mention); it != std::sregex_iterator();
         ++it) {
        const auto& m = *it;
        const auto pos = static_cast<std::size_t>(m.position(0));
        out.append(input, last, pos - last);
        out += std::isupper(static_cast<unsigned char>(input[pos])) ? "This place" : "this place";
        last = pos + static_cast<std::size_t>(m.length(0));
    }
    out.append(input, last, std::string::npos);
    return out;
}

json to_json(const ConsensusQuery& q) {
    return {{"parent_id", q.parent_id}, {"class", q.class_name}, {"state", to_string(q.expected)}, {"text", q.text}};
}

ConsensusQuery consensus_query_from_json(const json& j) {
    try {
        ConsensusQuery q;
        q.parent_id = j.at("parent_id").get<std::string>();
        q.class_name = j.at("class").get<std::string>();
        const auto state = j.at("state").get<std::string>();
        const auto v = parse_state(state);
        if (!v) throw SchemaError(q.parent_id, fmt::format("unknown state '{}'", state));
        q.expected = *v;
        q.text = j.at("text").get<std::string>();
        return q;
    } catch (const json::exception& e) {
        throw SchemaError(fmt::format("consensus query needs parent_id, class, state, text ({})", e.what()));
    }
}

void write_consensus_queries(const std::filesystem::path& path, const std::vector<ConsensusQuery>& queries) {
    std::vector<json> rows;
    rows.reserve(queries.size());
    for (const auto& q : queries) rows.push_back(to_json(q));
    jsonl::write_file(path, rows);
}

std::vector<ConsensusQuery> read_consensus_queries(const std::filesystem::path& path) {
    std::vector<ConsensusQuery> out;
    for (const auto& row : jsonl::read_file(path)) out.push_back(consensus_query_from_json(row));
    return out;
}

}  // namespace seqa
