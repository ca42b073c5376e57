#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/datapoint.hpp"

namespace seqa {

struct ConsensusQuery {
    std::string parent_id;
    std::string class_name;
    StateValue expected = StateValue::On;
    std::string text;

    bool operator==(const ConsensusQuery&) const = default;
};

/// On, Off, Open, Closed, Present, Absent.
std::string_view surface_form(StateValue v);

/// "Is the <class> <State>?" for each consensus state, in order.
std::vector<ConsensusQuery> decompose(const SituationalDatapoint& d);

/// Replaces room mentions (with an optional leading determiner) by
/// "this place". Idempotent; object class tokens are never touched.
std::string genericize_room(std::string_view query);

/// {parent_id, class, state, text}
json to_json(const ConsensusQuery& q);
ConsensusQuery consensus_query_from_json(const json& j);
void write_consensus_queries(const std::filesystem::path& path, const std::vector<ConsensusQuery>& queries);
std::vector<ConsensusQuery> read_consensus_queries(const std::filesystem::path& path);

}  // namespace seqa
