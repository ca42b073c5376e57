#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/scene_graph.hpp"

namespace seqa {

class Classifier;

enum class RoomCategory { Kitchen, LivingRoom, Bedroom, Bathroom, MultiRoom, NoRoom };
enum class SituationalLabel { Yes, No, Deferred };
enum class TemporalLabel { Spatial, Temporal, Deferred };

std::string_view to_string(RoomCategory c);
std::optional<RoomCategory> parse_room_category(std::string_view s);
std::string_view to_string(SituationalLabel l);
std::optional<SituationalLabel> parse_situational_label(std::string_view s);
std::string_view to_string(TemporalLabel l);
std::optional<TemporalLabel> parse_temporal_label(std::string_view s);

struct CategoryLabels {
    RoomCategory room = RoomCategory::NoRoom;
    SituationalLabel situational = SituationalLabel::Deferred;
    TemporalLabel temporal = TemporalLabel::Deferred;

    bool operator==(const CategoryLabels&) const = default;
};

struct Provenance {
    std::int64_t batch_index = 0;
    std::int64_t iteration = 0;
    std::string model_id;
    std::int64_t regeneration_count = 0;
    double temperature = 0.0;
    std::int64_t seed = 0;

    bool operator==(const Provenance&) const = default;
};

struct SituationalDatapoint {
    std::string id;
    std::string query;
    std::vector<ConsensusState> states;
    std::vector<ConsensusRelation> relations;
    Provenance provenance;
    std::optional<CategoryLabels> labels;

    bool operator==(const SituationalDatapoint&) const = default;
};

/// Interchange record: {id, query, states, relations, provenance, labels}.
json to_json(const SituationalDatapoint& d);
SituationalDatapoint datapoint_from_json(const json& j);
std::vector<SituationalDatapoint> read_datapoints(const std::filesystem::path& path);
void write_datapoints(const std::filesystem::path& path, const std::vector<SituationalDatapoint>& datapoints);

/// The word set W a situational query must avoid.
class Blocklist {
public:
    explicit Blocklist(std::set<std::string> words);
    /// "object" + scene vocabulary + synonyms, all lowercased.
    static Blocklist from_scene(const SceneGraph& scene, const std::vector<std::string>& synonyms = {});

    const std::set<std::string>& words() const { return words_; }
    bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
    /// Blocklisted word matched by `token` directly or via "s"/"es" folding.
    std::optional<std::string> match(std::string_view token) const;

private:
    std::set<std::string> words_;
};

enum class Contextual { Pass, Fail, Deferred };
std::string_view to_string(Contextual c);

struct ValidityVerdict {
    bool abstraction_ok = false;
    bool binary_ok = false;
    Contextual contextual = Contextual::Deferred;
    bool structure_ok = false;
    std::vector<std::string> reasons;

    bool accepted() const {
        return abstraction_ok && binary_ok && contextual != Contextual::Fail && structure_ok;
    }
};

json to_json(const ValidityVerdict& v, std::string_view id);

inline const std::set<std::string>& default_auxiliaries() {
    static const std::set<std::string> aux = {"is",  "are",  "was",   "were",   "has",  "have", "had",  "does",
                                              "do",  "did",  "can",   "could",  "should", "will", "would"};
    return aux;
}

bool check_abstraction(std::string_view query, const Blocklist& blocklist);
bool check_binary(std::string_view query, const std::set<std::string>& auxiliaries = default_auxiliaries());
/// Deferred without a classifier. ProviderError propagates.
Contextual check_contextual(std::string_view query, Classifier* classifier);

/// Eq. 1 conjuncts plus structural checks against the scene. Never throws
/// for bad data; a classifier ProviderError is rethrown naming the datapoint.
ValidityVerdict validate(const SituationalDatapoint& d, const SceneGraph& scene, const Blocklist& blocklist,
                         Classifier* classifier,
                         const std::set<std::string>& auxiliaries = default_auxiliaries());

}  // namespace seqa
