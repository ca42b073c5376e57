#include "seqa/analysis.hpp"

#include "seqa/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <regex>

namespace seqa {

std::set<Room> rooms_mentioned(std::string_view query) {
    static const std::regex room_word(R"(\b(living[\s_]+room|livingroom|kitchen|bedroom|bathroom)\b)",
                                      std::regex::ECMAScript | std::regex::icase);
    std::set<Room> out;
    const std::string input(query);
    for (auto it = std::sregex_iterator(input.begin(), input.end(), room_word); it != std::sregex_iterator(); ++it)
    {
        const auto word = text::to_lower((*it)[1].str());
        if (word.starts_with("living")) out.insert(Room::LivingRoom);
        else if (const auto r = parse_room(word)) out.insert(*r);
    }
    return out;
}

RoomCategory categorize_room(const SituationalDatapoint& d, const SceneGraph& scene) {
    const auto to_category = [](Room r) {
        switch (r) {
            case Room::Kitchen: return RoomCategory::Kitchen;
            case Room::LivingRoom: return RoomCategory::LivingRoom;
            case Room::Bedroom: return RoomCategory::Bedroom;
            case Room::Bathroom: return RoomCategory::Bathroom;
        }
        return RoomCategory::NoRoom;
    };
    if (const auto named = rooms_mentioned(d.query); named.size() == 1) return to_category(*named.begin());

    std::set<Room> rooms;
    const auto add_class = [&](const std::string& cls) {
        for (const auto* obj : scene.objects_of_class(cls)) {
            const auto r = scene.rooms_of(obj->id);
            rooms.insert(r.begin(), r.end());
        }
    };
    for (const auto& s : d.states) add_class(s.class_name);
    for (const auto& r : d.relations) {
        if (const auto room = parse_room(r.target)) {
            if (r.relation == Relation::Inside) rooms.insert(*room);
        } else {
            add_class(r.target);
        }
        add_class(r.subject);
    }
    if (rooms.empty()) return RoomCategory::NoRoom;
    if (rooms.size() > 1) return RoomCategory::MultiRoom;
    return to_category(*rooms.begin());
}

SituationalLabel classify_situational(const SituationalDatapoint& d, Classifier* classifier) {
    if (!classifier) return SituationalLabel::Deferred;
    return classifier->is_situational(d.query) ? SituationalLabel::Yes : SituationalLabel::No;
}

TemporalLabel classify_temporal(const SituationalDatapoint& d, Classifier* classifier) {
    if (!classifier) return TemporalLabel::Deferred;
    return classifier->is_temporal(d.query) ? TemporalLabel::Temporal : TemporalLabel::Spatial;
}

void label_datapoints(std::vector<SituationalDatapoint>& datapoints, const SceneGraph& scene, Classifier* classifier) {
    for (auto& d : datapoints) {
        CategoryLabels labels;
        labels.room = categorize_room(d, scene);
        labels.situational = classify_situational(d, classifier);
        labels.temporal = classify_temporal(d, classifier);
        d.labels = labels;
    }
}

double median(std::vector<std::size_t> values) {
    if (values.empty()) throw EmptyInputError("median of an empty set");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    if (n % 2 == 1) return static_cast<double>(values[n / 2]);
    return (static_cast<double>(values[n / 2 - 1]) + static_cast<double>(values[n / 2])) / 2.0;
}

namespace {

Histogram histogram(const std::vector<std::size_t>& values, std::size_t width) {
    Histogram h;
    h.width = std::max<std::size_t>(1, width);
    for (const auto v : values) {
        const auto bucket = v / h.width;
        if (h.counts.size() <= bucket) h.counts.resize(bucket + 1, 0);
        ++h.counts[bucket];
    }
    return h;
}

json to_json(const Histogram& h) {
    json buckets = json::array();
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        buckets.push_back({{"lo", i * h.width}, {"hi", (i + 1) * h.width}, {"count", h.counts[i]}});
    return {{"width", h.width}, {"buckets", buckets}};
}

}  // namespace

LengthStats length_stats(const std::vector<std::string>& queries, const LengthOptions& options) {
    if (queries.empty()) throw EmptyInputError("no queries to measure");
    LengthStats s;
    for (const auto& q : queries) {
        auto body = text::trim(q);
        if (options.exclude_trailing_question_mark && body.ends_with('?')) body.remove_suffix(1);
        s.chars.push_back(text::utf8_length(body));
        s.words.push_back(text::split_whitespace(body).size());
    }
    s.median_chars = median(s.chars);
    s.median_words = median(s.words);
    s.char_histogram = histogram(s.chars, options.char_bucket_width);
    s.word_histogram = histogram(s.words, options.word_bucket_width);
    return s;
}

json stats_report(const std::vector<SituationalDatapoint>& labelled, const LengthStats& lengths, bool used_classifier) {
    constexpr RoomCategory kCategories[] = {RoomCategory::Kitchen,  RoomCategory::LivingRoom, RoomCategory::Bedroom,
                                            RoomCategory::Bathroom, RoomCategory::MultiRoom,  RoomCategory::NoRoom};
    std::map<RoomCategory, std::size_t> rooms;
    std::size_t situational = 0, situational_decided = 0, temporal = 0, temporal_decided = 0;
    for (const auto& d : labelled) {
        if (!d.labels) throw InvariantError(d.id, fmt::format("datapoint {} has no labels", d.id));
        ++rooms[d.labels->room];
        if (d.labels->situational != SituationalLabel::Deferred) {
            ++situational_decided;
            if (d.labels->situational == SituationalLabel::Yes) ++situational;
        }
        if (d.labels->temporal != TemporalLabel::Deferred) {
            ++temporal_decided;
            if (d.labels->temporal == TemporalLabel::Temporal) ++temporal;
        }
    }
    const auto pct = [](std::size_t num, std::size_t den) -> json {
        if (den == 0) return nullptr;
        return 100.0 * static_cast<double>(num) / static_cast<double>(den);
    };
    json distribution = json::object();
    for (const auto c : kCategories) distribution[std::string(to_string(c))] = pct(rooms[c], labelled.size());
    return {{"room_distribution", distribution},
            {"situational_pct", pct(situational, situational_decided)},
            {"spatial_pct", pct(temporal_decided - temporal, temporal_decided)},
            {"temporal_pct", pct(temporal, temporal_decided)},
            {"median_chars", lengths.median_chars},
            {"median_words", lengths.median_words},
            {"histogram", {{"chars", to_json(lengths.char_histogram)}, {"words", to_json(lengths.word_histogram)}}},
            {"counts", {{"datapoints", labelled.size()}}},
            {"label_sources",
             {{"room", "keyword-then-scene"},
              {"situational", used_classifier ? "classifier" : "deferred"},
              {"temporal", used_classifier ? "classifier" : "deferred"}}}};
}

std::vector<json> embedding_export(const std::vector<SituationalDatapoint>& datapoints, EmbeddingProvider& embedder) {
    std::vector<std::string> texts;
    texts.reserve(datapoints.size());
    for (const auto& d : datapoints) texts.push_back(d.query);
    const auto vectors = embedder.embed(texts);
    std::vector<json> rows;
    for (std::size_t i = 0; i < datapoints.size(); ++i) {
        const auto& d = datapoints[i];
        json labels = nullptr;
        if (d.labels)
            labels = {{"room", to_string(d.labels->room)},
                      {"situational", to_string(d.labels->situational)},
                      {"temporal", to_string(d.labels->temporal)}};
        rows.push_back({{"id", d.id}, {"text", d.query}, {"vector", vectors.at(i)}, {"labels", labels}});
    }
    return rows;
}

}  // namespace seqa
