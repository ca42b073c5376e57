#include "seqa/response_parser.hpp"

#include <fmt/format.h>

#include <cctype>
#include <optional>
#include <variant>

namespace seqa {

json to_json(const ParseFailure& f) { return {{"offset", f.offset}, {"reason", f.reason}}; }

namespace {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive
};

struct ArrayScan {
    std::vector<Span> elements;
    std::size_t end = 0;  // one past the closing bracket, or raw.size()
};

/// Splits a bracketed array starting at `open` into its top-level element
/// spans. Only double quotes delimit strings. Unterminated input yields
/// whatever elements were found, the last one running to the end.
ArrayScan scan_array(std::string_view raw, std::size_t open) {
    ArrayScan scan;
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    std::size_t element_start = open + 1;
    const auto push = [&](std::size_t end) {
        auto b = element_start;
        auto e = end;
        while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
        if (b < e) scan.elements.push_back({b, e});
    };
    for (std::size_t i = open; i < raw.size(); ++i) {
        const char c = raw[i];
        if (in_string) {
            if (escaped) escaped = false;
            else if (c == '\\') escaped = true;
            else if (c == '"') in_string = false;
            continue;
        }
        switch (c) {
            case '"': in_string = true; break;
            case '[':
            case '{': ++depth; break;
            case ']':
            case '}':
                --depth;
                if (depth == 0) {
                    push(i);
                    scan.end = i + 1;
                    return scan;
                }
                break;
            case ',':
                if (depth == 1) {
                    push(i);
                    element_start = i + 1;
                }
                break;
            default: break;
        }
    }
    push(raw.size());
    scan.end = raw.size();
    return scan;
}

std::string normalize_class(std::string_view s) { return text::to_lower(text::trim(s)); }

std::string strip_quotes(std::string_view s) {
    s = text::trim(s);
    while (!s.empty() && (s.front() == '"' || s.front() == '\'' || s.front() == '`')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == '"' || s.back() == '\'' || s.back() == '`')) s.remove_suffix(1);
    return std::string(text::trim(s));
}

/// Splits on commas at bracket depth 0, outside double quotes.
std::vector<std::string> split_top_level(std::string_view s) {
    std::vector<std::string> out;
    int depth = 0;
    bool in_string = false;
    std::string cur;
    for (const char c : s) {
        if (c == '"') in_string = !in_string;
        if (!in_string) {
            if (c == '[' || c == '{') ++depth;
            if (c == ']' || c == '}') --depth;
            if (c == ',' && depth == 0) {
                if (!text::trim(cur).empty()) out.emplace_back(text::trim(cur));
                cur.clear();
                continue;
            }
        }
        cur.push_back(c);
    }
    if (!text::trim(cur).empty()) out.emplace_back(text::trim(cur));
    return out;
}

struct ElementError {
    std::string reason;
};

using StatesOrError = std::variant<std::vector<ConsensusState>, ElementError>;

std::optional<ElementError> add_state(std::vector<ConsensusState>& out, std::string_view cls, std::string_view state) {
    const auto name = normalize_class(cls);
    if (name.empty()) return ElementError{"empty object name in states"};
    const auto value = parse_state(strip_quotes(state));
    if (!value) return ElementError{fmt::format("unknown state '{}' for {}", strip_quotes(state), name)};
    out.push_back({name, *value});
    return std::nullopt;
}

std::optional<ElementError> add_relation(std::vector<ConsensusRelation>& out, std::string_view s, std::string_view r,
                                         std::string_view t) {
    const auto rel = parse_relation(strip_quotes(r));
    if (!rel) return ElementError{fmt::format("unknown relation '{}'", strip_quotes(r))};
    const auto subject = normalize_class(strip_quotes(s));
    const auto target = normalize_class(strip_quotes(t));
    if (subject.empty() || target.empty()) return ElementError{"empty name in relation"};
    out.push_back({subject, *rel, target});
    return std::nullopt;
}

/// "subject RELATION target" with a single-word relation token.
std::optional<ElementError> add_relation_text(std::vector<ConsensusRelation>& out, std::string_view line) {
    const auto tokens = text::split_whitespace(strip_quotes(line));
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
        if (!parse_relation(tokens[i])) continue;
        std::string subject, target;
        for (std::size_t k = 0; k < i; ++k) subject += tokens[k];
        for (std::size_t k = i + 1; k < tokens.size(); ++k) target += (k > i + 1 ? " " : "") + tokens[k];
        return add_relation(out, subject, tokens[i], target);
    }
    return ElementError{fmt::format("cannot read relation '{}'", strip_quotes(line))};
}

std::optional<ElementError> read_json_states(const json& j, std::vector<ConsensusState>& out) {
    const auto state_list = [&](const std::string& cls, const json& v) -> std::optional<ElementError> {
        if (v.is_string()) return add_state(out, cls, v.get<std::string>());
        if (v.is_array()) {
            for (const auto& s : v) {
                if (!s.is_string()) return ElementError{fmt::format("state of {} must be a string", cls)};
                if (auto e = add_state(out, cls, s.get<std::string>())) return e;
            }
            return std::nullopt;
        }
        return ElementError{fmt::format("state of {} must be a string", cls)};
    };
    if (j.is_object()) {
        for (const auto& [cls, v] : j.items())
            if (auto e = state_list(cls, v)) return e;
        return std::nullopt;
    }
    if (!j.is_array()) return ElementError{"'states' must be an array"};
    for (const auto& item : j) {
        if (item.is_array() && item.size() == 2 && item[0].is_string()) {
            if (auto e = state_list(item[0].get<std::string>(), item[1])) return e;
        } else if (item.is_string()) {
            const auto s = item.get<std::string>();
            const auto colon = s.find(':');
            if (colon == std::string::npos) return ElementError{fmt::format("cannot read state '{}'", s)};
            if (auto e = add_state(out, s.substr(0, colon), s.substr(colon + 1))) return e;
        } else if (item.is_object()) {
            for (const auto& [cls, v] : item.items())
                if (auto e = state_list(cls, v)) return e;
        } else {
            return ElementError{"states entries must be [object, state] pairs"};
        }
    }
    return std::nullopt;
}

std::optional<ElementError> read_json_relations(const json& j, std::vector<ConsensusRelation>& out) {
    if (!j.is_array()) return ElementError{"'relations' must be an array"};
    for (const auto& item : j) {
        if (item.is_array() && item.size() == 3 && item[0].is_string() && item[1].is_string() && item[2].is_string()) {
            if (auto e = add_relation(out, item[0].get<std::string>(), item[1].get<std::string>(),
                                      item[2].get<std::string>()))
                return e;
        } else if (item.is_string()) {
            if (auto e = add_relation_text(out, item.get<std::string>())) return e;
        } else {
            return ElementError{"relations entries must be [subject, relation, target]"};
        }
    }
    return std::nullopt;
}

std::variant<SituationalDatapoint, ElementError> from_json_element(std::string_view element) {
    json j;
    try {
        j = json::parse(element);
    } catch (const json::parse_error&) {
        return ElementError{"malformed JSON element"};
    }
    if (!j.is_object()) return ElementError{"element is not an object"};
    SituationalDatapoint d;
    const auto query = j.find("query");
    if (query == j.end()) return ElementError{"missing query"};
    if (!query->is_string()) return ElementError{"query must be a string"};
    d.query = std::string(text::trim(query->get<std::string>()));
    const auto states = j.find("states");
    if (states == j.end()) return ElementError{"missing states"};
    if (auto e = read_json_states(*states, d.states)) return *e;
    if (const auto rels = j.find("relations"); rels != j.end() && !rels->is_null())
        if (auto e = read_json_relations(*rels, d.relations)) return *e;
    return d;
}

/// Contents between the bracket at `open` and its partner.
std::optional<std::pair<std::string_view, std::size_t>> bracket_group(std::string_view s, std::size_t open) {
    int depth = 0;
    for (std::size_t i = open; i < s.size(); ++i) {
        if (s[i] == '[') ++depth;
        if (s[i] == ']' && --depth == 0) return std::make_pair(s.substr(open + 1, i - open - 1), i + 1);
    }
    return std::nullopt;
}

std::variant<SituationalDatapoint, ElementError> from_bracketed(std::string_view record) {
    record = text::trim(record);
    if (record.ends_with(',')) record = text::trim(record.substr(0, record.size() - 1));
    if (record.size() < 2 || record.front() != '[' || record.back() != ']')
        return ElementError{"record is not bracketed"};
    const auto body = record.substr(1, record.size() - 2);

    // The question runs up to the first bracket outside double quotes.
    std::size_t states_open = std::string_view::npos;
    bool in_string = false;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if (body[i] == '"') in_string = !in_string;
        if (!in_string && body[i] == '[') {
            states_open = i;
            break;
        }
    }
    if (states_open == std::string_view::npos) return ElementError{"missing states"};
    auto question = std::string(text::trim(body.substr(0, states_open)));
    if (question.ends_with(',')) question.pop_back();
    SituationalDatapoint d;
    d.query = strip_quotes(question);
    if (d.query.empty()) return ElementError{"missing query"};

    const auto states = bracket_group(body, states_open);
    if (!states) return ElementError{"unterminated states list"};
    for (const auto& item : split_top_level(states->first)) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) return ElementError{fmt::format("cannot read state '{}'", item)};
        const auto cls = strip_quotes(std::string_view(item).substr(0, colon));
        auto values = std::string(text::trim(std::string_view(item).substr(colon + 1)));
        if (values.starts_with('[') && values.ends_with(']')) values = values.substr(1, values.size() - 2);
        for (const auto& v : text::split(values, ','))
            if (auto e = add_state(d.states, cls, v)) return *e;
    }

    const auto rel_open = body.find('[', states->second);
    if (rel_open != std::string_view::npos) {
        const auto rels = bracket_group(body, rel_open);
        if (!rels) return ElementError{"unterminated relationship list"};
        for (const auto& item : split_top_level(rels->first))
            if (auto e = add_relation_text(d.relations, item)) return *e;
    }
    return d;
}

void collect(ParsedBatch& out, std::variant<SituationalDatapoint, ElementError> result, std::size_t offset,
             std::size_t& index) {
    if (auto* d = std::get_if<SituationalDatapoint>(&result)) {
        d->provenance.batch_index = static_cast<std::int64_t>(index);
        out.datapoints.push_back(std::move(*d));
    } else {
        out.failures.push_back({offset, std::get<ElementError>(result).reason});
    }
    ++index;
}

std::string_view strip_list_marker(std::string_view line) {
    line = text::trim(line);
    if (line.starts_with("- ") || line.starts_with("* ")) return text::trim(line.substr(2));
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) return text::trim(line.substr(i + 1));
    return line;
}

}  // namespace

ParsedBatch parse_response(std::string_view raw) {
    ParsedBatch out;
    std::size_t index = 0;

    const auto open = raw.find('[');
    if (open != std::string_view::npos) {
        const auto scan = scan_array(raw, open);
        if (!scan.elements.empty()) {
            const char lead = raw[scan.elements.front().begin];
            if (lead == '{' || lead == '[') {
                for (const auto& el : scan.elements) {
                    const auto element = raw.substr(el.begin, el.end - el.begin);
                    if (element.front() == '{')
                        collect(out, from_json_element(element), el.begin, index);
                    else if (element.front() == '[')
                        collect(out, from_bracketed(element), el.begin, index);
                    else
                        collect(out, ElementError{"malformed JSON element"}, el.begin, index);
                }
                return out;
            }
        }
    }

    std::size_t start = 0;
    while (start < raw.size()) {
        auto end = raw.find('\n', start);
        if (end == std::string_view::npos) end = raw.size();
        const auto line = raw.substr(start, end - start);
        const auto record = strip_list_marker(line);
        if (record.starts_with('[') && text::trim(record.substr(1)) != "]") {
            const auto offset = start + static_cast<std::size_t>(record.data() - line.data());
            collect(out, from_bracketed(record), offset, index);
        }
        start = end + 1;
    }
    if (out.datapoints.empty() && out.failures.empty()) out.failures.push_back({0, "no datapoints found in response"});
    return out;
}

}  // namespace seqa
