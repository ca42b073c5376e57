#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "seqa/datapoint.hpp"

namespace seqa {

struct ParseFailure {
    /// Byte offset of the offending element or line in the raw response.
    std::size_t offset = 0;
    std::string reason;

    bool operator==(const ParseFailure&) const = default;
};

struct ParsedBatch {
    /// Datapoints carry no id yet; provenance.batch_index is the position
    /// of the element in the response.
    std::vector<SituationalDatapoint> datapoints;
    std::vector<ParseFailure> failures;
};

json to_json(const ParseFailure& f);

/// Accepts a JSON array of {query, states, relations} objects (possibly
/// wrapped in prose or a code fence), a JSON array of bracketed records, or
/// one "[Question, [obj: [STATE], ...], [subj REL target, ...]]" per line.
/// Each malformed element becomes a failure; nothing aborts the batch.
ParsedBatch parse_response(std::string_view raw);

}  // namespace seqa
