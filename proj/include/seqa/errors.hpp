#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace seqa {

/// Base of every domain error. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
public:
    Error(std::string kind, std::string entity, const std::string& message)
        : std::runtime_error(kind + ": " + message), kind_(std::move(kind)), entity_(std::move(entity)) {}

    const std::string& kind() const noexcept { return kind_; }
    /// Offending id / class / path, empty when not applicable.
    const std::string& entity() const noexcept { return entity_; }

private:
    std::string kind_;
    std::string entity_;
};

#define SEQA_DEFINE_ERROR(Name)                                                  \
    class Name : public Error {                                                  \
    public:                                                                      \
        Name(std::string entity, const std::string& message)                     \
            : Error(#Name, std::move(entity), message) {}                        \
        explicit Name(const std::string& message) : Error(#Name, "", message) {} \
    }

SEQA_DEFINE_ERROR(SchemaError);
SEQA_DEFINE_ERROR(InvariantError);
SEQA_DEFINE_ERROR(UnknownObjectError);
SEQA_DEFINE_ERROR(InfeasibleRelationError);
SEQA_DEFINE_ERROR(DomainMismatchError);
SEQA_DEFINE_ERROR(DimensionMismatchError);
SEQA_DEFINE_ERROR(DuplicateIdError);
SEQA_DEFINE_ERROR(ProviderError);
SEQA_DEFINE_ERROR(TranscriptExhausted);
SEQA_DEFINE_ERROR(UnparseableAnswerError);
SEQA_DEFINE_ERROR(DuplicateAnnotationError);
SEQA_DEFINE_ERROR(UnknownTaskError);
SEQA_DEFINE_ERROR(TaskCompleteError);
SEQA_DEFINE_ERROR(IncompleteTaskError);
SEQA_DEFINE_ERROR(EmptyInputError);
SEQA_DEFINE_ERROR(ConfigError);
SEQA_DEFINE_ERROR(IoError);

#undef SEQA_DEFINE_ERROR

/// Raised by report assembly when prediction and ground-truth id sets differ.
class IdMismatchError : public Error {
public:
    IdMismatchError(std::vector<std::string> missing, std::vector<std::string> extra);

    /// Ground-truth ids with no prediction.
    const std::vector<std::string>& missing() const noexcept { return missing_; }
    /// Prediction ids with no ground truth.
    const std::vector<std::string>& extra() const noexcept { return extra_; }

private:
    std::vector<std::string> missing_;
    std::vector<std::string> extra_;
};

}  // namespace seqa
