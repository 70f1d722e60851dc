#pragma once

#include <stdexcept>
#include <string>

namespace zoomsig {

enum class ErrorKind {
    InvalidRatio,
    InvalidBox,
    InvalidEdges,
    InvalidConfig,
    EmptyDataset,
    UndefinedAuc,
    InsufficientData,
    UndefinedCorrelation,
    UndefinedStats,
    MissingLabel,
    MissingModel,
    DuplicateRecord,
    EmptyLog,
    Io,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the CLI in
/// particular) can map it to an exit status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace zoomsig
