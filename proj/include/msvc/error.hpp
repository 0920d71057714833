#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace msvc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised by dataset validation. Carries one message per offending frame so
/// callers can report everything at once instead of failing on the first file.
class DatasetError : public Error {
public:
    explicit DatasetError(std::vector<std::string> problems);

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Error tagged with the pipeline stage it came from (carve, render, ...).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

} // namespace msvc
