#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aptsynth {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map a stage failure onto an exit code with one catch.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown alert-type name or step letter; also a step mapping that is not total.
class TaxonomyError : public Error {
public:
    using Error::Error;
};

// Invalid or inconsistent configuration such as empty pools or bad weights.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Raised when the generator cannot satisfy its own guarantees, e.g. the noise
// rejection pass does not converge.
class GenerationError : public Error {
public:
    using Error::Error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
public:
    using Error::Error;
};

// Malformed CSV input; carries the 1-based line number of the offending row.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Preprocessing / reporting failure on otherwise well-formed input.
class PipelineError : public Error {
public:
    using Error::Error;
};

// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace aptsynth
