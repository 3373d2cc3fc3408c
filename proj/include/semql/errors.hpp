#pragma once

// Domain error hierarchy. Every failure the library reports derives from
// Error, whose name() is stable and surfaces in CLI diagnostics as
// "error[<name>]: <message>".

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace semql {

class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct SchemaFormatError : Error {
    explicit SchemaFormatError(const std::string& m) : Error("SchemaFormatError", m) {}
};

struct NoJoinPathError : Error {
    explicit NoJoinPathError(const std::string& m) : Error("NoJoinPathError", m) {}
};

/// Syntax error in SemQL s-expression or action text; offset is the byte
/// position in the input where parsing failed.
class SemQLSyntaxError : public Error {
public:
    SemQLSyntaxError(const std::string& m, std::size_t offset)
        : Error("SemQLSyntaxError", m + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class SqlSyntaxError : public Error {
public:
    SqlSyntaxError(const std::string& m, std::size_t offset)
        : Error("SqlSyntaxError", m + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// SQL that is well-formed but outside the supported subset (aliases,
/// self-joins, unknown functions, ...).
struct UnsupportedSqlError : Error {
    explicit UnsupportedSqlError(const std::string& m) : Error("UnsupportedSqlError", m) {}
};

/// A column or table reference that cannot be resolved against the schema.
struct ResolutionError : Error {
    explicit ResolutionError(const std::string& m) : Error("ResolutionError", m) {}
};

/// An action rejected by the transition system; index is the position of the
/// offending action in the sequence being applied.
class IllegalActionError : public Error {
public:
    IllegalActionError(std::size_t index, const std::string& m)
        : Error("IllegalActionError", "action " + std::to_string(index) + ": " + m),
          index_(index) {}
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

struct IncompleteDerivationError : Error {
    explicit IncompleteDerivationError(const std::string& m)
        : Error("IncompleteDerivationError", m) {}
};

struct StarAmbiguityError : Error {
    explicit StarAmbiguityError(const std::string& m) : Error("StarAmbiguityError", m) {}
};

struct MissingPrimaryKeyError : Error {
    explicit MissingPrimaryKeyError(const std::string& m) : Error("MissingPrimaryKeyError", m) {}
};

struct KnowledgeSourceError : Error {
    explicit KnowledgeSourceError(const std::string& m) : Error("KnowledgeSourceError", m) {}
};

/// A SemQL tree that fails validation where a valid tree is required.
struct SemQLValidationError : Error {
    explicit SemQLValidationError(const std::string& m) : Error("SemQLValidationError", m) {}
};

}  // namespace semql
