#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace salut {

enum class ErrorKind {
    InvalidDimension,
    DimensionMismatch,
    MissingParameter,
    Format,
    Io,
    Numeric,
    Usage,
};

/// Base exception for everything the library throws on bad input.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), m_kind(kind)
    {
    }

    ErrorKind kind() const noexcept { return m_kind; }

private:
    ErrorKind m_kind;
};

enum class FormatErrorKind {
    Malformed,
    BadMagic,
    BadVersion,
    BadSize,
    Truncated,
    NonFinite,
    DuplicateName,
    Unsupported,
};

/// Parse failure. offset is the byte position where parsing stopped.
class FormatError : public Error {
public:
    FormatError(FormatErrorKind kind, std::size_t offset, const std::string& what)
        : Error(ErrorKind::Format, what + " (at byte " + std::to_string(offset) + ")"),
          m_formatKind(kind), m_offset(offset)
    {
    }

    FormatErrorKind formatKind() const noexcept { return m_formatKind; }
    std::size_t offset() const noexcept { return m_offset; }

private:
    FormatErrorKind m_formatKind;
    std::size_t m_offset;
};

} // namespace salut
