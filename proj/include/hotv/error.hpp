#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hotv {

/// Parameter outside the mathematical domain of an operation (mu <= 1, r < 0, ...).
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Grid extents incompatible with an operator or with each other.
class size_error : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Malformed input file. Carries the byte offset where parsing stopped.
class parse_error : public std::runtime_error {
public:
    parse_error(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"), message_(what), offset_(offset)
    {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string message_;
    std::size_t offset_;
};

/// File system / stream failures.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hotv
