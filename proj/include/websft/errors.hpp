#pragma once

#include <stdexcept>
#include <string>

namespace websft {

// Unreadable or unwritable files.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data or configuration that violates a contract. `field()` names the
// offending config field or record id when one is known.
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& message)
        : std::runtime_error(message), field_(std::move(field)) {}
    explicit ValidationError(const std::string& message) : std::runtime_error(message) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace websft
