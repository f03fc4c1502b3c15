#pragma once

#include <stdexcept>
#include <string>

namespace mloc {

// All recoverable failures surface as mloc::Error with a human-readable message.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mloc
