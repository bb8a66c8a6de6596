#pragma once

#include <stdexcept>
#include <string>

namespace mfit {

// All recoverable failures surface as Error; the message starts with the
// offending quantity or stage so the CLI can report it verbatim.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfit
