#pragma once

#include <stdexcept>
#include <string>

namespace hb {

// Raised for contract violations of the public operations. The message is
// the user-facing diagnostic; the CLI maps it onto exit codes.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hb
