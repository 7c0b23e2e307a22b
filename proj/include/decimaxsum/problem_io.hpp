#pragma once

// JSON problem files:
//   {"sense": "maximize"|"minimize",
//    "variables": [{"id": 0, "domain": ["0", "1"]}, ...],
//    "factors":   [{"id": 0, "scope": [0, 1], "table": [1.6, -1.6, ...]}, ...],
//    "agents":    {"0": "a0", ...}}
// Tables are written in the file's own sense. Infinite entries are the strings
// "-inf" / "inf". Keys are emitted in the fixed order above and reals in
// shortest round-trip form, so write(parse(write(x))) == write(x).

#include <stdexcept>
#include <string>
#include <string_view>

#include "decimaxsum/dcop.hpp"

namespace dms {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t byte_offset)
        : std::runtime_error(what), byte_offset_(byte_offset) {}
    std::size_t byte_offset() const { return byte_offset_; }

private:
    std::size_t byte_offset_;
};

std::string serialize_dcop(const Dcop& dcop);

/// Parses and validates. Structural problems throw ParseError; semantic ones
/// ValidationError.
Dcop parse_dcop(std::string_view text);

Dcop load_dcop(const std::string& path);
void save_dcop(const Dcop& dcop, const std::string& path);

}  // namespace dms
