#include "kgreason/kg/types.hpp"

#include <algorithm>
#include <cctype>

namespace kgreason::kg {

std::string_view to_string(Direction d) {
    return d == Direction::outgoing ? "outgoing" : "incoming";
}

Direction direction_from_string(std::string_view s) {
    if (s == "outgoing") return Direction::outgoing;
    if (s == "incoming") return Direction::incoming;
    throw std::invalid_argument("unknown direction: " + std::string(s));
}

bool looks_like_mid(std::string_view s) {
    return s.size() > 2 && (s[0] == 'm' || s[0] == 'g') && s[1] == '.';
}

bool valid_relation(std::string_view s) {
    return !s.empty() && std::none_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace kgreason::kg
