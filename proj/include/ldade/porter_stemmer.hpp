#pragma once

#include <string>
#include <string_view>

namespace ldade {

/// Porter (1980) suffix-stripping stemmer, original published rule set.
/// Expects a lowercase word; words of one or two letters are returned as-is.
std::string porter_stem(std::string_view word);

}  // namespace ldade
