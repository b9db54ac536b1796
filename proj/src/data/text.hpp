#pragma once

// Shared line handling for the text formats.

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace jfa::text {

// Strips a '#' comment and surrounding whitespace.
std::string_view clean_line(std::string_view line);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

}  // namespace jfa::text
