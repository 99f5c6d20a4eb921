#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace prmh::text {

std::string_view trim(std::string_view s);
std::string lower_ascii(std::string_view s);

// Strips surrounding whitespace, asterisks and punctuation and lowercases;
// used to compare sampled tokens against the yes/no answer vocabulary.
std::string normalize_token(std::string_view s);

std::vector<std::string_view> split_lines(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace prmh::text
