#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Offset conventions: all public offsets in this library count Unicode code
// points. These helpers convert between UTF-8 byte strings and code point
// indexed views, plus UTF-16 code unit offsets for vendor responses.
namespace deid::utf8 {

std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);

std::size_t count_codepoints(std::string_view s);

// Substring by code point range [cp_start, cp_end).
std::string slice(std::string_view s, std::size_t cp_start, std::size_t cp_end);

// byte_offsets(s)[i] is the byte offset of code point i; size is n+1 so the
// last entry equals s.size(). utf16_offsets is analogous in UTF-16 units.
std::vector<std::size_t> byte_offsets(std::string_view s);
std::vector<std::size_t> utf16_offsets(std::string_view s);

}  // namespace deid::utf8
