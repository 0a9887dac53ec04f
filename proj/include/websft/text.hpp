#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace websft::text {

// Decodes UTF-8 into code points. Invalid sequences become U+FFFD, one per
// offending byte, so decoding never fails.
std::u32string decode_utf8(std::string_view in);
std::string encode_utf8(std::u32string_view in);
void append_utf8(std::string& out, char32_t cp);

// Number of code points in a UTF-8 string (invalid bytes count as one each).
std::size_t utf8_length(std::string_view in);

// Byte offset of the code point with the given index, or in.size().
std::size_t utf8_offset(std::string_view in, std::size_t cp_index);

bool is_han(char32_t cp) noexcept;
inline bool is_ascii_digit(char32_t cp) noexcept { return cp >= U'0' && cp <= U'9'; }
bool is_ascii_letter(char32_t cp) noexcept;

// Maps full-width ASCII variants (U+FF01..U+FF5E) and the ideographic space
// to their ASCII forms; everything else is returned unchanged.
char32_t fold_width(char32_t cp) noexcept;

// Strips ASCII whitespace and U+3000 from both ends.
std::string_view trim(std::string_view s) noexcept;

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept;

// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t v);

}  // namespace websft::text
