#include "websft/text.hpp"

#include <array>
#include <cstdio>

namespace websft::text {

namespace {

constexpr char32_t kReplacement = 0xFFFD;

// Returns the decoded code point and advances `i`; invalid input consumes one
// byte and yields U+FFFD.
char32_t next_code_point(std::string_view in, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(in[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
        min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
        min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
        min = 0x10000;
    } else {
        ++i;
        return kReplacement;
    }
    if (i + len > in.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(in[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

}  // namespace

std::u32string decode_utf8(std::string_view in) {
    std::u32string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) out.push_back(next_code_point(in, i));
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view in) {
    std::string out;
    out.reserve(in.size() * 3);
    for (char32_t cp : in) append_utf8(out, cp);
    return out;
}

std::size_t utf8_length(std::string_view in) {
    std::size_t n = 0;
    std::size_t i = 0;
    while (i < in.size()) {
        next_code_point(in, i);
        ++n;
    }
    return n;
}

std::size_t utf8_offset(std::string_view in, std::size_t cp_index) {
    std::size_t i = 0;
    for (std::size_t n = 0; n < cp_index && i < in.size(); ++n) next_code_point(in, i);
    return i;
}

bool is_han(char32_t cp) noexcept {
    // Script=Han ideographs: unified blocks, extensions A..H, compatibility
    // ideographs, plus the handful of Han-script marks in the CJK symbols block.
    struct Range {
        char32_t lo, hi;
    };
    static constexpr std::array<Range, 13> kRanges{{
        {0x3005, 0x3005},
        {0x3007, 0x3007},
        {0x3021, 0x3029},
        {0x3038, 0x303B},
        {0x3400, 0x4DBF},
        {0x4E00, 0x9FFF},
        {0xF900, 0xFAFF},
        {0x20000, 0x2A6DF},
        {0x2A700, 0x2EBEF},
        {0x2EBF0, 0x2EE5F},
        {0x2F800, 0x2FA1F},
        {0x30000, 0x3134F},
        {0x31350, 0x323AF},
    }};
    if (cp < 0x3005) return false;
    for (const auto& r : kRanges) {
        if (cp >= r.lo && cp <= r.hi) return true;
    }
    return false;
}

bool is_ascii_letter(char32_t cp) noexcept {
    return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

char32_t fold_width(char32_t cp) noexcept {
    if (cp >= 0xFF01 && cp <= 0xFF5E) return cp - 0xFF01 + 0x21;
    if (cp == 0x3000) return U' ';
    return cp;
}

std::string_view trim(std::string_view s) noexcept {
    constexpr std::string_view kIdeographicSpace = "\xE3\x80\x80";
    auto is_ws = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    for (;;) {
        if (!s.empty() && is_ws(s.front())) {
            s.remove_prefix(1);
        } else if (s.starts_with(kIdeographicSpace)) {
            s.remove_prefix(kIdeographicSpace.size());
        } else {
            break;
        }
    }
    for (;;) {
        if (!s.empty() && is_ws(s.back())) {
            s.remove_suffix(1);
        } else if (s.ends_with(kIdeographicSpace)) {
            s.remove_suffix(kIdeographicSpace.size());
        } else {
            break;
        }
    }
    return s;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) noexcept {
    if (needle.empty()) return 0;
    std::size_t n = 0;
    for (auto pos = haystack.find(needle); pos != std::string_view::npos;
         pos = haystack.find(needle, pos + needle.size())) {
        ++n;
    }
    return n;
}

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed) noexcept {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace websft::text
