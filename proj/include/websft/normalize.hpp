#pragma once

#include <string>
#include <string_view>

namespace websft {

// Text reduced to the characters that carry a problem's identity: Han
// ideographs, ASCII digits and ASCII letters, with letter runs of three or
// more removed. Stored as code points so subsequence tests never split a
// multi-byte character.
struct NormalizedText {
    std::u32string text;
    std::size_t origin_len = 0;  // code points in the input

    std::string utf8() const;
    std::size_t size() const noexcept { return text.size(); }
    bool operator==(const NormalizedText& o) const noexcept { return text == o.text; }
};

// Full-width digits and letters are folded to ASCII first; case is kept.
NormalizedText normalize(std::string_view text);

// In-order containment with gaps allowed. Linear two-pointer scan.
bool is_subsequence(std::u32string_view needle, std::u32string_view haystack) noexcept;
inline bool is_subsequence(const NormalizedText& needle, const NormalizedText& haystack) noexcept {
    return is_subsequence(needle.text, haystack.text);
}

}  // namespace websft
