#include "websft/normalize.hpp"

#include "websft/text.hpp"

namespace websft {

std::string NormalizedText::utf8() const { return text::encode_utf8(text); }

NormalizedText normalize(std::string_view input) {
    const std::u32string decoded = text::decode_utf8(input);

    std::u32string kept;
    kept.reserve(decoded.size());
    for (char32_t cp : decoded) {
        cp = text::fold_width(cp);
        if (text::is_han(cp) || text::is_ascii_digit(cp) || text::is_ascii_letter(cp)) {
            kept.push_back(cp);
        }
    }

    // Letter runs are measured on the filtered text, so "\frac" and "f r a c"
    // both collapse to the run "frac".
    NormalizedText out;
    out.origin_len = decoded.size();
    out.text.reserve(kept.size());
    std::size_t i = 0;
    while (i < kept.size()) {
        if (!text::is_ascii_letter(kept[i])) {
            out.text.push_back(kept[i++]);
            continue;
        }
        std::size_t j = i;
        while (j < kept.size() && text::is_ascii_letter(kept[j])) ++j;
        if (j - i <= 2) out.text.append(kept, i, j - i);
        i = j;
    }
    return out;
}

bool is_subsequence(std::u32string_view needle, std::u32string_view haystack) noexcept {
    std::size_t n = 0;
    for (std::size_t h = 0; h < haystack.size() && n < needle.size(); ++h) {
        if (haystack[h] == needle[n]) ++n;
    }
    return n == needle.size();
}

}  // namespace websft
