#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bitext::uni {

// Minimal UTF-8 decoding. Invalid sequences decode to U+FFFD, one
// replacement per bad byte, so length counts stay stable.
inline std::vector<char32_t> decode(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        char32_t cp = 0xFFFD;
        std::size_t len = 1;
        if (b < 0x80) {
            cp = b;
        } else if ((b & 0xE0) == 0xC0 && i + 1 < s.size()) {
            cp = (b & 0x1F) << 6 | (s[i + 1] & 0x3F);
            len = 2;
        } else if ((b & 0xF0) == 0xE0 && i + 2 < s.size()) {
            cp = (b & 0x0F) << 12 | (s[i + 1] & 0x3F) << 6 | (s[i + 2] & 0x3F);
            len = 3;
        } else if ((b & 0xF8) == 0xF0 && i + 3 < s.size()) {
            cp = (char32_t)(b & 0x07) << 18 | (s[i + 1] & 0x3F) << 12 |
                 (s[i + 2] & 0x3F) << 6 | (s[i + 3] & 0x3F);
            len = 4;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline std::size_t length(std::string_view s) { return decode(s).size(); }

inline bool is_space(char32_t c) {
    switch (c) {
        case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
        case 0x00A0: case 0x1680: case 0x2028: case 0x2029: case 0x202F:
        case 0x205F: case 0x3000:
            return true;
        default:
            return c >= 0x2000 && c <= 0x200A;
    }
}

inline bool is_digit(char32_t c) {
    if (c >= U'0' && c <= U'9') return true;
    if (c >= 0x0660 && c <= 0x0669) return true;  // Arabic-Indic
    if (c >= 0x06F0 && c <= 0x06F9) return true;
    if (c >= 0x0966 && c <= 0x096F) return true;  // Devanagari
    if (c >= 0x0E50 && c <= 0x0E59) return true;  // Thai
    if (c >= 0xFF10 && c <= 0xFF19) return true;  // fullwidth
    return false;
}

// Punctuation cover for the scripts this pipeline sees (Latin plus common
// general punctuation). Not the full Unicode P* property.
inline bool is_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= U'!' && c <= U'/') || (c >= U':' && c <= U'@') ||
               (c >= U'[' && c <= U'`') || (c >= U'{' && c <= U'~');
    }
    if (c == 0x00A1 || c == 0x00A7 || c == 0x00AB || c == 0x00BB ||
        c == 0x00B6 || c == 0x00B7 || c == 0x00BF)
        return true;
    if (c >= 0x2010 && c <= 0x2027) return true;   // dashes, quotes, dots
    if (c >= 0x2030 && c <= 0x205E) return true;
    if (c >= 0x3001 && c <= 0x3011) return true;   // CJK punctuation
    if (c >= 0xFF01 && c <= 0xFF0F) return true;
    return false;
}

// Whitespace tokens of a UTF-8 string.
inline std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (std::size_t i = 0; i < s.size();) {
        unsigned char b = static_cast<unsigned char>(s[i]);
        std::size_t len = 1;
        if ((b & 0xE0) == 0xC0) len = 2;
        else if ((b & 0xF0) == 0xE0) len = 3;
        else if ((b & 0xF8) == 0xF0) len = 4;
        if (i + len > s.size()) len = 1;
        std::string_view ch = s.substr(i, len);
        char32_t cp = decode(ch).front();
        if (is_space(cp)) {
            if (!cur.empty()) { out.push_back(std::move(cur)); cur.clear(); }
        } else {
            cur.append(ch);
        }
        i += len;
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    auto ascii_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    };
    while (b < e && ascii_space(s[b])) ++b;
    while (e > b && ascii_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

// Collapse every whitespace run to a single space and trim the ends.
inline std::string collapse_ws(std::string_view s) {
    auto toks = tokens(s);
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

}  // namespace bitext::uni
