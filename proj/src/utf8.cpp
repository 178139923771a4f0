#include "deid/utf8.hpp"

#include <stdexcept>

namespace deid::utf8 {

namespace {

[[noreturn]] void bad_utf8(std::size_t byte_pos) {
    throw std::runtime_error("invalid UTF-8 at byte " + std::to_string(byte_pos));
}

// Decodes one code point starting at s[i]; advances i past it.
char32_t decode_one(std::string_view s, std::size_t& i) {
    unsigned char b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int extra;
    char32_t cp;
    if ((b0 & 0xE0) == 0xC0) {
        extra = 1;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        extra = 2;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        extra = 3;
        cp = b0 & 0x07;
    } else {
        bad_utf8(i);
    }
    if (i + extra >= s.size()) bad_utf8(i);
    for (int k = 1; k <= extra; ++k) {
        unsigned char b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) bad_utf8(i + k);
        cp = (cp << 6) | (b & 0x3F);
    }
    // Reject overlong encodings and surrogate range.
    static constexpr char32_t min_for_extra[4] = {0, 0x80, 0x800, 0x10000};
    if (cp < min_for_extra[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
        bad_utf8(i);
    i += extra + 1;
    return cp;
}

}  // namespace

std::u32string decode(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) out.push_back(decode_one(s, i));
    return out;
}

std::string encode(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t cp : s) {
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
    return out;
}

std::size_t count_codepoints(std::string_view s) {
    std::size_t i = 0, n = 0;
    while (i < s.size()) {
        decode_one(s, i);
        ++n;
    }
    return n;
}

std::string slice(std::string_view s, std::size_t cp_start, std::size_t cp_end) {
    std::size_t i = 0, cp = 0;
    std::size_t byte_start = std::string_view::npos, byte_end = s.size();
    while (i < s.size() && cp < cp_end) {
        if (cp == cp_start) byte_start = i;
        decode_one(s, i);
        ++cp;
    }
    if (cp_start == cp) byte_start = i;
    if (cp == cp_end) byte_end = i;
    if (byte_start == std::string_view::npos || cp < cp_end)
        throw std::out_of_range("code point slice out of range");
    return std::string(s.substr(byte_start, byte_end - byte_start));
}

std::vector<std::size_t> byte_offsets(std::string_view s) {
    std::vector<std::size_t> off;
    std::size_t i = 0;
    while (i < s.size()) {
        off.push_back(i);
        decode_one(s, i);
    }
    off.push_back(s.size());
    return off;
}

std::vector<std::size_t> utf16_offsets(std::string_view s) {
    std::vector<std::size_t> off;
    std::size_t i = 0, u16 = 0;
    while (i < s.size()) {
        off.push_back(u16);
        char32_t cp = decode_one(s, i);
        u16 += cp >= 0x10000 ? 2 : 1;
    }
    off.push_back(u16);
    return off;
}

}  // namespace deid::utf8
