#include <string>

#include "deid/utf8.hpp"
#include "doctest.h"

using namespace deid;

TEST_CASE("decode/encode round trip") {
    const std::string samples[] = {
        "",
        "plain ascii",
        "caf\xc3\xa9",                  // é (2 bytes)
        "\xe2\x82\xac 5",               // € (3 bytes)
        "x\xf0\x9f\x98\x80y",           // 😀 (4 bytes, non-BMP)
        "mixed \xc3\xa9\xe2\x82\xac\xf0\x9f\x98\x80 end",
    };
    for (const std::string& s : samples) {
        std::u32string u = utf8::decode(s);
        CHECK(utf8::encode(u) == s);
        CHECK(utf8::count_codepoints(s) == u.size());
    }
}

TEST_CASE("decode rejects malformed input") {
    CHECK_THROWS(utf8::decode("\x80"));              // stray continuation
    CHECK_THROWS(utf8::decode("\xc3"));              // truncated sequence
    CHECK_THROWS(utf8::decode("\xc0\xaf"));          // overlong encoding
    CHECK_THROWS(utf8::decode("\xed\xa0\x80"));      // surrogate half
    CHECK_THROWS(utf8::decode("\xf5\x80\x80\x80"));  // above U+10FFFF
}

TEST_CASE("slice uses code point offsets") {
    std::string s = "caf\xc3\xa9 bar";  // "café bar", 8 code points
    CHECK(utf8::count_codepoints(s) == 8);
    CHECK(utf8::slice(s, 0, 4) == "caf\xc3\xa9");
    CHECK(utf8::slice(s, 3, 4) == "\xc3\xa9");
    CHECK(utf8::slice(s, 5, 8) == "bar");
    CHECK(utf8::slice(s, 2, 2) == "");
}

TEST_CASE("byte_offsets maps code points to byte positions") {
    std::string s = "a\xc3\xa9\xe2\x82\xac\xf0\x9f\x98\x80z";  // a é € 😀 z
    auto off = utf8::byte_offsets(s);
    REQUIRE(off.size() == 6);  // 5 code points + end
    CHECK(off[0] == 0);
    CHECK(off[1] == 1);
    CHECK(off[2] == 3);
    CHECK(off[3] == 6);
    CHECK(off[4] == 10);
    CHECK(off[5] == s.size());
}

TEST_CASE("utf16_offsets counts surrogate pairs as two units") {
    std::string s = "x\xf0\x9f\x98\x80y Smith";  // 😀 is one pair
    auto off = utf8::utf16_offsets(s);
    // code points: x 😀 y ' ' S m i t h -> 9 cps, 10 utf-16 units total
    REQUIRE(off.size() == 10);
    CHECK(off[0] == 0);
    CHECK(off[1] == 1);   // 😀 starts at unit 1
    CHECK(off[2] == 3);   // y follows the surrogate pair
    CHECK(off[3] == 4);
    CHECK(off.back() == 10);
}

TEST_CASE("ascii text has identity offset tables") {
    std::string s = "Seen on 01/23/2019.";
    auto b = utf8::byte_offsets(s);
    auto u = utf8::utf16_offsets(s);
    for (std::size_t i = 0; i < b.size(); ++i) {
        CHECK(b[i] == i);
        CHECK(u[i] == i);
    }
}
