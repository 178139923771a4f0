#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <string>

#include "deid/surrogate.hpp"
#include "deid/utf8.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace deid;

namespace {

SurrogateGenerator& test_generator() {
    static SurrogateGenerator gen = SurrogateGenerator::from_lexicon_file(
        std::filesystem::path(DEID_DATA_DIR) / "lexicons.json");
    return gen;
}

bool in_lexicon(const SurrogateGenerator& g, const std::string& name, const std::string& value) {
    const auto& entries = g.lexicons().at(name);
    return std::find(entries.begin(), entries.end(), value) != entries.end();
}

}  // namespace

TEST_CASE("extract_format classifies code points") {
    CHECK(extract_format("01/23/2019", PhiCategory::DATE).pattern == "DD/DD/DDDD");
    CHECK(extract_format("(650) 724-1234", PhiCategory::PHONE).pattern == "(DDD) DDD-DDDD");
    CHECK(extract_format("MRN-004521", PhiCategory::ID).pattern == "AAA-DDDDDD");
    CHECK(extract_format("aB3 x", PhiCategory::ID).pattern == "aAD a");
    CHECK(extract_format("caf\xc3\xa9", PhiCategory::ID).pattern == "aaa\xc3\xa9");
    CHECK_THROWS(extract_format("", PhiCategory::ID));
}

TEST_CASE("surrogate map consistency") {
    SurrogateMap map;
    Rng rng(1);
    const SurrogateGenerator& gen = test_generator();
    std::string a = gen.generate("01/23/2019", PhiCategory::DATE, rng, map);
    std::string b = gen.generate("01/23/2019", PhiCategory::DATE, rng, map);
    CHECK(a == b);
    // a different original gets a different surrogate while space remains
    std::string c = gen.generate("Abbott", PhiCategory::PATIENT, rng, map);
    std::string d = gen.generate("Barnes", PhiCategory::PATIENT, rng, map);
    CHECK(c != d);
}

TEST_CASE("date surrogates preserve format and are valid dates") {
    const SurrogateGenerator& gen = test_generator();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        SurrogateMap map;
        Rng rng(seed);
        std::string s = gen.generate("01/23/2019", PhiCategory::DATE, rng, map);
        CHECK(s != "01/23/2019");
        CHECK(extract_format(s, PhiCategory::DATE).pattern == "DD/DD/DDDD");
        int month = std::stoi(s.substr(0, 2));
        int day = std::stoi(s.substr(3, 2));
        int year = std::stoi(s.substr(6, 4));
        CHECK(month >= 1);
        CHECK(month <= 12);
        CHECK(day >= 1);
        CHECK(day <= 28);
        CHECK(year >= 1950);
        CHECK(year <= 2030);
    }
}

TEST_CASE("spelled months keep their style") {
    const SurrogateGenerator& gen = test_generator();
    static const std::array<std::string, 12> full = {"January", "February", "March",    "April",
                                                     "May",     "June",     "July",     "August",
                                                     "September", "October", "November", "December"};
    SUBCASE("full month names stay full") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            SurrogateMap map;
            Rng rng(seed);
            std::string s = gen.generate("March 3, 2021", PhiCategory::DATE, rng, map);
            std::string month = s.substr(0, s.find(' '));
            CHECK(std::find(full.begin(), full.end(), month) != full.end());
            CHECK(s.find(", ") != std::string::npos);
        }
    }
    SUBCASE("abbreviated months stay abbreviated") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            SurrogateMap map;
            Rng rng(seed);
            std::string s = gen.generate("Oct 3, 2021", PhiCategory::DATE, rng, map);
            std::string month = s.substr(0, s.find(' '));
            CHECK(month.size() == 3);
            CHECK(std::isupper(static_cast<unsigned char>(month[0])));
        }
    }
    SUBCASE("May is treated as a full name") {
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            SurrogateMap map;
            Rng rng(seed);
            std::string s = gen.generate("May 7, 1999", PhiCategory::DATE, rng, map);
            std::string month = s.substr(0, s.find(' '));
            CHECK(std::find(full.begin(), full.end(), month) != full.end());
        }
    }
}

TEST_CASE("age surrogates") {
    const SurrogateGenerator& gen = test_generator();
    SUBCASE("numeric ages shift within +-10, clamped to [1,89]") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            SurrogateMap map;
            Rng rng(seed);
            std::size_t warnings = 0;
            int v = std::stoi(gen.generate("92", PhiCategory::AGE, rng, map, &warnings));
            CHECK(v >= 82);
            CHECK(v <= 89);
            CHECK(warnings == 0);

            SurrogateMap map2;
            int w = std::stoi(gen.generate("5", PhiCategory::AGE, rng, map2, &warnings));
            CHECK(w >= 1);
            CHECK(w <= 15);
            CHECK(w != 5);
        }
    }
    SUBCASE("non-numeric ages warn and draw from [18,89]") {
        SurrogateMap map;
        Rng rng(3);
        std::size_t warnings = 0;
        int v = std::stoi(gen.generate("eighteen", PhiCategory::AGE, rng, map, &warnings));
        CHECK(warnings == 1);
        CHECK(v >= 18);
        CHECK(v <= 89);
    }
}

TEST_CASE("phone and id surrogates pour into the original format") {
    const SurrogateGenerator& gen = test_generator();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SurrogateMap map;
        Rng rng(seed);
        std::string phone = gen.generate("(650) 724-1234", PhiCategory::PHONE, rng, map);
        CHECK(phone != "(650) 724-1234");
        CHECK(extract_format(phone, PhiCategory::PHONE).pattern == "(DDD) DDD-DDDD");
        std::string id = gen.generate("MRN-004521", PhiCategory::ID, rng, map);
        CHECK(id != "MRN-004521");
        CHECK(extract_format(id, PhiCategory::ID).pattern == "AAA-DDDDDD");
    }
}

TEST_CASE("name surrogates") {
    const SurrogateGenerator& gen = test_generator();
    SUBCASE("two-token names draw first + surname") {
        SurrogateMap map;
        Rng rng(4);
        std::string s = gen.generate("Alice Abbott", PhiCategory::PATIENT, rng, map);
        CHECK(s != "Alice Abbott");
        auto sp = s.find(' ');
        REQUIRE(sp != std::string::npos);
        CHECK(in_lexicon(gen, "patient_first_names", s.substr(0, sp)));
        CHECK(in_lexicon(gen, "patient_surnames", s.substr(sp + 1)));
    }
    SUBCASE("single-token names draw a surname") {
        SurrogateMap map;
        Rng rng(4);
        std::string s = gen.generate("Abbott", PhiCategory::PATIENT, rng, map);
        CHECK(s != "Abbott");
        CHECK(in_lexicon(gen, "patient_surnames", s));
    }
    SUBCASE("credentials survive replacement") {
        SurrogateMap map;
        Rng rng(4);
        std::string s = gen.generate("Dr. Quimby", PhiCategory::HCW, rng, map);
        CHECK(s.rfind("Dr. ", 0) == 0);
        CHECK(in_lexicon(gen, "hcw_surnames", s.substr(4)));
        std::string t = gen.generate("Sandoval MD", PhiCategory::HCW, rng, map);
        CHECK(t.size() > 3);
        CHECK(t.substr(t.size() - 3) == " MD");
    }
    SUBCASE("capitalization is preserved") {
        SurrogateMap map;
        Rng rng(4);
        std::string s = gen.generate("ABBOTT", PhiCategory::PATIENT, rng, map);
        CHECK(s == [&] {
            std::string u = s;
            for (char& c : u) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return u;
        }());
        CHECK(s != "ABBOTT");
    }
    SUBCASE("repeated names in a report stay consistent") {
        SurrogateMap map;
        Rng rng(4);
        std::string a = gen.generate("Alice Abbott", PhiCategory::PATIENT, rng, map);
        std::string b = gen.generate("Alice Abbott", PhiCategory::PATIENT, rng, map);
        CHECK(a == b);
    }
}

TEST_CASE("hospital and vendor draws avoid the original") {
    const SurrogateGenerator& gen = test_generator();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        SurrogateMap map;
        Rng rng(seed);
        std::string h =
            gen.generate("Lakeside Medical Center", PhiCategory::HOSPITAL, rng, map);
        CHECK(h != "Lakeside Medical Center");
        CHECK(in_lexicon(gen, "hospitals", h));
        std::string v = gen.generate("Radionix", PhiCategory::VENDOR, rng, map);
        CHECK(v != "Radionix");
        CHECK(in_lexicon(gen, "vendors", v));
    }
}

TEST_CASE("lexicon draws avoid reuse while entries remain") {
    const SurrogateGenerator& gen = test_generator();
    const auto& vendors = gen.lexicons().at("vendors");
    SurrogateMap map;
    Rng rng(9);
    std::set<std::string> seen;
    // distinct originals must get distinct surrogates until the lexicon runs
    // dry (8 vendor entries; original "orig-k" is never a lexicon member)
    for (std::size_t k = 0; k < vendors.size(); ++k) {
        std::string s = gen.generate("orig-" + std::to_string(k), PhiCategory::VENDOR, rng, map);
        CHECK(seen.insert(s).second);
    }
}

TEST_CASE("apply_surrogates") {
    const SurrogateGenerator& gen = test_generator();
    AnnotatedReport r;
    r.id = "r1";
    r.text = "Pt Abbott seen 01/23/2019 at Lakeside Medical Center.";
    std::vector<PhiSpan> spans = {
        {3, 9, PhiCategory::PATIENT, Provenance::PREDICTED},
        {15, 25, PhiCategory::DATE, Provenance::PREDICTED},
        {29, 52, PhiCategory::HOSPITAL, Provenance::PREDICTED},
    };

    SUBCASE("no spans is the identity") {
        DeidResult res = apply_surrogates(r, {}, 7, gen);
        CHECK(res.text == r.text);
        CHECK(res.spans.empty());
        CHECK(res.replacements.empty());
    }
    SUBCASE("rewritten spans point at their surrogates") {
        DeidResult res = apply_surrogates(r, spans, 7, gen);
        REQUIRE(res.spans.size() == 3);
        REQUIRE(res.replacements.size() == 3);
        for (std::size_t i = 0; i < res.spans.size(); ++i) {
            const PhiSpan& s = res.spans[i];
            CHECK(s.provenance == Provenance::SYNTHETIC);
            CHECK(s.category == spans[i].category);
            CHECK(utf8::slice(res.text, s.start, s.end) == res.replacements[i].surrogate);
            CHECK(res.replacements[i].orig_len == spans[i].end - spans[i].start);
        }
    }
    SUBCASE("non-PHI residue is untouched") {
        DeidResult res = apply_surrogates(r, spans, 7, gen);
        // rebuild the expected text from the original gaps + surrogates
        std::string expected;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < spans.size(); ++i) {
            expected += utf8::slice(r.text, pos, spans[i].start);
            expected += res.replacements[i].surrogate;
            pos = spans[i].end;
        }
        expected += utf8::slice(r.text, pos, utf8::count_codepoints(r.text));
        CHECK(res.text == expected);
    }
    SUBCASE("deterministic in (report, spans, seed)") {
        DeidResult a = apply_surrogates(r, spans, 7, gen);
        DeidResult b = apply_surrogates(r, spans, 7, gen);
        CHECK(a.text == b.text);
        CHECK(a.spans == b.spans);
    }
    SUBCASE("unsorted input spans are handled") {
        std::vector<PhiSpan> shuffled = {spans[2], spans[0], spans[1]};
        CHECK(apply_surrogates(r, shuffled, 7, gen).text == apply_surrogates(r, spans, 7, gen).text);
    }
    SUBCASE("invalid spans are rejected with the report id") {
        std::vector<PhiSpan> bad = {{0, 999, PhiCategory::ID, Provenance::PREDICTED}};
        try {
            apply_surrogates(r, bad, 7, gen);
            FAIL("expected throw");
        } catch (const std::exception& e) {
            CHECK(std::string(e.what()).find("r1") != std::string::npos);
        }
        std::vector<PhiSpan> overlapping = {{3, 9, PhiCategory::ID, Provenance::PREDICTED},
                                            {8, 12, PhiCategory::ID, Provenance::PREDICTED}};
        CHECK_THROWS(apply_surrogates(r, overlapping, 7, gen));
    }
    SUBCASE("multibyte residue survives") {
        AnnotatedReport m;
        m.id = "m1";
        m.text = "caf\xc3\xa9 Abbott \xe2\x82\xac";
        std::vector<PhiSpan> s = {{5, 11, PhiCategory::PATIENT, Provenance::PREDICTED}};
        DeidResult res = apply_surrogates(m, s, 3, gen);
        CHECK(res.text.substr(0, 6) == "caf\xc3\xa9 ");
        CHECK(res.text.substr(res.text.size() - 4) == " \xe2\x82\xac");
    }
}

TEST_CASE("deidentify_corpus") {
    const SurrogateGenerator& gen = test_generator();
    RuleSet rules =
        RuleSet::load(std::filesystem::path(DEID_DATA_DIR) / "default_rules.json");
    RuleDetector det(rules);

    Corpus corpus;
    corpus.reports.push_back(
        {"a", "Alice Abbott seen 01/23/2019 at Lakeside Medical Center.", {}, {}});
    corpus.reports.push_back({"b", "Dr. Quimby called (650) 724-1234.", {}, {}});

    SUBCASE("one corpus per run, ids preserved") {
        auto runs = deidentify_corpus(corpus, det, 5, 3, gen);
        REQUIRE(runs.size() == 3);
        for (const Corpus& c : runs) {
            REQUIRE(c.reports.size() == 2);
            CHECK(c.reports[0].id == "a");
            CHECK(c.reports[1].id == "b");
            for (const AnnotatedReport& r : c.reports)
                for (const PhiSpan& s : r.spans) CHECK(s.provenance == Provenance::SYNTHETIC);
        }
    }
    SUBCASE("same seed reproduces byte-identical output") {
        auto x = deidentify_corpus(corpus, det, 5, 2, gen);
        auto y = deidentify_corpus(corpus, det, 5, 2, gen);
        CHECK(x == y);
    }
    SUBCASE("PHI is actually gone") {
        auto runs = deidentify_corpus(corpus, det, 5, 1, gen);
        const std::string& t0 = runs[0].reports[0].text;
        CHECK(t0.find("Alice") == std::string::npos);
        CHECK(t0.find("Abbott") == std::string::npos);
        CHECK(t0.find("01/23/2019") == std::string::npos);
        CHECK(t0.find("Lakeside") == std::string::npos);
        const std::string& t1 = runs[0].reports[1].text;
        CHECK(t1.find("Quimby") == std::string::npos);
        CHECK(t1.find("724-1234") == std::string::npos);
    }
    SUBCASE("runs must be positive") { CHECK_THROWS(deidentify_corpus(corpus, det, 5, 0, gen)); }
}

TEST_CASE("audit lines never leak original PHI text") {
    const SurrogateGenerator& gen = test_generator();
    AnnotatedReport r;
    r.id = "r1";
    r.text = "Pt Zzyzx seen 03/14/2018.";
    std::vector<PhiSpan> spans = {{3, 8, PhiCategory::PATIENT, Provenance::PREDICTED},
                                  {14, 24, PhiCategory::DATE, Provenance::PREDICTED}};
    DeidResult res = apply_surrogates(r, spans, 11, gen);
    std::string line = audit_line("r1", res);
    CHECK(line.find("Zzyzx") == std::string::npos);
    CHECK(line.find("03/14/2018") == std::string::npos);
    CHECK(line.find("\"orig_len\":5") != std::string::npos);
    CHECK(line.find("\"id\":\"r1\"") != std::string::npos);
}
