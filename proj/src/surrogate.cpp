#include "deid/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "deid/segment.hpp"
#include "deid/utf8.hpp"
#include "json.hpp"

namespace deid {

FormatPattern extract_format(const std::string& span_text, PhiCategory category) {
    if (span_text.empty()) throw std::invalid_argument("extract_format: empty span text");
    std::u32string cps = utf8::decode(span_text);
    std::u32string pattern;
    pattern.reserve(cps.size());
    for (char32_t c : cps) {
        if (c >= U'0' && c <= U'9')
            pattern.push_back(U'D');
        else if (c >= U'A' && c <= U'Z')
            pattern.push_back(U'A');
        else if (c >= U'a' && c <= U'z')
            pattern.push_back(U'a');
        else
            pattern.push_back(c);
    }
    return {utf8::encode(pattern), category};
}

const std::string* SurrogateMap::find(PhiCategory category, const std::string& original) const {
    auto it = entries_.find({category, original});
    return it == entries_.end() ? nullptr : &it->second;
}

void SurrogateMap::record(PhiCategory category, const std::string& original,
                          const std::string& surrogate) {
    entries_[{category, original}] = surrogate;
    used_[category].push_back(surrogate);
}

bool SurrogateMap::used(PhiCategory category, const std::string& surrogate) const {
    auto it = used_.find(category);
    return it != used_.end() &&
           std::find(it->second.begin(), it->second.end(), surrogate) != it->second.end();
}

SurrogateGenerator::SurrogateGenerator(std::map<std::string, std::vector<std::string>> lexicons)
    : lexicons_(std::move(lexicons)) {
    for (const char* name : {"patient_first_names", "patient_surnames", "hcw_first_names",
                             "hcw_surnames", "hospitals", "vendors"}) {
        auto it = lexicons_.find(name);
        if (it == lexicons_.end() || it->second.empty())
            throw std::invalid_argument(std::string("missing or empty lexicon '") + name + "'");
    }
}

std::map<std::string, std::vector<std::string>> load_lexicons(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path.string());
    nlohmann::json j = nlohmann::json::parse(in);
    std::map<std::string, std::vector<std::string>> lex;
    for (const auto& [name, entries] : j.items())
        lex[name] = entries.get<std::vector<std::string>>();
    return lex;
}

SurrogateGenerator SurrogateGenerator::from_lexicon_file(const std::filesystem::path& path) {
    return SurrogateGenerator(load_lexicons(path));
}

namespace {

const std::array<std::string, 12> kMonths = {"January", "February", "March",     "April",
                                             "May",     "June",     "July",      "August",
                                             "September", "October", "November", "December"};

bool is_digit_cp(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_alpha_cp(char32_t c) { return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z'); }

struct Run {
    std::size_t start, len;
};

std::vector<Run> find_runs(const std::u32string& cps, bool (*pred)(char32_t)) {
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < cps.size()) {
        if (!pred(cps[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        while (i < cps.size() && pred(cps[i])) ++i;
        runs.push_back({start, i - start});
    }
    return runs;
}

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string upper_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

enum class CapStyle { LOWER, TITLE, UPPER };

CapStyle cap_style_of(const std::string& word) {
    bool any_lower = false, any_upper = false;
    for (char c : word) {
        if (std::islower(static_cast<unsigned char>(c))) any_lower = true;
        if (std::isupper(static_cast<unsigned char>(c))) any_upper = true;
    }
    if (any_upper && !any_lower) return CapStyle::UPPER;
    if (any_upper) return CapStyle::TITLE;
    return CapStyle::LOWER;
}

std::string apply_cap_style(std::string word, CapStyle style) {
    switch (style) {
        case CapStyle::UPPER: return upper_ascii(std::move(word));
        case CapStyle::LOWER: return lower_ascii(std::move(word));
        case CapStyle::TITLE:
            word = lower_ascii(std::move(word));
            if (!word.empty()) word[0] = static_cast<char>(std::toupper(
                static_cast<unsigned char>(word[0])));
            return word;
    }
    return word;
}

// Index into kMonths if the word is a month name or standard 3-letter
// abbreviation, else -1.
int month_index(const std::string& word) {
    std::string w = lower_ascii(word);
    for (std::size_t i = 0; i < kMonths.size(); ++i) {
        std::string full = lower_ascii(kMonths[i]);
        if (w == full || (w.size() == 3 && w == full.substr(0, 3))) return static_cast<int>(i);
    }
    return -1;
}

std::string pad_number(long long value, std::size_t width) {
    std::string s = std::to_string(value);
    while (s.size() < width) s.insert(s.begin(), '0');
    return s;
}

std::string pour_format(const std::string& pattern, Rng& rng) {
    std::u32string p = utf8::decode(pattern);
    std::u32string out;
    out.reserve(p.size());
    for (char32_t c : p) {
        if (c == U'D')
            out.push_back(U'0' + static_cast<char32_t>(rng.below(10)));
        else if (c == U'A')
            out.push_back(U'A' + static_cast<char32_t>(rng.below(26)));
        else if (c == U'a')
            out.push_back(U'a' + static_cast<char32_t>(rng.below(26)));
        else
            out.push_back(c);
    }
    return utf8::encode(out);
}

// Replaces runs (given in ascending start order) with replacement strings.
std::string splice(const std::u32string& cps, const std::vector<std::pair<Run, std::string>>& subs) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& [run, text] : subs) {
        out += utf8::encode(cps.substr(pos, run.start - pos));
        out += text;
        pos = run.start + run.len;
    }
    out += utf8::encode(cps.substr(pos));
    return out;
}

std::string generate_date(const std::string& text, Rng& rng) {
    std::u32string cps = utf8::decode(text);
    std::vector<Run> digit_runs = find_runs(cps, is_digit_cp);
    std::vector<Run> alpha_runs = find_runs(cps, is_alpha_cp);

    // Locate a spelled month, if any.
    int month_run = -1;
    for (std::size_t i = 0; i < alpha_runs.size(); ++i) {
        std::string word = utf8::encode(cps.substr(alpha_runs[i].start, alpha_runs[i].len));
        if (month_index(word) >= 0) {
            month_run = static_cast<int>(i);
            break;
        }
    }
    if (digit_runs.empty() && month_run < 0)
        return pour_format(extract_format(text, PhiCategory::DATE).pattern, rng);

    long long month = rng.range(1, 12);
    long long day = rng.range(1, 28);
    long long year = rng.range(1950, 2030);

    std::vector<std::pair<Run, std::string>> subs;
    if (month_run >= 0) {
        const Run& r = alpha_runs[month_run];
        std::string orig = utf8::encode(cps.substr(r.start, r.len));
        std::string name = kMonths[static_cast<std::size_t>(month - 1)];
        // Keep the abbreviation style; "May" counts as a full month name.
        bool orig_abbreviated = lower_ascii(orig) != lower_ascii(kMonths[static_cast<std::size_t>(
                                                         month_index(orig))]);
        if (orig_abbreviated) name = name.substr(0, 3);
        subs.push_back({r, apply_cap_style(name, cap_style_of(orig))});
    }

    // Digit groups: width >= 3 is a year; narrow groups fill month then day
    // (day first when the month is spelled); leftovers get poured digits.
    int narrow_seen = 0;
    for (const Run& r : digit_runs) {
        std::string repl;
        if (r.len >= 3) {
            repl = pad_number(year, r.len);
        } else {
            long long v;
            if (month_run >= 0)
                v = narrow_seen == 0 ? day : year % 100;
            else
                v = narrow_seen == 0 ? month : (narrow_seen == 1 ? day : year % 100);
            if (r.len == 1 && v > 9) v = 1 + static_cast<long long>(rng.below(9));
            repl = pad_number(v, r.len);
            ++narrow_seen;
        }
        subs.push_back({r, repl});
    }
    std::sort(subs.begin(), subs.end(),
              [](const auto& a, const auto& b) { return a.first.start < b.first.start; });
    return splice(cps, subs);
}

std::string generate_age(const std::string& text, Rng& rng, std::size_t* warnings) {
    std::u32string cps = utf8::decode(text);
    std::vector<Run> digit_runs = find_runs(cps, is_digit_cp);
    if (digit_runs.empty()) {
        if (warnings) ++*warnings;
        return std::to_string(rng.range(18, 89));
    }
    const Run& r = digit_runs.front();
    long long orig = 0;
    for (std::size_t i = 0; i < std::min<std::size_t>(r.len, 9); ++i)
        orig = orig * 10 + (cps[r.start + i] - U'0');
    long long value = orig;
    for (int attempt = 0; attempt < 100 && value == orig; ++attempt)
        value = std::clamp<long long>(orig + rng.range(-10, 10), 1, 89);
    return splice(cps, {{r, std::to_string(value)}});
}

const std::vector<std::string> kCredentials = {"Dr", "Mr",  "Mrs", "Ms", "Prof", "MD", "RN",
                                               "DO", "NP",  "PA",  "Jr", "Sr",   "PhD"};

bool is_credential(const std::string& word) {
    return std::find(kCredentials.begin(), kCredentials.end(), word) != kCredentials.end();
}

std::string draw_lexicon(const std::vector<std::string>& entries, const std::string& avoid,
                         PhiCategory category, Rng& rng, const SurrogateMap& map) {
    // Prefer entries not yet used in this report, never the original while
    // an alternative exists.
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::string& pick = entries[rng.below(entries.size())];
        if (pick != avoid && !map.used(category, pick)) return pick;
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
        const std::string& pick = entries[rng.below(entries.size())];
        if (pick != avoid) return pick;
    }
    return entries[rng.below(entries.size())];
}

}  // namespace

std::string SurrogateGenerator::generate(const std::string& span_text, PhiCategory category,
                                         Rng& rng, SurrogateMap& map,
                                         std::size_t* warnings) const {
    if (const std::string* existing = map.find(category, span_text)) return *existing;

    std::string surrogate;
    switch (category) {
        case PhiCategory::DATE: {
            for (int attempt = 0; attempt < 100; ++attempt) {
                surrogate = generate_date(span_text, rng);
                if (surrogate != span_text) break;
            }
            break;
        }
        case PhiCategory::AGE:
            surrogate = generate_age(span_text, rng, warnings);
            break;
        case PhiCategory::PHONE:
        case PhiCategory::ID: {
            std::string pattern = extract_format(span_text, category).pattern;
            for (int attempt = 0; attempt < 100; ++attempt) {
                surrogate = pour_format(pattern, rng);
                if (surrogate != span_text) break;
            }
            break;
        }
        case PhiCategory::PATIENT:
        case PhiCategory::HCW: {
            const bool patient = category == PhiCategory::PATIENT;
            const auto& first_names =
                lexicons_.at(patient ? "patient_first_names" : "hcw_first_names");
            const auto& surnames = lexicons_.at(patient ? "patient_surnames" : "hcw_surnames");
            TokenSeq tokens = tokenize(span_text);
            std::u32string cps = utf8::decode(span_text);
            std::vector<std::pair<Run, std::string>> subs;
            std::size_t name_index = 0;
            std::size_t name_total = 0;
            for (const Token& t : tokens.tokens)
                if (is_alpha_cp(cps[t.start]) && !is_credential(t.text)) ++name_total;
            for (const Token& t : tokens.tokens) {
                if (!is_alpha_cp(cps[t.start]) || is_credential(t.text)) continue;
                // Single-token names draw a surname; multi-token names lead
                // with a first name.
                const auto& source =
                    (name_total > 1 && name_index == 0) ? first_names : surnames;
                std::string pick = draw_lexicon(source, t.text, category, rng, map);
                subs.push_back({{t.start, t.end - t.start},
                                apply_cap_style(pick, cap_style_of(t.text))});
                ++name_index;
            }
            if (subs.empty()) {
                surrogate = pour_format(extract_format(span_text, category).pattern, rng);
            } else {
                surrogate = splice(cps, subs);
            }
            break;
        }
        case PhiCategory::HOSPITAL:
        case PhiCategory::VENDOR: {
            const auto& entries =
                lexicons_.at(category == PhiCategory::HOSPITAL ? "hospitals" : "vendors");
            surrogate = draw_lexicon(entries, span_text, category, rng, map);
            break;
        }
    }
    map.record(category, span_text, surrogate);
    return surrogate;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace

DeidResult apply_surrogates(const AnnotatedReport& report, std::span<const PhiSpan> spans,
                            std::uint64_t seed, const SurrogateGenerator& generator) {
    std::vector<PhiSpan> sorted(spans.begin(), spans.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    std::u32string cps = utf8::decode(report.text);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i].start >= sorted[i].end || sorted[i].end > cps.size())
            throw std::invalid_argument("report '" + report.id + "': span " + std::to_string(i) +
                                        " out of bounds");
        if (i > 0 && sorted[i].start < sorted[i - 1].end)
            throw std::invalid_argument("report '" + report.id + "': overlapping spans");
    }

    DeidResult result;
    result.seed = seed;
    // Per-report generator state: independent of report processing order.
    Rng rng(splitmix64(seed ^ splitmix64(fnv1a64(report.id))));

    std::u32string out;
    std::size_t pos = 0;
    for (const PhiSpan& span : sorted) {
        out += cps.substr(pos, span.start - pos);
        std::string original = utf8::encode(cps.substr(span.start, span.end - span.start));
        std::string surrogate =
            generator.generate(original, span.category, rng, result.map, &result.warnings);
        std::u32string sur32 = utf8::decode(surrogate);
        std::size_t new_start = out.size();
        out += sur32;
        result.spans.push_back({new_start, out.size(), span.category, Provenance::SYNTHETIC});
        result.replacements.push_back(
            {span.category, span.end - span.start, surrogate, new_start, out.size()});
        pos = span.end;
    }
    out += cps.substr(pos);
    result.text = utf8::encode(out);
    return result;
}

std::vector<Corpus> deidentify_corpus(const Corpus& corpus, const Detector& detector,
                                      std::uint64_t seed, int runs,
                                      const SurrogateGenerator& generator, std::size_t max_len) {
    if (runs < 1) throw std::invalid_argument("runs must be >= 1");
    Corpus detected = detect_corpus(corpus, detector, max_len);
    std::vector<Corpus> out;
    out.reserve(static_cast<std::size_t>(runs));
    for (int run = 0; run < runs; ++run) {
        std::uint64_t run_seed = seed + static_cast<std::uint64_t>(run);
        Corpus deid;
        deid.name = corpus.name;
        for (const AnnotatedReport& report : detected.reports) {
            DeidResult res =
                apply_surrogates(report, report.spans_with(Provenance::PREDICTED), run_seed,
                                 generator);
            AnnotatedReport r;
            r.id = report.id;
            r.text = std::move(res.text);
            r.spans = std::move(res.spans);
            r.metadata = report.metadata;
            deid.reports.push_back(std::move(r));
        }
        out.push_back(std::move(deid));
    }
    return out;
}

std::string audit_line(const std::string& report_id, const DeidResult& result) {
    nlohmann::ordered_json j;
    j["id"] = report_id;
    j["seed"] = result.seed;
    j["replacements"] = nlohmann::ordered_json::array();
    for (const Replacement& r : result.replacements) {
        nlohmann::ordered_json jr;
        jr["category"] = std::string(to_string(r.category));
        jr["orig_len"] = r.orig_len;
        jr["surrogate"] = r.surrogate;
        jr["start"] = r.start;
        jr["end"] = r.end;
        j["replacements"].push_back(jr);
    }
    return j.dump();
}

}  // namespace deid
