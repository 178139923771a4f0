#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/detect.hpp"

namespace deid {

// Character-class template: 'D' digit, 'A' uppercase letter, 'a' lowercase
// letter, everything else literal.
struct FormatPattern {
    std::string pattern;  // one class char per code point of the source
    PhiCategory category = PhiCategory::DATE;

    bool operator==(const FormatPattern&) const = default;
};

FormatPattern extract_format(const std::string& span_text, PhiCategory category);

// Per-report replacement memory: identical (category, original text) pairs
// always map to the same surrogate; draws avoid reuse within a category
// while the lexicon has unused entries.
class SurrogateMap {
  public:
    const std::string* find(PhiCategory category, const std::string& original) const;
    void record(PhiCategory category, const std::string& original, const std::string& surrogate);
    bool used(PhiCategory category, const std::string& surrogate) const;

    const std::map<std::pair<PhiCategory, std::string>, std::string>& entries() const {
        return entries_;
    }

  private:
    std::map<std::pair<PhiCategory, std::string>, std::string> entries_;
    std::map<PhiCategory, std::vector<std::string>> used_;
};

// Deterministic generator state; draws are stable across platforms.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::uint64_t next() { return engine_(); }
    // Uniform in [0, n).
    std::uint64_t below(std::uint64_t n) { return n ? engine_() % n : 0; }
    // Uniform in [lo, hi] inclusive.
    long long range(long long lo, long long hi) {
        return lo + static_cast<long long>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

  private:
    std::mt19937_64 engine_;
};

struct Replacement {
    PhiCategory category;
    std::size_t orig_len = 0;  // code points; original text is never stored
    std::string surrogate;
    std::size_t start = 0;  // offsets into the rewritten text
    std::size_t end = 0;
};

struct DeidResult {
    std::string text;  // rewritten report text
    std::vector<PhiSpan> spans;  // SYNTHETIC, offsets into rewritten text
    SurrogateMap map;
    std::uint64_t seed = 0;
    std::vector<Replacement> replacements;
    std::size_t warnings = 0;  // e.g. unparseable AGE values
};

// Hide-in-plain-sight generator. Lexicon names used per category:
// patient_first_names/patient_surnames (PATIENT), hcw_first_names/
// hcw_surnames (HCW), hospitals (HOSPITAL), vendors (VENDOR).
class SurrogateGenerator {
  public:
    explicit SurrogateGenerator(std::map<std::string, std::vector<std::string>> lexicons);

    static SurrogateGenerator from_lexicon_file(const std::filesystem::path& path);

    // Format-preserving surrogate for one span; consults and updates the map
    // so repeated (category, text) pairs stay consistent. Never returns the
    // original text when the category's value space has an alternative.
    std::string generate(const std::string& span_text, PhiCategory category, Rng& rng,
                         SurrogateMap& map, std::size_t* warnings = nullptr) const;

    const std::map<std::string, std::vector<std::string>>& lexicons() const { return lexicons_; }

  private:
    std::map<std::string, std::vector<std::string>> lexicons_;
};

std::map<std::string, std::vector<std::string>> load_lexicons(const std::filesystem::path& path);

// Replaces the given spans left-to-right, shifting later offsets by the
// accumulated length delta. Deterministic in (report, spans, seed);
// non-PHI text is preserved byte for byte.
DeidResult apply_surrogates(const AnnotatedReport& report, std::span<const PhiSpan> spans,
                            std::uint64_t seed, const SurrogateGenerator& generator);

// Detects once, then surrogates `runs` times with per-run seeds seed+0,
// seed+1, ... Each output corpus carries SYNTHETIC spans as ground truth.
std::vector<Corpus> deidentify_corpus(const Corpus& corpus, const Detector& detector,
                                      std::uint64_t seed, int runs,
                                      const SurrogateGenerator& generator,
                                      std::size_t max_len = 512);

// Audit sidecar line for one de-identified report (JSONL; never contains
// original PHI text).
std::string audit_line(const std::string& report_id, const DeidResult& result);

}  // namespace deid
