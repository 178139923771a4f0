#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deid {

// The 8 PHI classes. Enum order matches the serialized (alphabetical) names.
enum class PhiCategory { AGE, DATE, HCW, HOSPITAL, ID, PATIENT, PHONE, VENDOR };

inline constexpr std::size_t kNumCategories = 8;

inline constexpr std::array<PhiCategory, kNumCategories> kAllCategories = {
    PhiCategory::AGE,     PhiCategory::DATE,    PhiCategory::HCW,
    PhiCategory::HOSPITAL, PhiCategory::ID,     PhiCategory::PATIENT,
    PhiCategory::PHONE,   PhiCategory::VENDOR};

std::string_view to_string(PhiCategory c);
std::optional<PhiCategory> category_from_string(std::string_view s);

// Token-level class label: a PHI category, or nullopt for non-PHI (O).
using Label = std::optional<PhiCategory>;

enum class Provenance { GOLD, PREDICTED, SYNTHETIC, VENDOR };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view s);

// One labeled character range. Offsets count Unicode code points,
// [start, end), against the owning report's text.
struct PhiSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    PhiCategory category = PhiCategory::DATE;
    Provenance provenance = Provenance::GOLD;

    bool operator==(const PhiSpan&) const = default;
};

struct AnnotatedReport {
    std::string id;
    std::string text;  // UTF-8
    std::vector<PhiSpan> spans;
    std::map<std::string, std::string> metadata;

    bool operator==(const AnnotatedReport&) const = default;

    // Spans of one provenance, sorted by start.
    std::vector<PhiSpan> spans_with(Provenance p) const;
};

struct Corpus {
    std::string name;
    std::vector<AnnotatedReport> reports;

    bool operator==(const Corpus&) const = default;
};

// Empty iff the report satisfies all invariants; each entry names the
// violated field and rule.
std::vector<std::string> validate_report(const AnnotatedReport& report);

// JSONL, one report per line. load throws on I/O failure, malformed JSON
// (with line number) and invariant violations (with report id); spans come
// back sorted by start per provenance.
Corpus load_corpus(const std::filesystem::path& path);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct TokenClassCounts {
    std::array<std::size_t, kNumCategories> phi{};
    std::size_t non_phi = 0;

    std::size_t total() const;
    bool operator==(const TokenClassCounts&) const = default;
};

// Tokenizes every report and counts tokens per class: a token counts toward
// category c iff its range intersects a span of category c with the given
// provenance, otherwise toward non-PHI.
TokenClassCounts count_tokens_by_class(const Corpus& corpus, Provenance provenance);

}  // namespace deid
