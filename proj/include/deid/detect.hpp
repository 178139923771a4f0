#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <variant>
#include <vector>

#include "deid/corpus.hpp"

namespace deid {

// Behavioral contract for a PHI detector. Returned spans carry provenance
// PREDICTED, are sorted, non-overlapping and within text bounds. Detectors
// are immutable after construction and safe to share across threads.
class Detector {
  public:
    virtual ~Detector() = default;
    virtual std::vector<PhiSpan> detect(const std::string& text) const = 0;
    virtual std::string name() const = 0;
};

struct PatternRule {
    PhiCategory category;
    std::string pattern;  // ECMAScript regular expression
};

// Matches whole-word occurrences of lexicon entries; when context_before is
// set, the nearest preceding word must equal it (punctuation between is
// ignored, e.g. "Dr." satisfies context "Dr").
struct LexiconRule {
    PhiCategory category;
    std::string lexicon;
    std::optional<std::string> context_before;
};

using Rule = std::variant<PatternRule, LexiconRule>;

class RuleSet {
  public:
    // Validates at construction: patterns compile, lexicon references
    // resolve, lexicons are non-empty.
    RuleSet(std::vector<Rule> rules, std::map<std::string, std::vector<std::string>> lexicons);

    static RuleSet from_json(const std::string& json_text);
    static RuleSet load(const std::filesystem::path& path);

    const std::vector<Rule>& rules() const { return rules_; }
    const std::map<std::string, std::vector<std::string>>& lexicons() const { return lexicons_; }
    const std::regex& compiled(std::size_t rule_index) const { return compiled_.at(rule_index); }

  private:
    std::vector<Rule> rules_;
    std::map<std::string, std::vector<std::string>> lexicons_;
    std::map<std::size_t, std::regex> compiled_;  // rule index -> compiled pattern
};

// Collects all pattern and lexicon matches; overlaps resolved by longest
// span, then category priority ID > PHONE > DATE > AGE > PATIENT > HCW >
// HOSPITAL > VENDOR, then earliest rule. Offsets are code points.
std::vector<PhiSpan> rule_detect(const std::string& text, const RuleSet& rules);

class RuleDetector : public Detector {
  public:
    explicit RuleDetector(RuleSet rules) : rules_(std::move(rules)) {}
    std::vector<PhiSpan> detect(const std::string& text) const override {
        return rule_detect(text, rules_);
    }
    std::string name() const override { return "rules"; }
    const RuleSet& rules() const { return rules_; }

  private:
    RuleSet rules_;
};

struct RemoteEndpoint {
    std::string base_url;
    int timeout_ms = 10000;
    int max_retries = 3;
};

// POSTs {base}/detect with {"text": ...} and validates the response spans
// against the request text before returning them. Retries transport
// failures with exponential backoff; no partial results.
std::vector<PhiSpan> remote_detect(const std::string& text, const RemoteEndpoint& endpoint);

class RemoteDetector : public Detector {
  public:
    explicit RemoteDetector(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    std::vector<PhiSpan> detect(const std::string& text) const override {
        return remote_detect(text, endpoint_);
    }
    std::string name() const override { return "remote:" + endpoint_.base_url; }

  private:
    RemoteEndpoint endpoint_;
};

// Full inference path: tokenize, chunk to max_len with sentence-aligned
// breaks, detect per chunk (the detector sees chunk-local text), shift
// offsets back to document space, reconstruct labels across chunks and
// attach the resulting PREDICTED spans. Prior PREDICTED spans are replaced;
// all other provenances are untouched. Detector errors are rethrown tagged
// with the report id.
Corpus detect_corpus(const Corpus& corpus, const Detector& detector, std::size_t max_len = 512);

int category_priority(PhiCategory c);

}  // namespace deid
