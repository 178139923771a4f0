#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "deid/corpus.hpp"
#include "deid/eval.hpp"

namespace deid {

// Maps one vendor's label strings onto the 8-category space. An empty
// category set marks a label as explicitly unmapped.
struct VendorMapping {
    std::string vendor;
    std::vector<std::pair<std::string, std::vector<PhiCategory>>> labels;
    std::string version;

    const std::vector<PhiCategory>* categories_for(const std::string& label) const;
    // Categories reachable through at least one label.
    std::vector<PhiCategory> image() const;
    // Groups of categories fed by a single label (e.g. {PATIENT, HCW} for
    // GCP's PERSON_NAME); such rows are scored against the union of gold
    // tokens for the group.
    std::vector<std::vector<PhiCategory>> dual_groups() const;
};

// GCP, AWS and Azure label harmonization tables.
std::vector<VendorMapping> builtin_mappings();

struct VendorSpan {
    std::size_t start = 0;  // code points
    std::size_t end = 0;
    std::string label;
    std::optional<double> confidence;

    bool operator==(const VendorSpan&) const = default;
};

struct HarmonizeResult {
    // May contain same-range spans of different categories (dual-mapped
    // labels); never attached to a report directly.
    std::vector<PhiSpan> spans;
    std::size_t dropped = 0;  // spans whose label had no mapping
    std::map<std::string, std::size_t> unknown_labels;
};

// Expands each span to one PhiSpan per mapped category (provenance VENDOR);
// overlapping same-category ranges are merged by union.
HarmonizeResult harmonize(std::span<const VendorSpan> spans, const VendorMapping& mapping);

// Response parsers normalize each vendor's offset unit to code points
// against the submitted text: GCP already reports code points, AWS reports
// UTF-8 byte offsets, Azure reports UTF-16 code units. All throw on
// malformed bodies or offsets outside the text.
std::vector<VendorSpan> parse_gcp_response(const std::string& body, const std::string& text);
std::vector<VendorSpan> parse_aws_response(const std::string& body, const std::string& text);
std::vector<VendorSpan> parse_azure_response(const std::string& body, const std::string& text);

// Scores vendor spans against SYNTHETIC gold labels, token level. Categories
// outside the mapping image are marked absent (rendered "--"); categories in
// a dual group are scored against the union of the group's gold tokens, so
// both rows of a dual-mapped pair come out identical. The overall row counts
// each dual group once.
EvalReport evaluate_vendor(const Corpus& deid_corpus,
                           const std::map<std::string, std::vector<VendorSpan>>& spans_by_report,
                           const VendorMapping& mapping);

}  // namespace deid
