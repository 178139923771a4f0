#include "deid/vendors.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "deid/segment.hpp"
#include "deid/utf8.hpp"
#include "json.hpp"

namespace deid {

const std::vector<PhiCategory>* VendorMapping::categories_for(const std::string& label) const {
    for (const auto& [name, cats] : labels)
        if (name == label) return &cats;
    return nullptr;
}

std::vector<PhiCategory> VendorMapping::image() const {
    std::set<PhiCategory> cats;
    for (const auto& [name, mapped] : labels) cats.insert(mapped.begin(), mapped.end());
    return {cats.begin(), cats.end()};
}

std::vector<std::vector<PhiCategory>> VendorMapping::dual_groups() const {
    std::vector<std::vector<PhiCategory>> groups;
    for (const auto& [name, mapped] : labels) {
        if (mapped.size() < 2) continue;
        auto sorted = mapped;
        std::sort(sorted.begin(), sorted.end());
        if (std::find(groups.begin(), groups.end(), sorted) == groups.end())
            groups.push_back(sorted);
    }
    return groups;
}

std::vector<VendorMapping> builtin_mappings() {
    using C = PhiCategory;
    std::vector<VendorMapping> mappings;

    VendorMapping gcp;
    gcp.vendor = "gcp";
    gcp.version = "1";
    gcp.labels = {{"DATE", {C::DATE}},
                  {"GENERIC_ID", {C::ID}},
                  {"PHONE_NUMBER", {C::PHONE}},
                  {"PERSON_NAME", {C::PATIENT, C::HCW}},
                  {"LOCATION", {C::HOSPITAL}},
                  {"ORGANIZATION_NAME", {C::VENDOR}}};
    mappings.push_back(gcp);

    VendorMapping aws;
    aws.vendor = "aws";
    aws.version = "1";
    // No AWS label maps to VENDOR; the category stays unreachable and is
    // rendered "--" downstream.
    aws.labels = {{"DATE", {C::DATE}},
                  {"ID", {C::ID}},
                  {"PHONE_OR_FAX", {C::PHONE}},
                  {"NAME", {C::PATIENT, C::HCW}},
                  {"ADDRESS", {C::HOSPITAL}}};
    mappings.push_back(aws);

    VendorMapping azure;
    azure.vendor = "azure";
    azure.version = "1";
    azure.labels = {{"Date", {C::DATE}},
                    {"MedicalRecord", {C::ID}},
                    {"IDNum", {C::ID}},
                    {"Phone", {C::PHONE}},
                    {"Patient", {C::PATIENT}},
                    {"Doctor", {C::HCW}},
                    {"Hospital", {C::HOSPITAL}},
                    {"Organization", {C::VENDOR}}};
    mappings.push_back(azure);

    return mappings;
}

HarmonizeResult harmonize(std::span<const VendorSpan> spans, const VendorMapping& mapping) {
    HarmonizeResult result;
    std::array<std::vector<std::pair<std::size_t, std::size_t>>, kNumCategories> intervals;
    for (const VendorSpan& s : spans) {
        const auto* cats = mapping.categories_for(s.label);
        if (!cats || cats->empty()) {
            ++result.dropped;
            if (!cats) ++result.unknown_labels[s.label];
            continue;
        }
        for (PhiCategory c : *cats)
            intervals[static_cast<std::size_t>(c)].push_back({s.start, s.end});
    }
    for (std::size_t ci = 0; ci < kNumCategories; ++ci) {
        auto& ivs = intervals[ci];
        std::sort(ivs.begin(), ivs.end());
        for (std::size_t i = 0; i < ivs.size(); ++i) {
            std::size_t start = ivs[i].first, end = ivs[i].second;
            while (i + 1 < ivs.size() && ivs[i + 1].first <= end) {
                end = std::max(end, ivs[i + 1].second);
                ++i;
            }
            result.spans.push_back(
                {start, end, static_cast<PhiCategory>(ci), Provenance::VENDOR});
        }
    }
    std::stable_sort(result.spans.begin(), result.spans.end(),
                     [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    return result;
}

namespace {

// unit_offsets[i] is the offset of code point i in the vendor's unit (bytes
// or UTF-16 code units); converts one unit offset back to a code point
// index, requiring it to land on a code point boundary.
std::size_t unit_to_cp(const std::vector<std::size_t>& unit_offsets, std::size_t unit,
                       const char* what) {
    auto it = std::lower_bound(unit_offsets.begin(), unit_offsets.end(), unit);
    if (it == unit_offsets.end() || *it != unit)
        throw std::runtime_error(std::string(what) + " offset " + std::to_string(unit) +
                                 " is out of range or not a code point boundary");
    return static_cast<std::size_t>(it - unit_offsets.begin());
}

void check_span(const VendorSpan& s, std::size_t text_len) {
    if (s.start >= s.end || s.end > text_len)
        throw std::runtime_error("vendor span [" + std::to_string(s.start) + "," +
                                 std::to_string(s.end) + ") out of range for text of length " +
                                 std::to_string(text_len));
}

std::size_t json_offset(const nlohmann::json& v) {
    // GCP serializes int64 fields as strings.
    if (v.is_string()) return static_cast<std::size_t>(std::stoull(v.get<std::string>()));
    long long n = v.get<long long>();
    if (n < 0) throw std::runtime_error("negative offset in vendor response");
    return static_cast<std::size_t>(n);
}

}  // namespace

std::vector<VendorSpan> parse_gcp_response(const std::string& body, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed GCP response: ") + e.what());
    }
    std::vector<VendorSpan> spans;
    const std::size_t len = utf8::count_codepoints(text);
    if (!j.contains("result")) throw std::runtime_error("malformed GCP response: missing 'result'");
    for (const auto& f : j["result"].value("findings", nlohmann::json::array())) {
        VendorSpan s;
        s.label = f.at("infoType").at("name").get<std::string>();
        const auto& range = f.at("location").at("codepointRange");
        s.start = json_offset(range.at("start"));
        s.end = json_offset(range.at("end"));
        check_span(s, len);
        spans.push_back(std::move(s));
    }
    return spans;
}

std::vector<VendorSpan> parse_aws_response(const std::string& body, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed AWS response: ") + e.what());
    }
    if (!j.contains("Entities") || !j["Entities"].is_array())
        throw std::runtime_error("malformed AWS response: missing 'Entities'");
    std::vector<std::size_t> byte_offs = utf8::byte_offsets(text);
    std::vector<VendorSpan> spans;
    const std::size_t len = byte_offs.size() - 1;
    for (const auto& e : j["Entities"]) {
        VendorSpan s;
        s.label = e.at("Type").get<std::string>();
        s.start = unit_to_cp(byte_offs, json_offset(e.at("BeginOffset")), "AWS byte");
        s.end = unit_to_cp(byte_offs, json_offset(e.at("EndOffset")), "AWS byte");
        if (e.contains("Score")) s.confidence = e["Score"].get<double>();
        check_span(s, len);
        spans.push_back(std::move(s));
    }
    return spans;
}

std::vector<VendorSpan> parse_azure_response(const std::string& body, const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed Azure response: ") + e.what());
    }
    if (!j.contains("entities") || !j["entities"].is_array())
        throw std::runtime_error("malformed Azure response: missing 'entities'");
    std::vector<std::size_t> u16_offs = utf8::utf16_offsets(text);
    std::vector<VendorSpan> spans;
    const std::size_t len = u16_offs.size() - 1;
    for (const auto& e : j["entities"]) {
        VendorSpan s;
        s.label = e.at("category").get<std::string>();
        std::size_t offset = json_offset(e.at("offset"));
        std::size_t length = json_offset(e.at("length"));
        s.start = unit_to_cp(u16_offs, offset, "Azure UTF-16");
        s.end = unit_to_cp(u16_offs, offset + length, "Azure UTF-16");
        if (e.contains("confidenceScore")) s.confidence = e["confidenceScore"].get<double>();
        check_span(s, len);
        spans.push_back(std::move(s));
    }
    return spans;
}

EvalReport evaluate_vendor(const Corpus& deid_corpus,
                           const std::map<std::string, std::vector<VendorSpan>>& spans_by_report,
                           const VendorMapping& mapping) {
    for (const auto& [id, _] : spans_by_report) {
        if (std::none_of(deid_corpus.reports.begin(), deid_corpus.reports.end(),
                         [&](const AnnotatedReport& r) { return r.id == id; }))
            throw std::invalid_argument("vendor spans for unknown report '" + id + "'");
    }

    const auto image = mapping.image();
    const auto groups = mapping.dual_groups();
    auto group_of = [&](PhiCategory c) -> const std::vector<PhiCategory>* {
        for (const auto& g : groups)
            if (std::find(g.begin(), g.end(), c) != g.end()) return &g;
        return nullptr;
    };

    // Per-category counts; dual-group counts are shared by their members.
    ClassCounts counts;
    Counts overall;
    std::array<Counts, kNumCategories> unit_counts{};  // indexed by representative

    for (const AnnotatedReport& report : deid_corpus.reports) {
        auto it = spans_by_report.find(report.id);
        if (it == spans_by_report.end())
            throw std::invalid_argument("missing vendor spans for report '" + report.id + "'");
        TokenSeq seq = tokenize(report.text);
        TokenLabels gold = spans_to_token_labels(report.spans_with(Provenance::SYNTHETIC), seq);
        HarmonizeResult harmonized = harmonize(it->second, mapping);

        // Per-token predicted category sets.
        std::vector<std::array<bool, kNumCategories>> pred(seq.size());
        for (auto& p : pred) p.fill(false);
        for (const PhiSpan& s : harmonized.spans) {
            for (std::size_t ti = 0; ti < seq.size(); ++ti) {
                const Token& t = seq.tokens[ti];
                if (t.start < s.end && s.start < t.end)
                    pred[ti][static_cast<std::size_t>(s.category)] = true;
            }
        }

        auto count_unit = [&](const std::vector<PhiCategory>& cats, Counts& into) {
            for (std::size_t ti = 0; ti < seq.size(); ++ti) {
                bool p = false, g = false;
                for (PhiCategory c : cats) {
                    p = p || pred[ti][static_cast<std::size_t>(c)];
                    g = g || (gold[ti] && *gold[ti] == c);
                }
                if (p && g)
                    ++into.tp;
                else if (p)
                    ++into.fp;
                else if (g)
                    ++into.fn;
            }
        };

        for (PhiCategory c : image) {
            const auto* g = group_of(c);
            if (g && c != g->front()) continue;  // group counted at its representative
            count_unit(g ? *g : std::vector<PhiCategory>{c},
                       unit_counts[static_cast<std::size_t>(c)]);
        }
    }

    for (PhiCategory c : image) {
        const auto* g = group_of(c);
        PhiCategory rep = g ? g->front() : c;
        counts[c] = unit_counts[static_cast<std::size_t>(rep)];
        if (!g || c == rep) overall += unit_counts[static_cast<std::size_t>(rep)];
    }

    EvalReport report = summarize_with_overall(counts, overall);
    for (PhiCategory c : kAllCategories)
        if (std::find(image.begin(), image.end(), c) == image.end())
            report.for_category(c).present = false;
    return report;
}

}  // namespace deid
