#include "deid/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "deid/segment.hpp"
#include "deid/utf8.hpp"
#include "json.hpp"

namespace deid {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "AGE", "DATE", "HCW", "HOSPITAL", "ID", "PATIENT", "PHONE", "VENDOR"};

constexpr std::array<std::string_view, 4> kProvenanceNames = {"GOLD", "PREDICTED", "SYNTHETIC",
                                                              "VENDOR"};

}  // namespace

std::string_view to_string(PhiCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<PhiCategory> category_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kNumCategories; ++i)
        if (kCategoryNames[i] == s) return static_cast<PhiCategory>(i);
    return std::nullopt;
}

std::string_view to_string(Provenance p) {
    return kProvenanceNames[static_cast<std::size_t>(p)];
}

std::optional<Provenance> provenance_from_string(std::string_view s) {
    for (std::size_t i = 0; i < kProvenanceNames.size(); ++i)
        if (kProvenanceNames[i] == s) return static_cast<Provenance>(i);
    return std::nullopt;
}

std::vector<PhiSpan> AnnotatedReport::spans_with(Provenance p) const {
    std::vector<PhiSpan> out;
    for (const auto& s : spans)
        if (s.provenance == p) out.push_back(s);
    std::sort(out.begin(), out.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    return out;
}

std::vector<std::string> validate_report(const AnnotatedReport& report) {
    std::vector<std::string> violations;
    if (report.id.empty()) violations.push_back("id: must be non-empty");
    const std::size_t len = utf8::count_codepoints(report.text);
    for (std::size_t i = 0; i < report.spans.size(); ++i) {
        const auto& s = report.spans[i];
        if (s.start >= s.end)
            violations.push_back("spans[" + std::to_string(i) + "]: start < end violated");
        if (s.end > len)
            violations.push_back("spans[" + std::to_string(i) +
                                 "]: end exceeds text length " + std::to_string(len));
    }
    // Overlap check per provenance.
    for (Provenance p : {Provenance::GOLD, Provenance::PREDICTED, Provenance::SYNTHETIC,
                         Provenance::VENDOR}) {
        std::vector<const PhiSpan*> same;
        for (const auto& s : report.spans)
            if (s.provenance == p) same.push_back(&s);
        std::sort(same.begin(), same.end(),
                  [](const PhiSpan* a, const PhiSpan* b) { return a->start < b->start; });
        for (std::size_t i = 1; i < same.size(); ++i) {
            if (same[i]->start < same[i - 1]->end) {
                violations.push_back(std::string("spans: overlapping ") +
                                     std::string(to_string(p)) + " spans at [" +
                                     std::to_string(same[i - 1]->start) + "," +
                                     std::to_string(same[i - 1]->end) + ") and [" +
                                     std::to_string(same[i]->start) + "," +
                                     std::to_string(same[i]->end) + ")");
            }
        }
    }
    return violations;
}

namespace {

using json = nlohmann::ordered_json;

PhiSpan span_from_json(const json& j) {
    PhiSpan s;
    if (!j.contains("start") || !j.contains("end") || !j.contains("category") ||
        !j.contains("provenance"))
        throw std::runtime_error("span missing required field");
    if (j["start"].get<long long>() < 0 || j["end"].get<long long>() < 0)
        throw std::runtime_error("span offsets must be non-negative");
    s.start = j["start"].get<std::size_t>();
    s.end = j["end"].get<std::size_t>();
    auto cat = category_from_string(j["category"].get<std::string>());
    if (!cat) throw std::runtime_error("unknown category '" + j["category"].get<std::string>() + "'");
    s.category = *cat;
    auto prov = provenance_from_string(j["provenance"].get<std::string>());
    if (!prov)
        throw std::runtime_error("unknown provenance '" + j["provenance"].get<std::string>() + "'");
    s.provenance = *prov;
    return s;
}

json span_to_json(const PhiSpan& s) {
    json j;
    j["start"] = s.start;
    j["end"] = s.end;
    j["category"] = std::string(to_string(s.category));
    j["provenance"] = std::string(to_string(s.provenance));
    return j;
}

void sort_spans(std::vector<PhiSpan>& spans) {
    std::stable_sort(spans.begin(), spans.end(), [](const PhiSpan& a, const PhiSpan& b) {
        if (a.start != b.start) return a.start < b.start;
        if (a.end != b.end) return a.end < b.end;
        return static_cast<int>(a.provenance) < static_cast<int>(b.provenance);
    });
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path.string());
    Corpus corpus;
    corpus.name = path.stem().string();
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> seen_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": malformed JSON: " + e.what());
        }
        AnnotatedReport r;
        try {
            r.id = j.at("id").get<std::string>();
            r.text = j.at("text").get<std::string>();
            const json spans = j.value("spans", json::array());
            for (const auto& js : spans) r.spans.push_back(span_from_json(js));
            const json metadata = j.value("metadata", json::object());
            for (const auto& [k, v] : metadata.items()) r.metadata[k] = v.get<std::string>();
        } catch (const std::exception& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        sort_spans(r.spans);
        auto violations = validate_report(r);
        if (!violations.empty())
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": report '" +
                                     r.id + "': " + violations.front());
        if (auto [it, inserted] = seen_ids.emplace(r.id, line_no); !inserted)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": duplicate report id '" + r.id + "' (first at line " +
                                     std::to_string(it->second) + ")");
        corpus.reports.push_back(std::move(r));
    }
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open output file: " + path.string());
    for (const auto& r : corpus.reports) {
        json j;
        j["id"] = r.id;
        j["text"] = r.text;
        auto spans = r.spans;
        sort_spans(spans);
        j["spans"] = json::array();
        for (const auto& s : spans) j["spans"].push_back(span_to_json(s));
        j["metadata"] = json::object();
        for (const auto& [k, v] : r.metadata) j["metadata"][k] = v;
        out << j.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failure: " + path.string());
}

std::size_t TokenClassCounts::total() const {
    std::size_t t = non_phi;
    for (auto c : phi) t += c;
    return t;
}

TokenClassCounts count_tokens_by_class(const Corpus& corpus, Provenance provenance) {
    TokenClassCounts counts;
    for (const auto& report : corpus.reports) {
        TokenSeq seq = tokenize(report.text);
        auto spans = report.spans_with(provenance);
        TokenLabels labels = spans_to_token_labels(spans, seq);
        for (const Label& l : labels) {
            if (l)
                ++counts.phi[static_cast<std::size_t>(*l)];
            else
                ++counts.non_phi;
        }
    }
    return counts;
}

}  // namespace deid
