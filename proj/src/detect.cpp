#include "deid/detect.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "deid/segment.hpp"
#include "deid/utf8.hpp"
#include "httplib.h"
#include "json.hpp"

namespace deid {

int category_priority(PhiCategory c) {
    switch (c) {
        case PhiCategory::ID: return 0;
        case PhiCategory::PHONE: return 1;
        case PhiCategory::DATE: return 2;
        case PhiCategory::AGE: return 3;
        case PhiCategory::PATIENT: return 4;
        case PhiCategory::HCW: return 5;
        case PhiCategory::HOSPITAL: return 6;
        case PhiCategory::VENDOR: return 7;
    }
    return 8;
}

RuleSet::RuleSet(std::vector<Rule> rules, std::map<std::string, std::vector<std::string>> lexicons)
    : rules_(std::move(rules)), lexicons_(std::move(lexicons)) {
    for (const auto& [name, entries] : lexicons_)
        if (entries.empty()) throw std::invalid_argument("lexicon '" + name + "' is empty");
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        if (const auto* p = std::get_if<PatternRule>(&rules_[i])) {
            try {
                compiled_.emplace(i, std::regex(p->pattern, std::regex::ECMAScript));
            } catch (const std::regex_error& e) {
                throw std::invalid_argument("rule " + std::to_string(i) + ": bad pattern '" +
                                            p->pattern + "': " + e.what());
            }
        } else {
            const auto& l = std::get<LexiconRule>(rules_[i]);
            if (!lexicons_.count(l.lexicon))
                throw std::invalid_argument("rule " + std::to_string(i) +
                                            ": unknown lexicon '" + l.lexicon + "'");
        }
    }
}

RuleSet RuleSet::from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    std::vector<Rule> rules;
    for (const auto& jr : j.at("rules")) {
        auto cat = category_from_string(jr.at("category").get<std::string>());
        if (!cat)
            throw std::invalid_argument("unknown category '" +
                                        jr.at("category").get<std::string>() + "'");
        if (jr.contains("pattern")) {
            rules.push_back(PatternRule{*cat, jr["pattern"].get<std::string>()});
        } else if (jr.contains("lexicon")) {
            LexiconRule lr{*cat, jr["lexicon"].get<std::string>(), std::nullopt};
            if (jr.contains("context_before") && !jr["context_before"].is_null())
                lr.context_before = jr["context_before"].get<std::string>();
            rules.push_back(lr);
        } else {
            throw std::invalid_argument("rule needs 'pattern' or 'lexicon'");
        }
    }
    std::map<std::string, std::vector<std::string>> lexicons;
    const nlohmann::json lex_json = j.value("lexicons", nlohmann::json::object());
    for (const auto& [name, entries] : lex_json.items())
        lexicons[name] = entries.get<std::vector<std::string>>();
    return RuleSet(std::move(rules), std::move(lexicons));
}

RuleSet RuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open rule file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

namespace {

struct Candidate {
    std::size_t start, end;
    PhiCategory category;
    std::size_t rule_index;
};

bool is_word_cp(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
           c >= 0x80;
}

bool is_space_cp(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

// The nearest word run strictly before cp_pos, skipping whitespace and
// punctuation; empty if none.
std::u32string preceding_word(const std::u32string& cps, std::size_t cp_pos) {
    std::size_t i = cp_pos;
    while (i > 0 && (is_space_cp(cps[i - 1]) || !is_word_cp(cps[i - 1]))) --i;
    std::size_t end = i;
    while (i > 0 && is_word_cp(cps[i - 1])) --i;
    return cps.substr(i, end - i);
}

void collect_pattern_matches(const std::string& text, const std::vector<std::size_t>& byte_offs,
                             const std::regex& re, PhiCategory cat, std::size_t rule_index,
                             std::vector<Candidate>& out) {
    auto cp_of_byte = [&](std::size_t byte) {
        auto it = std::lower_bound(byte_offs.begin(), byte_offs.end(), byte);
        return static_cast<std::size_t>(it - byte_offs.begin());
    };
    auto begin = std::sregex_iterator(text.begin(), text.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
        if (it->length(0) == 0) continue;
        std::size_t b0 = static_cast<std::size_t>(it->position(0));
        std::size_t b1 = b0 + static_cast<std::size_t>(it->length(0));
        out.push_back({cp_of_byte(b0), cp_of_byte(b1), cat, rule_index});
    }
}

void collect_lexicon_matches(const std::u32string& cps, const LexiconRule& rule,
                             const std::vector<std::string>& entries, std::size_t rule_index,
                             std::vector<Candidate>& out) {
    for (const auto& entry : entries) {
        std::u32string needle = utf8::decode(entry);
        if (needle.empty()) continue;
        std::size_t pos = 0;
        while ((pos = cps.find(needle, pos)) != std::u32string::npos) {
            std::size_t end = pos + needle.size();
            bool left_ok = pos == 0 || !is_word_cp(cps[pos - 1]) || !is_word_cp(needle.front());
            bool right_ok = end == cps.size() || !is_word_cp(cps[end]) || !is_word_cp(needle.back());
            if (left_ok && right_ok) {
                bool ctx_ok = true;
                if (rule.context_before) {
                    ctx_ok = preceding_word(cps, pos) == utf8::decode(*rule.context_before);
                }
                if (ctx_ok) out.push_back({pos, end, rule.category, rule_index});
            }
            ++pos;
        }
    }
}

}  // namespace

std::vector<PhiSpan> rule_detect(const std::string& text, const RuleSet& rules) {
    std::u32string cps = utf8::decode(text);
    std::vector<std::size_t> byte_offs = utf8::byte_offsets(text);
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < rules.rules().size(); ++i) {
        if (const auto* p = std::get_if<PatternRule>(&rules.rules()[i])) {
            collect_pattern_matches(text, byte_offs, rules.compiled(i), p->category, i, candidates);
        } else {
            const auto& l = std::get<LexiconRule>(rules.rules()[i]);
            collect_lexicon_matches(cps, l, rules.lexicons().at(l.lexicon), i, candidates);
        }
    }
    // Longest match first, then category priority, then earliest rule.
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        std::size_t la = a.end - a.start, lb = b.end - b.start;
        if (la != lb) return la > lb;
        int pa = category_priority(a.category), pb = category_priority(b.category);
        if (pa != pb) return pa < pb;
        if (a.rule_index != b.rule_index) return a.rule_index < b.rule_index;
        return a.start < b.start;
    });
    std::vector<PhiSpan> chosen;
    for (const Candidate& c : candidates) {
        bool overlaps = std::any_of(chosen.begin(), chosen.end(), [&](const PhiSpan& s) {
            return c.start < s.end && s.start < c.end;
        });
        if (!overlaps)
            chosen.push_back({c.start, c.end, c.category, Provenance::PREDICTED});
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    return chosen;
}

namespace {

// Splits "http://host:port/prefix" into client base and path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    std::size_t scheme = base_url.find("://");
    std::size_t path_start =
        base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) return {base_url, ""};
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {base_url.substr(0, path_start), prefix};
}

}  // namespace

std::vector<PhiSpan> remote_detect(const std::string& text, const RemoteEndpoint& endpoint) {
    if (endpoint.timeout_ms <= 0) throw std::invalid_argument("endpoint timeout must be > 0");
    auto [host, prefix] = split_base_url(endpoint.base_url);
    httplib::Client client(host);
    client.set_connection_timeout(0, endpoint.timeout_ms * 1000);
    client.set_read_timeout(endpoint.timeout_ms / 1000, (endpoint.timeout_ms % 1000) * 1000);

    nlohmann::json request{{"text", text}};
    std::string body = request.dump();
    httplib::Result res;
    std::string last_error;
    for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
        if (attempt > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(50 << (attempt - 1)));
        res = client.Post(prefix + "/detect", body, "application/json");
        if (res && res->status == 200) break;
        last_error = res ? "HTTP " + std::to_string(res->status)
                         : "transport: " + httplib::to_string(res.error());
    }
    if (!res || res->status != 200)
        throw std::runtime_error("remote detector failed after " +
                                 std::to_string(endpoint.max_retries + 1) + " attempts: " +
                                 last_error);

    nlohmann::json j;
    try {
        j = nlohmann::json::parse(res->body);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("malformed remote detector response: ") + e.what());
    }
    if (!j.contains("spans") || !j["spans"].is_array())
        throw std::runtime_error("malformed remote detector response: missing 'spans'");

    const std::size_t len = utf8::count_codepoints(text);
    std::vector<PhiSpan> spans;
    for (const auto& js : j["spans"]) {
        long long start = js.at("start").get<long long>();
        long long end = js.at("end").get<long long>();
        auto cat = category_from_string(js.at("category").get<std::string>());
        if (!cat)
            throw std::runtime_error("remote span has unknown category '" +
                                     js.at("category").get<std::string>() + "'");
        if (start < 0 || start >= end || static_cast<std::size_t>(end) > len)
            throw std::runtime_error("remote span [" + std::to_string(start) + "," +
                                     std::to_string(end) + ") violates bounds for text of length " +
                                     std::to_string(len));
        spans.push_back({static_cast<std::size_t>(start), static_cast<std::size_t>(end), *cat,
                         Provenance::PREDICTED});
    }
    std::sort(spans.begin(), spans.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < spans.size(); ++i)
        if (spans[i].start < spans[i - 1].end)
            throw std::runtime_error("remote detector returned overlapping spans");
    return spans;
}

Corpus detect_corpus(const Corpus& corpus, const Detector& detector, std::size_t max_len) {
    Corpus out = corpus;
    for (auto& report : out.reports) {
        try {
            TokenSeq seq = tokenize(report.text);
            std::vector<std::size_t> sentence_ends = split_sentences(report.text);
            std::vector<Chunk> chunks = chunk_tokens(seq, sentence_ends, max_len);

            std::vector<TokenLabels> per_chunk;
            per_chunk.reserve(chunks.size());
            for (const Chunk& chunk : chunks) {
                std::string chunk_text =
                    utf8::slice(report.text, chunk.char_start, chunk.char_end);
                std::vector<PhiSpan> local = detector.detect(chunk_text);
                // Shift chunk-relative offsets to document space and label
                // the chunk's tokens.
                TokenSeq chunk_tokens_seq;
                chunk_tokens_seq.source_length = seq.source_length;
                chunk_tokens_seq.tokens.assign(seq.tokens.begin() + chunk.first_token,
                                               seq.tokens.begin() + chunk.last_token);
                for (auto& s : local) {
                    s.start += chunk.char_start;
                    s.end += chunk.char_start;
                }
                per_chunk.push_back(spans_to_token_labels(local, chunk_tokens_seq));
            }
            TokenLabels labels = reconstruct_labels(chunks, per_chunk);
            std::vector<PhiSpan> predicted = token_labels_to_spans(labels, seq, Provenance::PREDICTED);

            std::erase_if(report.spans,
                          [](const PhiSpan& s) { return s.provenance == Provenance::PREDICTED; });
            report.spans.insert(report.spans.end(), predicted.begin(), predicted.end());
            std::stable_sort(report.spans.begin(), report.spans.end(),
                             [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
        } catch (const std::exception& e) {
            throw std::runtime_error("report '" + report.id + "': " + e.what());
        }
    }
    return out;
}

}  // namespace deid
