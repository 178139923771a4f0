#include "deid/segment.hpp"

#include <algorithm>
#include <stdexcept>

#include "deid/utf8.hpp"

namespace deid {

namespace {

bool is_space(char32_t c) {
    return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\f' || c == U'\v';
}

// Non-ASCII code points are treated as word characters.
bool is_word(char32_t c) {
    return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') ||
           c >= 0x80;
}

}  // namespace

TokenSeq tokenize(const std::string& text) {
    std::u32string cps = utf8::decode(text);
    TokenSeq seq;
    seq.source_length = cps.size();
    std::size_t i = 0;
    while (i < cps.size()) {
        if (is_space(cps[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_word(cps[i])) {
            while (i < cps.size() && is_word(cps[i])) ++i;
        } else {
            ++i;  // single punctuation mark
        }
        seq.tokens.push_back({start, i, utf8::encode(cps.substr(start, i - start))});
    }
    return seq;
}

std::vector<std::size_t> split_sentences(const std::string& text) {
    std::u32string cps = utf8::decode(text);
    std::vector<std::size_t> ends;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t c = cps[i];
        if (c == U'\n') {
            ends.push_back(i + 1);
        } else if (c == U'.' || c == U'!' || c == U'?') {
            if (i + 1 == cps.size() || is_space(cps[i + 1])) ends.push_back(i + 1);
        }
    }
    if (ends.empty() || ends.back() != cps.size()) ends.push_back(cps.size());
    return ends;
}

std::vector<Chunk> chunk_tokens(const TokenSeq& tokens,
                                const std::vector<std::size_t>& sentence_ends,
                                std::size_t max_len) {
    if (max_len < 1) throw std::invalid_argument("max_len must be >= 1");
    std::vector<Chunk> chunks;
    if (tokens.tokens.empty()) return chunks;

    // Token index boundaries of sentences: for each sentence end offset, the
    // first token starting at or after it.
    std::vector<std::size_t> bounds;
    for (std::size_t e : sentence_ends) {
        std::size_t idx = std::lower_bound(tokens.tokens.begin(), tokens.tokens.end(), e,
                                           [](const Token& t, std::size_t off) {
                                               return t.start < off;
                                           }) -
                          tokens.tokens.begin();
        if (idx > 0 && (bounds.empty() || idx > bounds.back())) bounds.push_back(idx);
    }
    if (bounds.empty() || bounds.back() != tokens.size()) bounds.push_back(tokens.size());

    auto close = [&](std::size_t first, std::size_t last, bool hard) {
        chunks.push_back({first, last, tokens.tokens[first].start, tokens.tokens[last - 1].end,
                          hard});
    };

    std::size_t chunk_first = 0;
    std::size_t sent_first = 0;
    for (std::size_t b : bounds) {
        std::size_t sent_len = b - sent_first;
        if (sent_len > max_len) {
            // Oversized sentence: flush what we have, then hard-split it.
            if (chunk_first < sent_first) close(chunk_first, sent_first, false);
            std::size_t pos = sent_first;
            while (pos < b) {
                std::size_t take = std::min(max_len, b - pos);
                close(pos, pos + take, true);
                pos += take;
            }
            chunk_first = b;
        } else if (b - chunk_first > max_len) {
            close(chunk_first, sent_first, false);
            chunk_first = sent_first;
        }
        sent_first = b;
    }
    if (chunk_first < tokens.size()) close(chunk_first, tokens.size(), false);
    return chunks;
}

TokenLabels reconstruct_labels(const std::vector<Chunk>& chunks,
                               const std::vector<TokenLabels>& per_chunk_labels) {
    if (chunks.size() != per_chunk_labels.size())
        throw std::invalid_argument("chunk count does not match label-list count");
    TokenLabels out;
    for (std::size_t i = 0; i < chunks.size(); ++i) {
        if (per_chunk_labels[i].size() != chunks[i].token_count())
            throw std::invalid_argument("chunk " + std::to_string(i) + ": expected " +
                                        std::to_string(chunks[i].token_count()) + " labels, got " +
                                        std::to_string(per_chunk_labels[i].size()));
        out.insert(out.end(), per_chunk_labels[i].begin(), per_chunk_labels[i].end());
    }
    return out;
}

TokenLabels spans_to_token_labels(std::span<const PhiSpan> spans, const TokenSeq& tokens) {
    std::vector<PhiSpan> sorted(spans.begin(), spans.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const PhiSpan& a, const PhiSpan& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i].start < sorted[i - 1].end)
            throw std::invalid_argument("overlapping spans passed to spans_to_token_labels");

    TokenLabels labels(tokens.size(), std::nullopt);
    std::size_t si = 0;
    for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
        const Token& t = tokens.tokens[ti];
        while (si < sorted.size() && sorted[si].end <= t.start) ++si;
        if (si < sorted.size() && sorted[si].start < t.end) labels[ti] = sorted[si].category;
    }
    return labels;
}

std::vector<PhiSpan> token_labels_to_spans(const TokenLabels& labels, const TokenSeq& tokens,
                                           Provenance provenance) {
    if (labels.size() != tokens.size())
        throw std::invalid_argument("label count does not match token count");
    std::vector<PhiSpan> spans;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (!labels[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < labels.size() && labels[j + 1] == labels[i]) ++j;
        spans.push_back(
            {tokens.tokens[i].start, tokens.tokens[j].end, *labels[i], provenance});
        i = j + 1;
    }
    return spans;
}

}  // namespace deid
