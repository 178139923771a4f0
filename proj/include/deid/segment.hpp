#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "deid/corpus.hpp"

namespace deid {

struct Token {
    std::size_t start = 0;  // code point offsets into the source text
    std::size_t end = 0;
    std::string text;

    bool operator==(const Token&) const = default;
};

struct TokenSeq {
    std::vector<Token> tokens;
    std::size_t source_length = 0;  // code points

    std::size_t size() const { return tokens.size(); }
    bool operator==(const TokenSeq&) const = default;
};

// Half-open token index range plus the covered character range.
struct Chunk {
    std::size_t first_token = 0;
    std::size_t last_token = 0;
    std::size_t char_start = 0;
    std::size_t char_end = 0;
    bool hard_split = false;  // oversized-sentence fallback

    std::size_t token_count() const { return last_token - first_token; }
    bool operator==(const Chunk&) const = default;
};

// Per-token class labels, same length as the TokenSeq they annotate.
using TokenLabels = std::vector<Label>;

// Tokens are maximal runs of letters/digits or single punctuation marks;
// whitespace never appears inside a token. Deterministic.
TokenSeq tokenize(const std::string& text);

// Sentence-end code point offsets, strictly increasing; the final offset
// always equals the text length. A sentence ends after '.', '!' or '?'
// followed by whitespace or end-of-text, and after every newline.
std::vector<std::size_t> split_sentences(const std::string& text);

// Greedy sentence packing into chunks of at most max_len tokens. A single
// sentence longer than max_len is hard-split at max_len-token intervals.
std::vector<Chunk> chunk_tokens(const TokenSeq& tokens,
                                const std::vector<std::size_t>& sentence_ends,
                                std::size_t max_len);

// Concatenates per-chunk labels back into one sequence; throws naming the
// chunk index on a length mismatch.
TokenLabels reconstruct_labels(const std::vector<Chunk>& chunks,
                               const std::vector<TokenLabels>& per_chunk_labels);

// A token is labeled c iff its range intersects a span of category c.
// Spans must be non-overlapping; throws otherwise.
TokenLabels spans_to_token_labels(std::span<const PhiSpan> spans, const TokenSeq& tokens);

// Maximal runs of identical non-O labels become one span from the first
// token's start to the last token's end.
std::vector<PhiSpan> token_labels_to_spans(const TokenLabels& labels, const TokenSeq& tokens,
                                           Provenance provenance);

}  // namespace deid
