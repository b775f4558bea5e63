#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lorag/error.hpp"

namespace lorag {

// Lowercased, punctuation-trimmed tokens in source order.
using TokenSeq = std::vector<std::string>;

struct Document {
    std::string id;
    std::string text;
    std::map<std::string, std::string> meta;

    bool operator==(const Document&) const = default;
};

struct Sentence {
    std::string doc_id;
    std::size_t index = 0;
    std::string text;
    TokenSeq tokens;

    bool operator==(const Sentence&) const = default;
};

class IngestError : public Error {
public:
    using Error::Error;
};

/// Lowercase, split on Unicode whitespace, strip edge punctuation from each
/// token and drop tokens that end up empty. Interior punctuation survives, so
/// "state-of-the-art" stays one token.
TokenSeq tokenize(std::string_view text);

/// Joins tokens with a single ASCII space.
std::string join_tokens(const TokenSeq& tokens);

// True when the text holds nothing but Unicode whitespace.
bool is_blank(std::string_view text);

/// Splits on '.', '!' or '?' when followed by whitespace or end of text. The
/// terminator is dropped and each sentence is trimmed; empty pieces vanish.
std::vector<Sentence> split_sentences(const Document& doc);

/// An immutable, tokenized document collection. Document order is the order
/// of insertion (file line order for ingested corpora).
class Corpus {
public:
    Corpus() = default;

    /// Validates and appends; throws IngestError on empty/duplicate id or
    /// whitespace-only text.
    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool empty() const { return docs_.empty(); }

    const Document& doc(std::size_t i) const { return docs_.at(i); }
    const TokenSeq& tokens(std::size_t i) const { return tokens_.at(i); }
    const std::vector<Sentence>& sentences(std::size_t i) const { return sentences_.at(i); }
    const std::vector<Document>& documents() const { return docs_; }

    std::optional<std::size_t> find(std::string_view id) const;

private:
    std::vector<Document> docs_;
    std::vector<TokenSeq> tokens_;
    std::vector<std::vector<Sentence>> sentences_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

/// Parses UTF-8 JSONL (`id`, `text`, optional `meta`). Blank lines are
/// skipped; any other malformed line aborts with its 1-based line number.
Corpus ingest(const std::filesystem::path& path);
Corpus parse_corpus(std::string_view jsonl, std::string_view source_name = "<memory>");

/// Serializes in the same JSONL format `ingest` reads.
std::string corpus_to_jsonl(const Corpus& corpus);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

}  // namespace lorag
