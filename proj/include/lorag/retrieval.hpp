#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lorag/corpus.hpp"
#include "lorag/error.hpp"

namespace lorag {

class RetrievalError : public Error {
public:
    using Error::Error;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

struct Posting {
    std::uint32_t doc;  // position in the corpus
    std::uint32_t tf;

    bool operator==(const Posting&) const = default;
};

/// Inverted index over a corpus plus the per-document statistics BM25 needs.
/// Owns a copy of the corpus so retrieved passages can carry sentences.
/// Immutable once built; concurrent reads are safe.
class Index {
public:
    /// Throws RetrievalError on an empty corpus.
    static Index build(Corpus corpus);

    /// Reads `docs.jsonl`, `postings.json` and `stats.json` from `dir`.
    static Index load(const std::filesystem::path& dir);
    void save(const std::filesystem::path& dir) const;

    const Corpus& corpus() const { return corpus_; }
    std::size_t doc_count() const { return doc_lengths_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    std::uint32_t doc_length(std::size_t doc) const { return doc_lengths_.at(doc); }
    const std::vector<std::uint32_t>& doc_lengths() const { return doc_lengths_; }

    std::size_t term_count() const { return terms_.size(); }
    const std::string& term(std::uint32_t id) const { return terms_.at(id); }
    std::optional<std::uint32_t> term_id(std::string_view term) const;
    const std::vector<Posting>& postings(std::uint32_t id) const { return postings_.at(id); }

    // Term frequency of `term` in `doc`, via the forward index.
    std::uint32_t tf(std::size_t doc, std::uint32_t term) const;

private:
    Index() = default;
    void finish();

    Corpus corpus_;
    std::vector<std::string> terms_;  // sorted; position is the term id
    std::unordered_map<std::string, std::uint32_t> term_ids_;
    std::vector<std::vector<Posting>> postings_;
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> forward_;
    std::vector<std::uint32_t> doc_lengths_;
    double avg_doc_length_ = 0.0;
};

inline Index build_index(Corpus corpus) { return Index::build(std::move(corpus)); }

struct Passage {
    std::string doc_id;
    double score = 0.0;
    std::vector<Sentence> sentences;

    bool operator==(const Passage&) const = default;
};

/// The context set handed to the generator: a ranked, duplicate-free list of
/// scored documents. `output_terms` and `w_y` are only set for joint queries.
struct RetrievedContext {
    TokenSeq query_terms;
    TokenSeq output_terms;
    double w_y = 0.0;
    std::size_t k = 0;
    std::vector<Passage> passages;

    bool empty() const { return passages.empty(); }
    bool operator==(const RetrievedContext&) const = default;
};

/// Unique known query terms as term ids, ascending. Every scorer sums
/// contributions in this order so the parallel and serial kernels agree
/// bit for bit.
std::vector<std::uint32_t> query_term_ids(const Index& index, const TokenSeq& query);

double bm25_idf(std::size_t doc_count, std::size_t df);

/// Okapi BM25 of one document; unknown doc ids throw RetrievalError.
double bm25_score(const Index& index, const TokenSeq& query, std::string_view doc_id,
                  const Bm25Params& params = {});

/// Scores every document (OpenMP over doc-range blocks of the postings lists).
std::vector<double> score_documents(const Index& index, const TokenSeq& query,
                                    const Bm25Params& params = {});

/// Term-at-a-time accumulation over postings. Reference for score_documents.
std::vector<double> score_documents_serial(const Index& index, const TokenSeq& query,
                                           const Bm25Params& params = {});

/// Top-k positive scores, ties broken by ascending doc id.
RetrievedContext retrieve(const Index& index, const TokenSeq& x, std::size_t k,
                          const Bm25Params& params = {});

/// Ranks by bm25(x) + w_y * bm25(y_t).
RetrievedContext retrieve_joint(const Index& index, const TokenSeq& x, const TokenSeq& y_t,
                                double w_y, std::size_t k, const Bm25Params& params = {});

/// The retrieval mechanism as seen by the loop controller.
class Retriever {
public:
    virtual ~Retriever() = default;
    virtual RetrievedContext retrieve(const TokenSeq& x, std::size_t k) const = 0;
    virtual RetrievedContext retrieve_joint(const TokenSeq& x, const TokenSeq& y_t, double w_y,
                                            std::size_t k) const = 0;
};

class Bm25Retriever final : public Retriever {
public:
    explicit Bm25Retriever(const Index& index, Bm25Params params = {})
        : index_(index), params_(params) {}

    RetrievedContext retrieve(const TokenSeq& x, std::size_t k) const override {
        return lorag::retrieve(index_, x, k, params_);
    }
    RetrievedContext retrieve_joint(const TokenSeq& x, const TokenSeq& y_t, double w_y,
                                    std::size_t k) const override {
        return lorag::retrieve_joint(index_, x, y_t, w_y, k, params_);
    }

    const Index& index() const { return index_; }
    const Bm25Params& params() const { return params_; }

private:
    const Index& index_;
    Bm25Params params_;
};

}  // namespace lorag
