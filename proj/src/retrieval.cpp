#include "lorag/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace lorag {

using json = nlohmann::ordered_json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw RetrievalError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RetrievalError("cannot write " + path.string());
    out << body;
    if (!out) throw RetrievalError("failed writing " + path.string());
}

}  // namespace

Index Index::build(Corpus corpus) {
    if (corpus.empty()) throw RetrievalError("cannot build an index over an empty corpus");

    Index index;
    std::map<std::string, std::vector<Posting>> postings;
    index.doc_lengths_.reserve(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        const TokenSeq& tokens = corpus.tokens(d);
        std::map<std::string_view, std::uint32_t> counts;
        for (const auto& t : tokens) ++counts[t];
        for (const auto& [term, tf] : counts) {
            postings[std::string(term)].push_back({static_cast<std::uint32_t>(d), tf});
        }
        index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    }
    for (auto& [term, list] : postings) {
        index.terms_.push_back(term);
        index.postings_.push_back(std::move(list));
    }
    const double total = std::accumulate(index.doc_lengths_.begin(), index.doc_lengths_.end(), 0.0);
    index.avg_doc_length_ = total / static_cast<double>(index.doc_lengths_.size());
    index.corpus_ = std::move(corpus);
    index.finish();
    return index;
}

void Index::finish() {
    term_ids_.clear();
    term_ids_.reserve(terms_.size());
    forward_.assign(corpus_.size(), {});
    for (std::uint32_t t = 0; t < terms_.size(); ++t) {
        term_ids_.emplace(terms_[t], t);
        for (const Posting& p : postings_[t]) forward_[p.doc].emplace_back(t, p.tf);
    }
    // Term ids are visited in ascending order, so each forward list is sorted.
}

std::optional<std::uint32_t> Index::term_id(std::string_view term) const {
    auto it = term_ids_.find(std::string(term));
    if (it == term_ids_.end()) return std::nullopt;
    return it->second;
}

std::uint32_t Index::tf(std::size_t doc, std::uint32_t term) const {
    const auto& row = forward_.at(doc);
    auto it = std::lower_bound(row.begin(), row.end(), term,
                               [](const auto& entry, std::uint32_t t) { return entry.first < t; });
    if (it == row.end() || it->first != term) return 0;
    return it->second;
}

void Index::save(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    write_corpus(corpus_, dir / "docs.jsonl");

    json postings = json::object();
    for (std::uint32_t t = 0; t < terms_.size(); ++t) {
        json list = json::array();
        for (const Posting& p : postings_[t]) list.push_back(json::array({corpus_.doc(p.doc).id, p.tf}));
        postings[terms_[t]] = std::move(list);
    }
    write_file(dir / "postings.json", postings.dump() + "\n");

    json stats;
    json lengths = json::object();
    for (std::size_t d = 0; d < doc_lengths_.size(); ++d) lengths[corpus_.doc(d).id] = doc_lengths_[d];
    stats["doc_lengths"] = std::move(lengths);
    stats["doc_count"] = doc_lengths_.size();
    stats["avg_doc_length"] = avg_doc_length_;
    write_file(dir / "stats.json", stats.dump() + "\n");
}

Index Index::load(const std::filesystem::path& dir) {
    Index index;
    try {
        index.corpus_ = ingest(dir / "docs.jsonl");
    } catch (const IngestError& e) {
        throw RetrievalError(std::string("index corpus: ") + e.what());
    }
    const Corpus& corpus = index.corpus_;

    json stats;
    json postings;
    try {
        stats = json::parse(read_file(dir / "stats.json"));
        postings = json::parse(read_file(dir / "postings.json"));
    } catch (const json::exception& e) {
        throw RetrievalError("malformed index in " + dir.string() + ": " + e.what());
    }

    auto resolve = [&](const std::string& id) -> std::uint32_t {
        auto d = corpus.find(id);
        if (!d) throw RetrievalError("index references unknown document '" + id + "'");
        return static_cast<std::uint32_t>(*d);
    };

    try {
        const auto doc_count = stats.at("doc_count").get<std::size_t>();
        if (doc_count != corpus.size()) {
            throw RetrievalError("stats.json doc_count " + std::to_string(doc_count) +
                                 " does not match " + std::to_string(corpus.size()) + " documents");
        }
        index.doc_lengths_.assign(corpus.size(), 0);
        const json& lengths = stats.at("doc_lengths");
        if (lengths.size() != corpus.size()) throw RetrievalError("stats.json doc_lengths size mismatch");
        for (const auto& [id, len] : lengths.items()) index.doc_lengths_[resolve(id)] = len.get<std::uint32_t>();
        index.avg_doc_length_ = stats.at("avg_doc_length").get<double>();

        std::map<std::string, std::vector<Posting>> sorted;
        for (const auto& [term, list] : postings.items()) {
            std::vector<Posting> entries;
            entries.reserve(list.size());
            for (const json& e : list) {
                entries.push_back({resolve(e.at(0).get<std::string>()), e.at(1).get<std::uint32_t>()});
            }
            std::sort(entries.begin(), entries.end(),
                      [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
            sorted.emplace(term, std::move(entries));
        }
        for (auto& [term, list] : sorted) {
            index.terms_.push_back(term);
            index.postings_.push_back(std::move(list));
        }
    } catch (const json::exception& e) {
        throw RetrievalError("malformed index in " + dir.string() + ": " + e.what());
    }
    if (!(index.avg_doc_length_ > 0.0)) throw RetrievalError("stats.json avg_doc_length must be positive");
    index.finish();
    return index;
}

std::vector<std::uint32_t> query_term_ids(const Index& index, const TokenSeq& query) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : query) {
        if (auto id = index.term_id(t)) ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

double bm25_idf(std::size_t doc_count, std::size_t df) {
    const double n = static_cast<double>(doc_count);
    const double f = static_cast<double>(df);
    return std::log(1.0 + (n - f + 0.5) / (f + 0.5));
}

namespace {

inline double term_weight(double idf, std::uint32_t tf, std::uint32_t len, double avg_len,
                          const Bm25Params& p) {
    const double f = static_cast<double>(tf);
    const double norm = 1.0 - p.b + p.b * static_cast<double>(len) / avg_len;
    return idf * (f * (p.k1 + 1.0)) / (f + p.k1 * norm);
}

std::vector<double> idfs_for(const Index& index, const std::vector<std::uint32_t>& terms) {
    std::vector<double> idf;
    idf.reserve(terms.size());
    for (auto t : terms) idf.push_back(bm25_idf(index.doc_count(), index.postings(t).size()));
    return idf;
}

double score_one(const Index& index, std::size_t doc, const std::vector<std::uint32_t>& terms,
                 const std::vector<double>& idf, const Bm25Params& params) {
    double score = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const std::uint32_t tf = index.tf(doc, terms[i]);
        if (tf == 0) continue;
        score += term_weight(idf[i], tf, index.doc_length(doc), index.avg_doc_length(), params);
    }
    return score;
}

}  // namespace

double bm25_score(const Index& index, const TokenSeq& query, std::string_view doc_id,
                  const Bm25Params& params) {
    auto doc = index.corpus().find(doc_id);
    if (!doc) throw RetrievalError("unknown document id '" + std::string(doc_id) + "'");
    const auto terms = query_term_ids(index, query);
    return score_one(index, *doc, terms, idfs_for(index, terms), params);
}

std::vector<double> score_documents(const Index& index, const TokenSeq& query,
                                    const Bm25Params& params) {
    const auto terms = query_term_ids(index, query);
    const auto idf = idfs_for(index, terms);
    const std::size_t n = index.doc_count();
    std::vector<double> scores(n, 0.0);
    if (terms.empty()) return scores;
    // Each block owns a doc range and walks the postings slice inside it, term by term.
    constexpr std::size_t kBlock = 4096;
    const auto blocks = static_cast<std::int64_t>((n + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < blocks; ++b) {
        const auto lo = static_cast<std::uint32_t>(static_cast<std::size_t>(b) * kBlock);
        const auto hi = static_cast<std::uint32_t>(std::min(n, static_cast<std::size_t>(b + 1) * kBlock));
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const auto& list = index.postings(terms[i]);
            auto it = std::lower_bound(list.begin(), list.end(), lo,
                                       [](const Posting& p, std::uint32_t d) { return p.doc < d; });
            for (; it != list.end() && it->doc < hi; ++it) {
                scores[it->doc] += term_weight(idf[i], it->tf, index.doc_length(it->doc), index.avg_doc_length(), params);
            }
        }
    }
    return scores;
}

std::vector<double> score_documents_serial(const Index& index, const TokenSeq& query,
                                           const Bm25Params& params) {
    const auto terms = query_term_ids(index, query);
    const auto idf = idfs_for(index, terms);
    std::vector<double> scores(index.doc_count(), 0.0);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (const Posting& p : index.postings(terms[i])) {
            scores[p.doc] += term_weight(idf[i], p.tf, index.doc_length(p.doc), index.avg_doc_length(), params);
        }
    }
    return scores;
}

namespace {

RetrievedContext rank(const Index& index, const std::vector<double>& scores, std::size_t k) {
    if (k == 0) throw RetrievalError("retrieval depth k must be at least 1");
    std::vector<std::size_t> hits;
    for (std::size_t d = 0; d < scores.size(); ++d) {
        if (scores[d] > 0.0) hits.push_back(d);
    }
    const Corpus& corpus = index.corpus();
    auto before = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return corpus.doc(a).id < corpus.doc(b).id;
    };
    const std::size_t take = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(), before);
    hits.resize(take);

    RetrievedContext ctx;
    ctx.k = k;
    ctx.passages.reserve(take);
    for (std::size_t d : hits) ctx.passages.push_back({corpus.doc(d).id, scores[d], corpus.sentences(d)});
    return ctx;
}

}  // namespace

RetrievedContext retrieve(const Index& index, const TokenSeq& x, std::size_t k, const Bm25Params& params) {
    RetrievedContext ctx = rank(index, score_documents(index, x, params), k);
    ctx.query_terms = x;
    return ctx;
}

RetrievedContext retrieve_joint(const Index& index, const TokenSeq& x, const TokenSeq& y_t, double w_y,
                                std::size_t k, const Bm25Params& params) {
    if (!(w_y >= 0.0 && w_y <= 1.0)) throw RetrievalError("w_y must lie in [0, 1]");
    std::vector<double> scores = score_documents(index, x, params);
    const std::vector<double> y_scores = score_documents(index, y_t, params);
    for (std::size_t d = 0; d < scores.size(); ++d) scores[d] += w_y * y_scores[d];

    RetrievedContext ctx = rank(index, scores, k);
    ctx.query_terms = x;
    ctx.output_terms = y_t;
    ctx.w_y = w_y;
    return ctx;
}

}  // namespace lorag
