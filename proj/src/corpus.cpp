#include "lorag/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lorag {

using json = nlohmann::ordered_json;

void Corpus::add(Document doc) {
    if (doc.id.empty()) throw IngestError("document id must be non-empty");
    if (is_blank(doc.text)) throw IngestError("document '" + doc.id + "' has empty text");
    if (by_id_.count(doc.id) != 0) throw IngestError("duplicate document id '" + doc.id + "'");

    by_id_.emplace(doc.id, docs_.size());
    tokens_.push_back(tokenize(doc.text));
    sentences_.push_back(split_sentences(doc));
    docs_.push_back(std::move(doc));
}

std::optional<std::size_t> Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) return std::nullopt;
    return it->second;
}

namespace {

Document parse_line(std::string_view line, std::size_t line_no, std::string_view source) {
    auto fail = [&](const std::string& why) {
        return IngestError(std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };

    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!obj.is_object()) throw fail("expected a JSON object");

    auto id = obj.find("id");
    if (id == obj.end() || !id->is_string()) throw fail("missing string field \"id\"");
    auto text = obj.find("text");
    if (text == obj.end() || !text->is_string()) throw fail("missing string field \"text\"");

    Document doc;
    doc.id = id->get<std::string>();
    doc.text = text->get<std::string>();
    if (doc.id.empty()) throw fail("field \"id\" is empty");
    if (is_blank(doc.text)) throw fail("field \"text\" is empty");

    if (auto meta = obj.find("meta"); meta != obj.end()) {
        if (!meta->is_object()) throw fail("field \"meta\" must be an object");
        for (const auto& [k, v] : meta->items()) {
            if (!v.is_string()) throw fail("meta value for \"" + k + "\" must be a string");
            doc.meta.emplace(k, v.get<std::string>());
        }
    }
    return doc;
}

}  // namespace

Corpus parse_corpus(std::string_view jsonl, std::string_view source_name) {
    Corpus corpus;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (is_blank(line)) continue;

        Document doc = parse_line(line, line_no, source_name);
        if (corpus.find(doc.id)) {
            throw IngestError(std::string(source_name) + ":" + std::to_string(line_no) +
                              ": duplicate document id '" + doc.id + "'");
        }
        corpus.add(std::move(doc));
    }
    if (corpus.empty()) throw IngestError(std::string(source_name) + ": corpus file has no documents");
    return corpus;
}

Corpus ingest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str(), path.string());
}

std::string corpus_to_jsonl(const Corpus& corpus) {
    std::string out;
    for (const auto& doc : corpus.documents()) {
        json obj;
        obj["id"] = doc.id;
        obj["text"] = doc.text;
        if (!doc.meta.empty()) {
            json meta = json::object();
            for (const auto& [k, v] : doc.meta) meta[k] = v;
            obj["meta"] = std::move(meta);
        }
        out += obj.dump();
        out.push_back('\n');
    }
    return out;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write corpus file " + path.string());
    out << corpus_to_jsonl(corpus);
    if (!out) throw Error("failed writing corpus file " + path.string());
}

}  // namespace lorag
