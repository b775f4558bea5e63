#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "lorag/corpus.hpp"

using lorag::TokenSeq;
using lorag::tokenize;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lorag_corpus_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string ingest_error(const std::string& text) {
    try {
        lorag::parse_corpus(text, "corpus.jsonl");
    } catch (const lorag::IngestError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Tokenize, Examples) {
    EXPECT_EQ(tokenize(""), TokenSeq{});
    EXPECT_EQ(tokenize("The cat, the CAT."), (TokenSeq{"the", "cat", "the", "cat"}));
    EXPECT_EQ(tokenize("state-of-the-art NLP!"), (TokenSeq{"state-of-the-art", "nlp"}));
}

TEST(Tokenize, InteriorPunctuationAndEmptyTokens) {
    EXPECT_EQ(tokenize("don't -- \"quoted\" (x)"), (TokenSeq{"don't", "quoted", "x"}));
    EXPECT_EQ(tokenize("  \t\n ... !!! "), TokenSeq{});
}

TEST(Tokenize, UnicodeWhitespaceAndCase) {
    // U+00A0 no-break space and U+3000 ideographic space separate tokens.
    EXPECT_EQ(tokenize("Élan\xC2\xA0Über\xE3\x80\x80ΣΟΦΙΑ"), (TokenSeq{"élan", "über", "σοφια"}));
    EXPECT_EQ(tokenize("«Привет»"), (TokenSeq{"привет"}));
}

TEST(Tokenize, NoEmptyTokensAndIdempotent) {
    std::mt19937_64 rng(3);
    const std::string alphabet = "abcXYZ .,!?-'\"()\t\n";
    for (int trial = 0; trial < 2000; ++trial) {
        std::string text;
        for (int i = 0, n = static_cast<int>(rng() % 40); i < n; ++i) text += alphabet[rng() % alphabet.size()];
        const TokenSeq t = tokenize(text);
        for (const auto& tok : t) ASSERT_FALSE(tok.empty()) << text;
        ASSERT_EQ(tokenize(lorag::join_tokens(t)), t) << text;
        ASSERT_EQ(tokenize(text), t);
    }
}

TEST(SplitSentences, Examples) {
    auto texts = [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& s : lorag::split_sentences({"d", text, {}})) out.push_back(s.text);
        return out;
    };
    EXPECT_EQ(texts("A. B? C"), (std::vector<std::string>{"A", "B", "C"}));
    EXPECT_EQ(texts("no terminator"), (std::vector<std::string>{"no terminator"}));
    EXPECT_EQ(texts("x."), (std::vector<std::string>{"x"}));
    EXPECT_EQ(texts("Version 2.5 ships!  Really?!"), (std::vector<std::string>{"Version 2.5 ships", "Really?"}));
}

TEST(SplitSentences, IndexesAndTokens) {
    auto s = lorag::split_sentences({"doc", "One two. Three!", {}});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].doc_id, "doc");
    EXPECT_EQ(s[0].index, 0u);
    EXPECT_EQ(s[1].index, 1u);
    EXPECT_EQ(s[1].tokens, (TokenSeq{"three"}));
}

TEST(SplitSentences, ConcatenationKeepsTokens) {
    // Joining the sentences back loses only terminators and spacing.
    std::mt19937_64 rng(11);
    const char* words[] = {"alpha", "beta", "gamma", "delta"};
    const char* ends[] = {". ", "! ", "? ", " "};
    for (int trial = 0; trial < 500; ++trial) {
        std::string text;
        for (int i = 0, n = 1 + static_cast<int>(rng() % 12); i < n; ++i) {
            text += words[rng() % 4];
            text += ends[rng() % 4];
        }
        TokenSeq joined;
        for (const auto& s : lorag::split_sentences({"d", text, {}})) {
            joined.insert(joined.end(), s.tokens.begin(), s.tokens.end());
        }
        ASSERT_EQ(joined, tokenize(text)) << text;
    }
}

TEST(Ingest, ThreeLines) {
    auto c = lorag::parse_corpus(
        "{\"id\":\"a\",\"text\":\"First doc.\"}\n"
        "{\"id\":\"b\",\"text\":\"Second doc.\",\"meta\":{\"src\":\"x\"}}\n"
        "\n"
        "{\"id\":\"c\",\"text\":\"Third.\"}\n");
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c.doc(0).id, "a");
    EXPECT_EQ(c.doc(1).meta.at("src"), "x");
    EXPECT_EQ(c.doc(2).id, "c");
    EXPECT_EQ(c.tokens(1), (TokenSeq{"second", "doc"}));
    EXPECT_EQ(c.find("b"), 1u);
    EXPECT_FALSE(c.find("zzz"));
}

TEST(Ingest, Errors) {
    std::string dup =
        "{\"id\":\"d0\",\"text\":\"x\"}\n{\"id\":\"d1\",\"text\":\"x\"}\n{\"id\":\"d2\",\"text\":\"x\"}\n"
        "{\"id\":\"d3\",\"text\":\"x\"}\n{\"id\":\"d1\",\"text\":\"y\"}\n";
    EXPECT_NE(ingest_error(dup).find("d1"), std::string::npos);
    EXPECT_NE(ingest_error("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"b\"}\n").find(":2"), std::string::npos);
    EXPECT_NE(ingest_error("{\"id\":\"a\",\"text\":\"x\"}\nnot json\n").find(":2"), std::string::npos);
    EXPECT_NE(ingest_error("{\"id\":\"\",\"text\":\"x\"}\n"), "");
    EXPECT_NE(ingest_error("{\"id\":\"a\",\"text\":\"  \\t \"}\n"), "");
    EXPECT_NE(ingest_error("{\"id\":\"a\",\"text\":\"x\",\"meta\":{\"k\":1}}\n"), "");
    EXPECT_NE(ingest_error(""), "");
    EXPECT_NE(ingest_error("\n\n"), "");
    EXPECT_THROW(lorag::ingest("/nonexistent/corpus.jsonl"), lorag::IngestError);
}

TEST(Ingest, RoundTrip) {
    auto dir = temp_dir("roundtrip");
    lorag::Corpus c;
    c.add({"z1", "Unicode: naïve café. Second sentence!", {{"lang", "en"}, {"k", "v"}}});
    c.add({"a0", "Quotes \"inside\" and \\ backslash.", {}});
    c.add({"m5", "tabs\tand\nnewlines", {}});
    lorag::write_corpus(c, dir / "c.jsonl");
    auto back = lorag::ingest(dir / "c.jsonl");
    ASSERT_EQ(back.size(), c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        EXPECT_EQ(back.doc(i), c.doc(i));
        EXPECT_EQ(back.tokens(i), c.tokens(i));
        EXPECT_EQ(back.sentences(i), c.sentences(i));
    }
    EXPECT_EQ(lorag::corpus_to_jsonl(back), lorag::corpus_to_jsonl(c));
}
