#include <cstdint>
#include <string>
#include <string_view>

#include "lorag/corpus.hpp"

namespace lorag {
namespace {

struct Decoded {
    char32_t cp;
    std::size_t len;
    bool valid;
};

// Invalid sequences decode as one opaque byte so the original bytes survive.
Decoded decode_utf8(std::string_view s, std::size_t pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    if (b0 < 0x80) return {b0, 1, true};

    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {b0, 1, false};
    }
    if (pos + len > s.size()) return {b0, 1, false};
    for (std::size_t i = 1; i < len; ++i) {
        const auto b = static_cast<unsigned char>(s[pos + i]);
        if ((b & 0xC0) != 0x80) return {b0, 1, false};
        cp = (cp << 6) | (b & 0x3F);
    }
    return {cp, len, true};
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Unicode White_Space property.
bool is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
           c == 0x205F || c == 0x3000;
}

bool is_punct(char32_t c) {
    if (c < 0x80) {
        return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
               (c >= 0x7B && c <= 0x7E);
    }
    switch (c) {
        case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
        case 0x037E: case 0x0387:
            return true;
        default:
            break;
    }
    return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
           (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
           (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20);
}

// Simple case folding for Latin-1, Latin Extended-A, Greek and Cyrillic.
// Locale-free so tokenization is identical on every machine.
char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c < 0xC0) return c;
    if (c <= 0xDE) return c == 0xD7 ? c : c + 32;
    if (c >= 0x0100 && c <= 0x017F) {
        if (c == 0x0130) return 'i';
        if (c == 0x0178) return 0xFF;
        const bool odd_upper = (c >= 0x0139 && c <= 0x0148) || (c >= 0x0179 && c <= 0x017E);
        const bool excluded = c == 0x0131 || c == 0x0138 || c == 0x0149 || c == 0x017F;
        if (excluded) return c;
        if (odd_upper) return (c % 2 == 1) ? c + 1 : c;
        return (c % 2 == 0) ? c + 1 : c;
    }
    if (c >= 0x0391 && c <= 0x03A9 && c != 0x03A2) return c + 32;
    if (c >= 0x0410 && c <= 0x042F) return c + 32;
    if (c >= 0x0400 && c <= 0x040F) return c + 80;
    return c;
}

struct Piece {
    std::size_t pos;
    Decoded d;
};

void flush_token(std::vector<Piece>& word, std::string_view text, TokenSeq& out) {
    std::size_t lo = 0;
    std::size_t hi = word.size();
    while (lo < hi && word[lo].d.valid && is_punct(word[lo].d.cp)) ++lo;
    while (hi > lo && word[hi - 1].d.valid && is_punct(word[hi - 1].d.cp)) --hi;
    if (lo < hi) {
        std::string tok;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto& p = word[i];
            if (p.d.valid) {
                append_utf8(tok, to_lower(p.d.cp));
            } else {
                tok.append(text.substr(p.pos, p.d.len));
            }
        }
        out.push_back(std::move(tok));
    }
    word.clear();
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    std::vector<Piece> word;
    for (std::size_t pos = 0; pos < text.size();) {
        const Decoded d = decode_utf8(text, pos);
        if (d.valid && is_space(d.cp)) {
            flush_token(word, text, out);
        } else {
            word.push_back({pos, d});
        }
        pos += d.len;
    }
    flush_token(word, text, out);
    return out;
}

std::string join_tokens(const TokenSeq& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

namespace {

std::string_view trim_space(std::string_view s) {
    std::size_t lo = 0;
    std::size_t last_non_space_end = 0;
    bool seen = false;
    for (std::size_t pos = 0; pos < s.size();) {
        const Decoded d = decode_utf8(s, pos);
        if (!(d.valid && is_space(d.cp))) {
            if (!seen) {
                lo = pos;
                seen = true;
            }
            last_non_space_end = pos + d.len;
        }
        pos += d.len;
    }
    if (!seen) return {};
    return s.substr(lo, last_non_space_end - lo);
}

}  // namespace

bool is_blank(std::string_view s) { return trim_space(s).empty(); }

std::vector<Sentence> split_sentences(const Document& doc) {
    std::vector<Sentence> out;
    const std::string_view text = doc.text;
    auto emit = [&](std::string_view piece) {
        const std::string_view t = trim_space(piece);
        if (t.empty()) return;
        Sentence s;
        s.doc_id = doc.id;
        s.index = out.size();
        s.text = std::string(t);
        s.tokens = tokenize(t);
        out.push_back(std::move(s));
    };

    std::size_t start = 0;
    for (std::size_t pos = 0; pos < text.size();) {
        const char c = text[pos];
        if (c == '.' || c == '!' || c == '?') {
            const std::size_t next = pos + 1;
            bool boundary = next >= text.size();
            if (!boundary) {
                const Decoded d = decode_utf8(text, next);
                boundary = d.valid && is_space(d.cp);
            }
            if (boundary) {
                emit(text.substr(start, pos - start));
                start = next;
            }
            pos = next;
            continue;
        }
        pos += decode_utf8(text, pos).len;
    }
    if (start < text.size()) emit(text.substr(start));
    return out;
}

}  // namespace lorag
