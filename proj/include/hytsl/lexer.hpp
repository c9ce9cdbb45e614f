#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hytsl/errors.hpp"

namespace hytsl {

// One lexer serves terms, formulas and program-automaton files.
// Multi-character operators are only fused when the characters are adjacent,
// so `c <- 1` is an update arrow while `c < - 1` stays a comparison.
enum class Tok {
    Ident,
    Int,
    Plus, Minus, Star,
    Eq, Ne, Lt, Le, Gt, Ge,
    AndAnd, OrOr, Bang,
    LParen, RParen, LBracket, RBracket,
    Comma, Semi, Colon, Dot,
    Assign,   // :=
    LArrow,   // <-
    RArrow,   // ->
    End,
};

struct Token {
    Tok kind;
    std::string text;
    int line = 1;
    int column = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { tokenize(); }

    const Token& peek(size_t ahead = 0) const {
        size_t i = pos_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }

    Token next() {
        const Token& t = peek();
        if (t.kind != Tok::End) ++pos_;
        return t;
    }

    bool accept(Tok k) {
        if (peek().kind == k) {
            ++pos_;
            return true;
        }
        return false;
    }

    Token expect(Tok k, const std::string& what) {
        if (peek().kind != k) fail("expected " + what + ", found '" + peek().text + "'");
        return next();
    }

    bool at_end() const { return peek().kind == Tok::End; }

    [[noreturn]] void fail(const std::string& msg) const {
        const Token& t = peek();
        throw ParseError(msg, t.line, t.column);
    }

private:
    std::string_view src_;
    std::vector<Token> tokens_;
    size_t pos_ = 0;

    static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
    static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

    void tokenize() {
        int line = 1, col = 1;
        size_t i = 0;
        auto push = [&](Tok k, std::string text, int l, int c) {
            tokens_.push_back(Token{k, std::move(text), l, c});
        };
        while (i < src_.size()) {
            char c = src_[i];
            if (c == '\n') { ++line; col = 1; ++i; continue; }
            if (c == ' ' || c == '\t' || c == '\r') { ++col; ++i; continue; }
            if (c == '#') {  // comment to end of line
                while (i < src_.size() && src_[i] != '\n') ++i;
                continue;
            }
            int tl = line, tc = col;
            auto two = [&](char a, char b) {
                return c == a && i + 1 < src_.size() && src_[i + 1] == b;
            };
            if (ident_start(c)) {
                size_t j = i;
                while (j < src_.size() && ident_char(src_[j])) ++j;
                push(Tok::Ident, std::string(src_.substr(i, j - i)), tl, tc);
                col += static_cast<int>(j - i);
                i = j;
                continue;
            }
            if (c >= '0' && c <= '9') {
                size_t j = i;
                while (j < src_.size() && src_[j] >= '0' && src_[j] <= '9') ++j;
                push(Tok::Int, std::string(src_.substr(i, j - i)), tl, tc);
                col += static_cast<int>(j - i);
                i = j;
                continue;
            }
            if (two(':', '=')) { push(Tok::Assign, ":=", tl, tc); i += 2; col += 2; continue; }
            if (two('<', '-')) { push(Tok::LArrow, "<-", tl, tc); i += 2; col += 2; continue; }
            if (two('-', '>')) { push(Tok::RArrow, "->", tl, tc); i += 2; col += 2; continue; }
            if (two('<', '=')) { push(Tok::Le, "<=", tl, tc); i += 2; col += 2; continue; }
            if (two('>', '=')) { push(Tok::Ge, ">=", tl, tc); i += 2; col += 2; continue; }
            if (two('!', '=')) { push(Tok::Ne, "!=", tl, tc); i += 2; col += 2; continue; }
            if (two('&', '&')) { push(Tok::AndAnd, "&&", tl, tc); i += 2; col += 2; continue; }
            if (two('|', '|')) { push(Tok::OrOr, "||", tl, tc); i += 2; col += 2; continue; }
            Tok k;
            switch (c) {
                case '+': k = Tok::Plus; break;
                case '-': k = Tok::Minus; break;
                case '*': k = Tok::Star; break;
                case '=': k = Tok::Eq; break;
                case '<': k = Tok::Lt; break;
                case '>': k = Tok::Gt; break;
                case '!': k = Tok::Bang; break;
                case '(': k = Tok::LParen; break;
                case ')': k = Tok::RParen; break;
                case '[': k = Tok::LBracket; break;
                case ']': k = Tok::RBracket; break;
                case ',': k = Tok::Comma; break;
                case ';': k = Tok::Semi; break;
                case ':': k = Tok::Colon; break;
                case '.': k = Tok::Dot; break;
                default:
                    throw ParseError(std::string("unexpected character '") + c + "'", tl, tc);
            }
            push(k, std::string(1, c), tl, tc);
            ++i;
            ++col;
        }
        tokens_.push_back(Token{Tok::End, "<end>", line, col});
    }
};

}  // namespace hytsl
