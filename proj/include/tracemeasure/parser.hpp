#ifndef TRACEMEASURE_PARSER_HPP
#define TRACEMEASURE_PARSER_HPP

#include "errors.hpp"
#include "rational.hpp"
#include "term.hpp"
#include "type.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace tracemeasure {

namespace detail {

enum class Tok {
  Ident, Number, Lambda, SlashBack, BigLambda, Wedge, Arrow, Forall, Pi,
  Dot, Colon, Plus, Slash, LParen, RParen, LBracket, RBracket, LBrace, RBrace, End
};

struct Token {
  Tok kind;
  std::string text;
  SourcePos pos;
};

inline std::string describe(const Token& t) {
  if (t.kind == Tok::End) return "end of input";
  return "'" + t.text + "'";
}

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto emit = [&](Tok k, std::size_t len, int width = -1) {
    out.push_back({k, std::string(src.substr(i, len)), SourcePos{line, col}});
    i += len;
    col += width < 0 ? static_cast<int>(len) : width;
  };
  auto starts = [&](std::string_view s) { return src.substr(i, s.size()) == s; };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      const std::string_view word = src.substr(i, j - i);
      emit(word == "forall" ? Tok::Forall : word == "pi" ? Tok::Pi : Tok::Ident, j - i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      emit(Tok::Number, j - i);
      continue;
    }
    if (starts("->")) { emit(Tok::Arrow, 2); continue; }
    if (starts("/\\")) { emit(Tok::SlashBack, 2); continue; }
    if (starts("\xCE\xBB")) { emit(Tok::Lambda, 2, 1); continue; }     // λ
    if (starts("\xCE\x9B")) { emit(Tok::BigLambda, 2, 1); continue; }  // Λ
    if (starts("\xCF\x80")) { emit(Tok::Pi, 2, 1); continue; }         // π
    if (starts("\xE2\x88\x80")) { emit(Tok::Forall, 3, 1); continue; } // ∀
    if (starts("\xE2\x86\x92") || starts("\xE2\x87\x92")) { emit(Tok::Arrow, 3, 1); continue; }  // → ⇒
    if (starts("\xE2\x88\xA7")) { emit(Tok::Wedge, 3, 1); continue; }  // ∧
    switch (c) {
      case '\\': emit(Tok::Lambda, 1); continue;
      case '.': emit(Tok::Dot, 1); continue;
      case ':': emit(Tok::Colon, 1); continue;
      case '+': emit(Tok::Plus, 1); continue;
      case '/': emit(Tok::Slash, 1); continue;
      case '(': emit(Tok::LParen, 1); continue;
      case ')': emit(Tok::RParen, 1); continue;
      case '[': emit(Tok::LBracket, 1); continue;
      case ']': emit(Tok::RBracket, 1); continue;
      case '{': emit(Tok::LBrace, 1); continue;
      case '}': emit(Tok::RBrace, 1); continue;
      default: break;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", SourcePos{line, col});
  }
  out.push_back({Tok::End, "", SourcePos{line, col}});
  return out;
}

class Parser {
 public:
  Parser(std::string_view src, Calculus calc) : toks_(tokenize(src)), calc_(calc) {}

  Type whole_type() {
    Type t = type();
    expect(Tok::End, "end of input");
    return t;
  }

  Term whole_term() {
    Term t = term();
    expect(Tok::End, "end of input");
    return t;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at(Tok k) const { return peek().kind == k; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("expected " + what + ", found " + describe(peek()), peek().pos);
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail(what);
    return next();
  }

  std::string ident(const std::string& what) { return expect(Tok::Ident, what).text; }

  Type type() {
    if (at(Tok::Forall)) {
      const SourcePos p = next().pos;
      std::string x = ident("type variable");
      expect(Tok::Dot, "'.'");
      return forall(std::move(x), type(), p);
    }
    Type lhs = conj_type();
    if (at(Tok::Arrow)) {
      const SourcePos p = next().pos;
      return arrow(lhs, type(), p);
    }
    return lhs;
  }

  Type conj_type() {
    Type t = atom_type();
    while (at(Tok::SlashBack) || at(Tok::Wedge)) {
      const SourcePos p = next().pos;
      if (calc_ == Calculus::Alg) throw ParseError("conjunction types are not part of Alg", p);
      t = conj(t, atom_type(), p);
    }
    return t;
  }

  Type atom_type() {
    if (at(Tok::Ident)) {
      const Token t = next();
      return tvar(t.text, t.pos);
    }
    if (at(Tok::LParen)) {
      next();
      Type t = type();
      expect(Tok::RParen, "')'");
      return t;
    }
    fail("a type");
  }

  Term term() {
    std::vector<Term> items;
    SourcePos first = peek().pos;
    do {
      item(items);
    } while (at(Tok::Plus) && (next(), true));
    if (items.size() == 1) return items.front();
    Term s = items.front();
    for (std::size_t i = 1; i < items.size(); ++i) s = sum(s, items[i], first);
    return s;
  }

  void item(std::vector<Term>& items) {
    if (at(Tok::Number)) {
      const Token n = next();
      Rational p = parse_rational(n.text);
      if (at(Tok::Slash)) {
        next();
        const Token d = expect(Tok::Number, "denominator");
        if (parse_rational(d.text) == 0) throw ParseError("zero denominator", d.pos);
        p /= parse_rational(d.text);
      }
      expect(Tok::Dot, "'.' after scalar");
      Term r = app_term();
      if (calc_ == Calculus::LambdaPlus) {
        if (denominator(p) != 1 || p < 1) throw ParseError("multiplicity must be a positive integer", n.pos);
        if (p > 100000) throw ParseError("multiplicity too large", n.pos);
        for (int k = 0; k < static_cast<int>(p); ++k) items.push_back(r);
      } else {
        if (p <= 0 || p > 1) throw ParseError("scalar must lie in (0,1]", n.pos);
        items.push_back(scale(p, r, n.pos));
      }
      return;
    }
    if (at(Tok::Lambda) || at(Tok::SlashBack) || at(Tok::BigLambda)) {
      items.push_back(binder());
      return;
    }
    items.push_back(app_term());
  }

  Term binder() {
    const Token b = next();
    if (b.kind == Tok::Lambda) {
      std::string x = ident("variable");
      expect(Tok::Colon, "':'");
      Type t = type();
      expect(Tok::Dot, "'.'");
      return lam(std::move(x), std::move(t), term(), b.pos);
    }
    std::string x = ident("type variable");
    expect(Tok::Dot, "'.'");
    return tlam(std::move(x), term(), b.pos);
  }

  bool starts_atom() const { return at(Tok::Ident) || at(Tok::LParen) || at(Tok::Pi); }

  Term app_term() {
    const SourcePos p = peek().pos;
    Term t = atom_term();
    for (;;) {
      if (starts_atom()) {
        t = app(t, atom_term(), p);
      } else if (at(Tok::LBrace)) {
        next();
        Type a = type();
        expect(Tok::RBrace, "'}'");
        t = tapp(t, std::move(a), p);
      } else if (at(Tok::Lambda) || at(Tok::SlashBack) || at(Tok::BigLambda)) {
        return app(t, binder(), p);
      } else {
        return t;
      }
    }
  }

  Term atom_term() {
    if (at(Tok::Ident)) {
      const Token x = next();
      expect(Tok::Colon, "':' and a type label after variable");
      return var(x.text, atom_type(), x.pos);
    }
    if (at(Tok::LParen)) {
      next();
      Term t = term();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Pi)) {
      const SourcePos p = next().pos;
      if (calc_ == Calculus::Alg) throw ParseError("projectors are not part of Alg", p);
      expect(Tok::LBracket, "'['");
      Type a = type();
      expect(Tok::RBracket, "']'");
      expect(Tok::LParen, "'('");
      Term t = term();
      expect(Tok::RParen, "')'");
      return proj(std::move(a), std::move(t), p);
    }
    fail("a term");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Calculus calc_;
};

}  // namespace detail

inline Type parse_type(std::string_view text, Calculus calc = Calculus::LambdaPlus) {
  return detail::Parser(text, calc).whole_type();
}

/// Terms of either calculus. In lambda-plus `n.r` abbreviates the n-fold sum;
/// in Alg `p.r` is a scalar with p in (0,1].
inline Term parse_term(std::string_view text, Calculus calc = Calculus::LambdaPlus) {
  return detail::Parser(text, calc).whole_term();
}

}  // namespace tracemeasure

#endif
