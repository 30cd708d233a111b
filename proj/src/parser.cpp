#include "paramshap/parser.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

#include "paramshap/errors.hpp"

namespace paramshap {

namespace {

enum class Tok {
  Name, Int, Str, True, False,
  LParen, RParen, LBracket, RBracket,
  Comma, Semicolon, Turnstile, Dollar,
  Plus, Minus, Star, Slash, Arrow,
  Lt, Le, Eq, Ne, Ge, Gt,
  End,
};

struct Token {
  Tok type;
  std::string text;
  int line = 1, col = 1;
};

[[noreturn]] void fail(int line, int col, const std::string& msg) {
  throw ValidationError("query text line " + std::to_string(line) + ", column " +
                        std::to_string(col) + ": " + msg);
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t = next();
      bool end = t.type == Tok::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++pos_;
        ++line_;
        col_ = 1;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
        ++col_;
      } else {
        break;
      }
    }
  }

  char peek(size_t off = 0) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void advance(size_t n = 1) {
    pos_ += n;
    col_ += static_cast<int>(n);
  }

  Token make(Tok type, std::string text, int line, int col) {
    Token t;
    t.type = type;
    t.text = std::move(text);
    t.line = line;
    t.col = col;
    return t;
  }

  Token next() {
    int line = line_, col = col_;
    if (pos_ >= text_.size()) return make(Tok::End, "", line, col);
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') advance();
      std::string word = text_.substr(start, pos_ - start);
      if (word == "true") return make(Tok::True, word, line, col);
      if (word == "false") return make(Tok::False, word, line, col);
      return make(Tok::Name, word, line, col);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
      return make(Tok::Int, text_.substr(start, pos_ - start), line, col);
    }
    if (c == '"') {
      advance();
      std::string value;
      while (true) {
        if (pos_ >= text_.size() || peek() == '\n') fail(line, col, "unterminated string literal");
        char d = peek();
        advance();
        if (d == '"') break;
        if (d == '\\') {
          if (pos_ >= text_.size()) fail(line, col, "unterminated string literal");
          value.push_back(peek());
          advance();
        } else {
          value.push_back(d);
        }
      }
      return make(Tok::Str, value, line, col);
    }
    auto two = [&](char a, char b) { return c == a && peek(1) == b; };
    if (two(':', '-')) { advance(2); return make(Tok::Turnstile, ":-", line, col); }
    if (two('=', '>')) { advance(2); return make(Tok::Arrow, "=>", line, col); }
    if (two('<', '=')) { advance(2); return make(Tok::Le, "<=", line, col); }
    if (two('>', '=')) { advance(2); return make(Tok::Ge, ">=", line, col); }
    if (two('!', '=')) { advance(2); return make(Tok::Ne, "!=", line, col); }
    advance();
    switch (c) {
      case '(': return make(Tok::LParen, "(", line, col);
      case ')': return make(Tok::RParen, ")", line, col);
      case '[': return make(Tok::LBracket, "[", line, col);
      case ']': return make(Tok::RBracket, "]", line, col);
      case ',': return make(Tok::Comma, ",", line, col);
      case ';': return make(Tok::Semicolon, ";", line, col);
      case '$': return make(Tok::Dollar, "$", line, col);
      case '+': return make(Tok::Plus, "+", line, col);
      case '-': return make(Tok::Minus, "-", line, col);
      case '*': return make(Tok::Star, "*", line, col);
      case '/': return make(Tok::Slash, "/", line, col);
      case '<': return make(Tok::Lt, "<", line, col);
      case '>': return make(Tok::Gt, ">", line, col);
      case '=': return make(Tok::Eq, "=", line, col);
      default:
        fail(line, col, std::string("unexpected character '") + c + "'");
    }
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ParamQuery run() {
    ParamQuery q;
    q.name = expect(Tok::Name, "query name").text;
    expect(Tok::LParen, "'(' after query name");
    parse_head(q);
    expect(Tok::Turnstile, "':-' between head and body");
    parse_body(q);
    if (cur().type != Tok::End) fail_here("trailing input after query body");
    std::vector<std::string> free_set = q.free_vars;
    for (const auto& v : q.atom_variables()) {
      if (std::find(free_set.begin(), free_set.end(), v) == free_set.end()) {
        q.bound_vars.push_back(v);
      }
    }
    q.validate();
    return q;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }

  const Token& take() { return toks_[idx_++]; }

  bool accept(Tok type) {
    if (cur().type != type) return false;
    ++idx_;
    return true;
  }

  const Token& expect(Tok type, const std::string& what) {
    if (cur().type != type) fail_here("expected " + what);
    return take();
  }

  [[noreturn]] void fail_here(const std::string& msg) {
    const Token& t = cur();
    std::string got = t.type == Tok::End ? "end of input" : "'" + t.text + "'";
    fail(t.line, t.col, msg + " (got " + got + ")");
  }

  void parse_head(ParamQuery& q) {
    if (accept(Tok::RParen)) return;
    if (cur().type == Tok::Name) {
      q.free_vars.push_back(take().text);
      while (accept(Tok::Comma)) q.free_vars.push_back(expect(Tok::Name, "variable name").text);
    }
    if (accept(Tok::Semicolon)) {
      do {
        expect(Tok::Dollar, "'$' before parameter name");
        q.parameters.push_back(expect(Tok::Name, "parameter name").text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')' closing the query head");
  }

  void parse_body(ParamQuery& q) {
    do {
      if (cur().type == Tok::LBracket) {
        q.filters.push_back(parse_filter(q));
      } else if (cur().type == Tok::Name) {
        q.atoms.push_back(parse_atom(q));
      } else {
        fail_here("expected an atom or a '['-filter");
      }
    } while (accept(Tok::Comma));
  }

  Atom parse_atom(ParamQuery& q) {
    Atom a;
    a.relation = expect(Tok::Name, "relation name").text;
    expect(Tok::LParen, "'(' after relation name");
    if (!accept(Tok::RParen)) {
      do {
        a.terms.push_back(parse_term(q));
      } while (accept(Tok::Comma));
      expect(Tok::RParen, "')' closing the atom");
    }
    return a;
  }

  Term parse_term(ParamQuery& q) {
    switch (cur().type) {
      case Tok::Dollar: {
        take();
        const Token& t = expect(Tok::Name, "parameter name after '$'");
        return make_param(q, t);
      }
      case Tok::Name:
        return Term::variable(take().text);
      case Tok::Str:
        return Term::constant_of(Value::string(take().text));
      case Tok::True:
        take();
        return Term::constant_of(Value::boolean(true));
      case Tok::False:
        take();
        return Term::constant_of(Value::boolean(false));
      case Tok::Minus:
      case Tok::Int: {
        bool neg = accept(Tok::Minus);
        Rational r = parse_number();
        if (neg) r = -r;
        if (r.is_integer()) return Term::constant_of(Value::integer(r.numerator()));
        return Term::constant_of(Value::rational(r));
      }
      default:
        fail_here("expected a term (variable, $parameter, or constant)");
    }
  }

  Term make_param(ParamQuery& q, const Token& t) {
    int idx = q.param_index(t.text);
    if (idx == 0) {
      fail(t.line, t.col, "parameter '$" + t.text + "' is not declared in the query head");
    }
    return Term::parameter(t.text, idx);
  }

  Rational parse_number() {
    const Token& n = expect(Tok::Int, "a number");
    BigInt num(n.text);
    if (accept(Tok::Slash)) {
      const Token& d = expect(Tok::Int, "denominator after '/'");
      return Rational(num, BigInt(d.text));
    }
    return Rational(num, 1);
  }

  Filter parse_filter(ParamQuery& q) {
    expect(Tok::LBracket, "'['");
    Filter f;
    // A leading '$name =>' is a gate; otherwise '$name' starts the left side.
    if (idx_ + 2 < toks_.size() && cur().type == Tok::Dollar &&
        toks_[idx_ + 1].type == Tok::Name && toks_[idx_ + 2].type == Tok::Arrow) {
      take();
      const Token& g = take();
      take();
      f.gate = make_param(q, g);
    }
    f.lhs = parse_expr(q);
    switch (take().type) {
      case Tok::Lt: f.op = CmpOp::Lt; break;
      case Tok::Le: f.op = CmpOp::Le; break;
      case Tok::Eq: f.op = CmpOp::Eq; break;
      case Tok::Ne: f.op = CmpOp::Ne; break;
      case Tok::Ge: f.op = CmpOp::Ge; break;
      case Tok::Gt: f.op = CmpOp::Gt; break;
      default:
        --idx_;
        fail_here("expected a comparison operator");
    }
    f.rhs = parse_expr(q);
    expect(Tok::RBracket, "']' closing the filter");
    return f;
  }

  LinearExpr parse_expr(ParamQuery& q) {
    LinearExpr e;
    bool neg = accept(Tok::Minus);
    parse_summand(q, e, neg);
    while (true) {
      if (accept(Tok::Plus)) {
        parse_summand(q, e, false);
      } else if (accept(Tok::Minus)) {
        parse_summand(q, e, true);
      } else {
        break;
      }
    }
    return e;
  }

  void parse_summand(ParamQuery& q, LinearExpr& e, bool neg) {
    Rational coeff = 1;
    bool have_coeff = false;
    if (cur().type == Tok::Int) {
      coeff = parse_number();
      have_coeff = true;
      if (!accept(Tok::Star)) {
        e.constant += neg ? -coeff : coeff;
        return;
      }
    }
    Term ref;
    if (accept(Tok::Dollar)) {
      const Token& t = expect(Tok::Name, "parameter name after '$'");
      ref = make_param(q, t);
    } else if (cur().type == Tok::Name) {
      ref = Term::variable(take().text);
    } else {
      fail_here(have_coeff ? "expected a variable or $parameter after '*'"
                           : "expected a number, variable, or $parameter");
    }
    e.entries.push_back(LinearExpr::Entry{neg ? -coeff : coeff, std::move(ref)});
  }

  std::vector<Token> toks_;
  size_t idx_ = 0;
};

}  // namespace

ParamQuery parse_query(const std::string& text) {
  return Parser(Lexer(text).run()).run();
}

}  // namespace paramshap
