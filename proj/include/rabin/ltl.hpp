#pragma once

// LTL formulas over opaque atomic propositions: AST, parser, printer and
// classification into the fragment that translate_fragment() handles directly.

#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rabin/error.hpp"

namespace rabin::ltl {

enum class Op { atom, truth, falsity, negation, conjunction, disjunction, implies, next, until, eventually, always };

inline bool is_unary(Op op) {
  return op == Op::negation || op == Op::next || op == Op::eventually || op == Op::always;
}

inline bool is_binary(Op op) {
  return op == Op::conjunction || op == Op::disjunction || op == Op::implies || op == Op::until;
}

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!std::isalpha(head) && head != '_') return false;
  return std::all_of(s.begin() + 1, s.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u == '_';
  });
}

class Formula;

namespace detail {
struct Node;
}

/// Immutable formula tree with value semantics. Conjunctions and disjunctions
/// are n-ary and always flattened, so structural equality is meaningful.
class Formula {
 public:
  static Formula atom(std::string name);
  static Formula truth();
  static Formula falsity();
  static Formula negation(Formula f);
  static Formula next(Formula f);
  static Formula eventually(Formula f);
  static Formula always(Formula f);
  static Formula until(Formula lhs, Formula rhs);
  static Formula implies(Formula lhs, Formula rhs);
  static Formula conjunction(std::vector<Formula> parts);
  static Formula disjunction(std::vector<Formula> parts);

  Op op() const;
  const std::string& name() const;
  std::span<const Formula> children() const;
  const Formula& child(std::size_t i) const { return children()[i]; }

  friend bool operator==(const Formula& a, const Formula& b);

 private:
  explicit Formula(std::shared_ptr<const detail::Node> node) : node_(std::move(node)) {}
  static Formula make(Op op, std::string name, std::vector<Formula> kids);
  static Formula flatten(Op op, std::vector<Formula> parts);

  std::shared_ptr<const detail::Node> node_;
};

namespace detail {
struct Node {
  Op op;
  std::string name;
  std::vector<Formula> kids;
};
}  // namespace detail

inline Formula Formula::make(Op op, std::string name, std::vector<Formula> kids) {
  return Formula(std::make_shared<const detail::Node>(detail::Node{op, std::move(name), std::move(kids)}));
}

inline Formula Formula::atom(std::string name) {
  if (!is_identifier(name)) throw ValidationError("invalid atom name '" + name + "'");
  return make(Op::atom, std::move(name), {});
}
inline Formula Formula::truth() { return make(Op::truth, {}, {}); }
inline Formula Formula::falsity() { return make(Op::falsity, {}, {}); }
inline Formula Formula::negation(Formula f) { return make(Op::negation, {}, {std::move(f)}); }
inline Formula Formula::next(Formula f) { return make(Op::next, {}, {std::move(f)}); }
inline Formula Formula::eventually(Formula f) { return make(Op::eventually, {}, {std::move(f)}); }
inline Formula Formula::always(Formula f) { return make(Op::always, {}, {std::move(f)}); }
inline Formula Formula::until(Formula lhs, Formula rhs) { return make(Op::until, {}, {std::move(lhs), std::move(rhs)}); }
inline Formula Formula::implies(Formula lhs, Formula rhs) {
  return make(Op::implies, {}, {std::move(lhs), std::move(rhs)});
}

inline Formula Formula::flatten(Op op, std::vector<Formula> parts) {
  if (parts.empty()) return op == Op::conjunction ? truth() : falsity();
  std::vector<Formula> flat;
  for (auto& p : parts) {
    if (p.op() == op) {
      auto kids = p.children();
      flat.insert(flat.end(), kids.begin(), kids.end());
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.size() == 1) return flat.front();
  return make(op, {}, std::move(flat));
}

inline Formula Formula::conjunction(std::vector<Formula> parts) { return flatten(Op::conjunction, std::move(parts)); }
inline Formula Formula::disjunction(std::vector<Formula> parts) { return flatten(Op::disjunction, std::move(parts)); }

inline Op Formula::op() const { return node_->op; }
inline const std::string& Formula::name() const { return node_->name; }
inline std::span<const Formula> Formula::children() const { return node_->kids; }

inline bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.op() != b.op() || a.name() != b.name()) return false;
  auto ka = a.children();
  auto kb = b.children();
  return std::equal(ka.begin(), ka.end(), kb.begin(), kb.end());
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {
inline void print(const Formula& f, std::string& out);

inline void print_operand(const Formula& f, std::string& out) {
  if (is_binary(f.op())) {
    out += '(';
    print(f, out);
    out += ')';
  } else {
    print(f, out);
  }
}

inline void print(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::atom: out += f.name(); return;
    case Op::truth: out += "true"; return;
    case Op::falsity: out += "false"; return;
    case Op::negation: out += '!'; print_operand(f.child(0), out); return;
    case Op::next: out += "X "; print_operand(f.child(0), out); return;
    case Op::eventually: out += "F "; print_operand(f.child(0), out); return;
    case Op::always: out += "G "; print_operand(f.child(0), out); return;
    case Op::conjunction:
    case Op::disjunction: {
      const char* sep = f.op() == Op::conjunction ? " & " : " | ";
      bool first = true;
      for (const auto& k : f.children()) {
        if (!first) out += sep;
        first = false;
        print_operand(k, out);
      }
      return;
    }
    case Op::implies:
    case Op::until:
      print_operand(f.child(0), out);
      out += f.op() == Op::implies ? " -> " : " U ";
      print_operand(f.child(1), out);
      return;
  }
}
}  // namespace detail

inline std::string to_string(const Formula& f) {
  std::string out;
  detail::print(f, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   implies  := or ('->' implies)?
//   or       := and ('|' and)*
//   and      := until ('&' until)*
//   until    := unary ('U' until)?
//   unary    := ('!' | 'G' | 'F' | 'X' | '[]' | '<>') unary | primary
//   primary  := identifier | 'true' | 'false' | '(' implies ')'
//
// Identifiers spelled only with G/F/X (e.g. "GF", "XXX") are read as stacked
// unary operators.

namespace detail {

enum class Tok { ident, lparen, rparen, bang, amp, bar, arrow, always, eventually, next, until, truth, falsity, end };

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
};

inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t at, std::size_t len) {
    out.push_back({k, at, std::string(text.substr(at, len))});
    i = at + len;
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    auto rest = text.substr(i);
    if (c == '(') push(Tok::lparen, i, 1);
    else if (c == ')') push(Tok::rparen, i, 1);
    else if (c == '!' || c == '~') push(Tok::bang, i, 1);
    else if (rest.starts_with("&&")) push(Tok::amp, i, 2);
    else if (c == '&') push(Tok::amp, i, 1);
    else if (rest.starts_with("||")) push(Tok::bar, i, 2);
    else if (c == '|') push(Tok::bar, i, 1);
    else if (rest.starts_with("->") || rest.starts_with("=>")) push(Tok::arrow, i, 2);
    else if (rest.starts_with("[]")) push(Tok::always, i, 2);
    else if (rest.starts_with("<>")) push(Tok::eventually, i, 2);
    else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i + 1;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_')) ++j;
      auto word = text.substr(i, j - i);
      std::size_t start = i;
      if (word == "true") push(Tok::truth, start, j - start);
      else if (word == "false") push(Tok::falsity, start, j - start);
      else if (word == "U") push(Tok::until, start, 1);
      else if (word.find_first_not_of("GFX") == std::string_view::npos) {
        for (std::size_t k = 0; k < word.size(); ++k) {
          Tok t = word[k] == 'G' ? Tok::always : word[k] == 'F' ? Tok::eventually : Tok::next;
          push(t, start + k, 1);
        }
      } else {
        push(Tok::ident, start, j - start);
      }
    } else {
      throw ParseError("unknown token '" + std::string(1, c) + "'", i);
    }
  }
  out.push_back({Tok::end, text.size(), {}});
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : tokens_(tokenize(text)) {}

  Formula parse() {
    Formula f = parse_implies();
    const Token& t = peek();
    if (t.kind == Tok::rparen) throw ParseError("unbalanced parenthesis", t.offset);
    if (t.kind != Tok::end) throw ParseError("unexpected '" + t.text + "'", t.offset);
    return f;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& advance() { return tokens_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }

  Formula parse_implies() {
    Formula lhs = parse_or();
    if (accept(Tok::arrow)) return Formula::implies(std::move(lhs), parse_implies());
    return lhs;
  }

  Formula parse_or() {
    std::vector<Formula> parts{parse_and()};
    while (accept(Tok::bar)) parts.push_back(parse_and());
    return Formula::disjunction(std::move(parts));
  }

  Formula parse_and() {
    std::vector<Formula> parts{parse_until()};
    while (accept(Tok::amp)) parts.push_back(parse_until());
    return Formula::conjunction(std::move(parts));
  }

  Formula parse_until() {
    Formula lhs = parse_unary();
    if (accept(Tok::until)) return Formula::until(std::move(lhs), parse_until());
    return lhs;
  }

  Formula parse_unary() {
    switch (peek().kind) {
      case Tok::bang: advance(); return Formula::negation(parse_unary());
      case Tok::always: advance(); return Formula::always(parse_unary());
      case Tok::eventually: advance(); return Formula::eventually(parse_unary());
      case Tok::next: advance(); return Formula::next(parse_unary());
      default: return parse_primary();
    }
  }

  Formula parse_primary() {
    const Token& t = advance();
    switch (t.kind) {
      case Tok::ident: return Formula::atom(t.text);
      case Tok::truth: return Formula::truth();
      case Tok::falsity: return Formula::falsity();
      case Tok::lparen: {
        Formula inner = parse_implies();
        if (!accept(Tok::rparen)) {
          const Token& bad = peek();
          if (bad.kind == Tok::end) throw ParseError("unbalanced parenthesis", t.offset);
          throw ParseError("expected ')' but found '" + bad.text + "'", bad.offset);
        }
        return inner;
      }
      case Tok::end: throw ParseError("unexpected end of input, expected a formula", t.offset);
      case Tok::rparen: throw ParseError("unbalanced parenthesis", t.offset);
      default: throw ParseError("unexpected '" + t.text + "', expected a formula", t.offset);
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an LTL formula. Throws ParseError with the byte offset of the
/// offending token.
inline Formula parse(std::string_view text) { return detail::Parser(text).parse(); }

// ---------------------------------------------------------------------------
// Queries

inline void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::atom) out.insert(f.name());
  for (const auto& k : f.children()) collect_atoms(k, out);
}

/// Atom names occurring in f, sorted lexicographically.
inline std::vector<std::string> atoms(const Formula& f) {
  std::set<std::string> s;
  collect_atoms(f, s);
  return {s.begin(), s.end()};
}

inline bool is_propositional(const Formula& f) {
  switch (f.op()) {
    case Op::next:
    case Op::until:
    case Op::eventually:
    case Op::always: return false;
    default:
      return std::all_of(f.children().begin(), f.children().end(), [](const Formula& k) { return is_propositional(k); });
  }
}

/// Maximum nesting of X, or nullopt if f contains G, F or U.
inline std::optional<int> next_depth(const Formula& f) {
  switch (f.op()) {
    case Op::until:
    case Op::eventually:
    case Op::always: return std::nullopt;
    case Op::next: {
      auto d = next_depth(f.child(0));
      if (!d) return std::nullopt;
      return *d + 1;
    }
    default: {
      int depth = 0;
      for (const auto& k : f.children()) {
        auto d = next_depth(k);
        if (!d) return std::nullopt;
        depth = std::max(depth, *d);
      }
      return depth;
    }
  }
}

inline constexpr int kMaxSafetyNextDepth = 3;

/// Conjunction of GF p, FG p and G safe conjuncts, with p propositional and
/// safe propositional over X up to depth kMaxSafetyNextDepth.
struct FragmentSpec {
  std::vector<Formula> recurrence;
  std::vector<Formula> stability;
  std::optional<Formula> safety;

  bool empty() const { return recurrence.empty() && stability.empty() && !safety; }
};

/// Rebuilds the conjunction represented by a fragment spec.
inline Formula to_formula(const FragmentSpec& spec) {
  std::vector<Formula> parts;
  for (const auto& p : spec.recurrence) parts.push_back(Formula::always(Formula::eventually(p)));
  for (const auto& p : spec.stability) parts.push_back(Formula::eventually(Formula::always(p)));
  if (spec.safety) parts.push_back(Formula::always(*spec.safety));
  return Formula::conjunction(std::move(parts));
}

/// Classifies f into the directly translatable fragment. Several G conjuncts
/// are merged into one safety formula. Returns nullopt when f is outside the
/// fragment; callers then need an externally produced automaton.
inline std::optional<FragmentSpec> to_fragment(const Formula& f) {
  std::vector<Formula> conjuncts;
  if (f.op() == Op::conjunction) conjuncts.assign(f.children().begin(), f.children().end());
  else conjuncts.push_back(f);

  FragmentSpec spec;
  std::vector<Formula> safety;
  for (const auto& c : conjuncts) {
    if (c.op() == Op::truth) continue;
    if (c.op() == Op::always && c.child(0).op() == Op::eventually && is_propositional(c.child(0).child(0))) {
      spec.recurrence.push_back(c.child(0).child(0));
    } else if (c.op() == Op::eventually && c.child(0).op() == Op::always && is_propositional(c.child(0).child(0))) {
      spec.stability.push_back(c.child(0).child(0));
    } else if (c.op() == Op::always) {
      auto depth = next_depth(c.child(0));
      if (!depth || *depth > kMaxSafetyNextDepth) return std::nullopt;
      safety.push_back(c.child(0));
    } else {
      return std::nullopt;
    }
  }
  if (!safety.empty()) spec.safety = Formula::conjunction(std::move(safety));
  return spec;
}

}  // namespace rabin::ltl
