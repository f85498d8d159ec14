#pragma once

// Importer for the subset of HOA v1 that describes deterministic, complete
// Rabin automata with state-based acceptance.

#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rabin/dra.hpp"
#include "rabin/error.hpp"

namespace rabin::hoa {

namespace detail {

enum class Tok { header, ident, integer, string, lbracket, rbracket, lbrace, rbrace, lparen, rparen, bang, amp, bar,
                 body, end_marker, abort, alias, end };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

inline std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (s.substr(i).starts_with("/*")) {
      auto close = s.find("*/", i + 2);
      if (close == std::string_view::npos) throw ParseError("unterminated comment", i);
      i = close + 2;
      continue;
    }
    std::size_t start = i;
    auto single = [&](Tok k) {
      out.push_back({k, std::string(1, c), start});
      ++i;
    };
    switch (c) {
      case '[': single(Tok::lbracket); continue;
      case ']': single(Tok::rbracket); continue;
      case '{': single(Tok::lbrace); continue;
      case '}': single(Tok::rbrace); continue;
      case '(': single(Tok::lparen); continue;
      case ')': single(Tok::rparen); continue;
      case '!': single(Tok::bang); continue;
      case '&': single(Tok::amp); continue;
      case '|': single(Tok::bar); continue;
      default: break;
    }
    if (c == '"') {
      std::string text;
      ++i;
      while (i < s.size() && s[i] != '"') {
        if (s[i] == '\\' && i + 1 < s.size()) ++i;
        text += s[i++];
      }
      if (i >= s.size()) throw ParseError("unterminated string", start);
      ++i;
      out.push_back({Tok::string, std::move(text), start});
      continue;
    }
    if (c == '-' && s.substr(i).starts_with("--")) {
      for (auto [marker, kind] : {std::pair{std::string_view("--BODY--"), Tok::body},
                                  std::pair{std::string_view("--END--"), Tok::end_marker},
                                  std::pair{std::string_view("--ABORT--"), Tok::abort}}) {
        if (s.substr(i).starts_with(marker)) {
          out.push_back({kind, std::string(marker), start});
          i += marker.size();
          break;
        }
      }
      if (i != start) continue;
      throw ParseError("unknown marker", start);
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      out.push_back({Tok::integer, std::string(s.substr(start, i - start)), start});
      continue;
    }
    if (c == '@' || std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      ++i;
      while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '-')) ++i;
      std::string word(s.substr(start, i - start));
      if (i < s.size() && s[i] == ':' && c != '@') {
        ++i;
        out.push_back({Tok::header, word, start});
      } else {
        out.push_back({c == '@' ? Tok::alias : Tok::ident, word, start});
      }
      continue;
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", start);
  }
  out.push_back({Tok::end, {}, s.size()});
  return out;
}

// Boolean label expressions over AP indices.
struct Label {
  enum class Kind { constant, ap, negation, conjunction, disjunction } kind;
  bool value = false;
  std::size_t ap = 0;
  std::vector<std::shared_ptr<const Label>> kids;

  bool eval(std::uint32_t valuation) const {
    switch (kind) {
      case Kind::constant: return value;
      case Kind::ap: return (valuation >> ap) & 1U;
      case Kind::negation: return !kids[0]->eval(valuation);
      case Kind::conjunction:
        for (const auto& k : kids)
          if (!k->eval(valuation)) return false;
        return true;
      case Kind::disjunction:
        for (const auto& k : kids)
          if (k->eval(valuation)) return true;
        return false;
    }
    return false;
  }
};
using LabelPtr = std::shared_ptr<const Label>;

// Acceptance conditions.
struct Cond {
  enum class Kind { fin, inf, conjunction, disjunction, truth, falsity } kind;
  std::size_t set = 0;
  bool negated = false;
  std::vector<Cond> kids;
};

struct Edge {
  std::optional<LabelPtr> label;
  std::size_t target;
};

struct StateBlock {
  std::vector<std::size_t> acc_sets;
  std::vector<Edge> edges;
  bool seen = false;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(tokenize(text)) {}

  Dra parse(const std::vector<std::string>& atom_order) {
    parse_headers();
    parse_body();
    return build(atom_order);
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, const char* what) {
    if (peek().kind != k) throw ParseError(std::string("expected ") + what, peek().offset);
    return advance();
  }
  std::size_t expect_int(const char* what) { return std::stoul(expect(Tok::integer, what).text); }

  void parse_headers() {
    const Token& first = peek();
    if (first.kind != Tok::header || first.text != "HOA") throw ParseError("missing 'HOA:' header", first.offset);
    advance();
    const Token& version = expect(Tok::ident, "format version");
    if (version.text != "v1") throw UnsupportedError("unsupported HOA version '" + version.text + "'");

    while (peek().kind == Tok::header) {
      const Token h = advance();
      if (h.text == "States") {
        num_states_ = expect_int("state count");
      } else if (h.text == "Start") {
        if (start_) throw UnsupportedError("multiple initial states are not deterministic");
        start_ = expect_int("initial state");
        if (peek().kind == Tok::amp) throw UnsupportedError("alternating initial states are not supported");
      } else if (h.text == "AP") {
        std::size_t n = expect_int("AP count");
        for (std::size_t i = 0; i < n; ++i) aps_.push_back(expect(Tok::string, "AP name").text);
        saw_ap_ = true;
      } else if (h.text == "Acceptance") {
        num_sets_ = expect_int("acceptance set count");
        acceptance_ = parse_cond_disjunction();
      } else if (h.text == "Alias") {
        throw UnsupportedError("label aliases are not supported");
      } else {
        // acc-name, name, tool, properties and unknown headers are ignored.
        while (peek().kind != Tok::header && peek().kind != Tok::body && peek().kind != Tok::end) advance();
      }
    }
    const Token& b = peek();
    if (!accept(Tok::body)) throw ParseError("expected '--BODY--'", b.offset);
    if (!start_) throw ValidationError("HOA automaton has no 'Start:' state");
    if (!acceptance_) throw ValidationError("HOA automaton has no 'Acceptance:' header");
    if (!saw_ap_) throw ValidationError("HOA automaton has no 'AP:' header");
  }

  Cond parse_cond_disjunction() {
    std::vector<Cond> parts{parse_cond_conjunction()};
    while (accept(Tok::bar)) parts.push_back(parse_cond_conjunction());
    if (parts.size() == 1) return parts.front();
    return Cond{Cond::Kind::disjunction, 0, false, std::move(parts)};
  }

  Cond parse_cond_conjunction() {
    std::vector<Cond> parts{parse_cond_atom()};
    while (accept(Tok::amp)) parts.push_back(parse_cond_atom());
    if (parts.size() == 1) return parts.front();
    return Cond{Cond::Kind::conjunction, 0, false, std::move(parts)};
  }

  Cond parse_cond_atom() {
    const Token& t = advance();
    if (t.kind == Tok::lparen) {
      Cond c = parse_cond_disjunction();
      expect(Tok::rparen, "')'");
      return c;
    }
    if (t.kind == Tok::ident && (t.text == "t" || t.text == "f"))
      return Cond{t.text == "t" ? Cond::Kind::truth : Cond::Kind::falsity, 0, false, {}};
    if (t.kind == Tok::ident && (t.text == "Fin" || t.text == "Inf")) {
      expect(Tok::lparen, "'('");
      bool neg = accept(Tok::bang);
      std::size_t set = expect_int("acceptance set");
      expect(Tok::rparen, "')'");
      return Cond{t.text == "Fin" ? Cond::Kind::fin : Cond::Kind::inf, set, neg, {}};
    }
    throw ParseError("malformed acceptance condition", t.offset);
  }

  LabelPtr parse_label_or() {
    std::vector<LabelPtr> parts{parse_label_and()};
    while (accept(Tok::bar)) parts.push_back(parse_label_and());
    if (parts.size() == 1) return parts.front();
    return std::make_shared<const Label>(Label{Label::Kind::disjunction, false, 0, std::move(parts)});
  }

  LabelPtr parse_label_and() {
    std::vector<LabelPtr> parts{parse_label_unary()};
    while (accept(Tok::amp)) parts.push_back(parse_label_unary());
    if (parts.size() == 1) return parts.front();
    return std::make_shared<const Label>(Label{Label::Kind::conjunction, false, 0, std::move(parts)});
  }

  LabelPtr parse_label_unary() {
    const Token& t = advance();
    switch (t.kind) {
      case Tok::bang:
        return std::make_shared<const Label>(Label{Label::Kind::negation, false, 0, {parse_label_unary()}});
      case Tok::lparen: {
        auto inner = parse_label_or();
        expect(Tok::rparen, "')'");
        return inner;
      }
      case Tok::integer: {
        std::size_t ap = std::stoul(t.text);
        if (ap >= aps_.size()) throw ParseError("AP index " + t.text + " out of range", t.offset);
        return std::make_shared<const Label>(Label{Label::Kind::ap, false, ap, {}});
      }
      case Tok::ident:
        if (t.text == "t" || t.text == "f")
          return std::make_shared<const Label>(Label{Label::Kind::constant, t.text == "t", 0, {}});
        break;
      case Tok::alias: throw UnsupportedError("label aliases are not supported");
      default: break;
    }
    throw ParseError("malformed label expression", t.offset);
  }

  std::vector<std::size_t> parse_acc_sig() {
    std::vector<std::size_t> sets;
    while (peek().kind == Tok::integer) sets.push_back(std::stoul(advance().text));
    expect(Tok::rbrace, "'}'");
    for (auto s : sets)
      if (s >= num_sets_) throw ValidationError("acceptance set " + std::to_string(s) + " not declared");
    return sets;
  }

  void parse_body() {
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::end_marker) {
        advance();
        return;
      }
      if (t.kind == Tok::abort) throw ParseError("automaton stream aborted", t.offset);
      if (t.kind != Tok::header || t.text != "State") throw ParseError("expected 'State:' or '--END--'", t.offset);
      advance();
      if (peek().kind == Tok::lbracket) throw UnsupportedError("state labels are not supported");
      std::size_t id = expect_int("state number");
      if (peek().kind == Tok::string) advance();
      if (states_.size() <= id) states_.resize(id + 1);
      StateBlock& block = states_[id];
      if (block.seen) throw ValidationError("state " + std::to_string(id) + " defined twice");
      block.seen = true;
      if (accept(Tok::lbrace)) block.acc_sets = parse_acc_sig();

      while (peek().kind == Tok::lbracket || peek().kind == Tok::integer) {
        Edge e;
        if (accept(Tok::lbracket)) {
          e.label = parse_label_or();
          expect(Tok::rbracket, "']'");
        }
        e.target = expect_int("edge target");
        if (peek().kind == Tok::amp) throw UnsupportedError("universal branching is not supported");
        if (peek().kind == Tok::lbrace)
          throw UnsupportedError("transition-based acceptance is not supported; use state-based acceptance");
        block.edges.push_back(std::move(e));
      }
    }
  }

  // Each disjunct must be exactly Fin(x) & Inf(y).
  std::vector<std::pair<std::size_t, std::size_t>> rabin_pairs() const {
    std::vector<Cond> disjuncts;
    if (acceptance_->kind == Cond::Kind::disjunction) disjuncts = acceptance_->kids;
    else disjuncts.push_back(*acceptance_);

    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const auto& d : disjuncts) {
      std::optional<std::size_t> fin, inf;
      bool shape = d.kind == Cond::Kind::conjunction && d.kids.size() == 2;
      if (shape) {
        for (const auto& k : d.kids) {
          if (k.negated || !k.kids.empty()) shape = false;
          else if (k.kind == Cond::Kind::fin && !fin) fin = k.set;
          else if (k.kind == Cond::Kind::inf && !inf) inf = k.set;
          else shape = false;
        }
      }
      if (!shape || !fin || !inf || *fin == *inf)
        throw UnsupportedError("acceptance condition is not a disjunction of Fin(i) & Inf(j) Rabin pairs");
      if (*fin >= num_sets_ || *inf >= num_sets_) throw ValidationError("acceptance set index exceeds declared count");
      pairs.emplace_back(*fin, *inf);
    }
    return pairs;
  }

  Dra build(const std::vector<std::string>& atom_order) {
    if (num_states_ == 0) num_states_ = states_.size();
    if (states_.size() > num_states_) throw ValidationError("state index exceeds declared 'States:' count");
    states_.resize(num_states_);
    if (*start_ >= num_states_) throw ValidationError("initial state out of range");

    std::vector<std::size_t> ap_to_atom;
    for (const auto& ap : aps_) {
      auto it = std::find(atom_order.begin(), atom_order.end(), ap);
      if (it == atom_order.end()) throw ValidationError("HOA atomic proposition '" + ap + "' not in the alphabet");
      ap_to_atom.push_back(static_cast<std::size_t>(it - atom_order.begin()));
    }
    if (atom_order.size() > kMaxDraAtoms) throw ValidationError("alphabet too large");

    const std::size_t hoa_letters = std::size_t{1} << aps_.size();
    std::vector<std::size_t> hoa_delta(num_states_ * hoa_letters);
    for (std::size_t q = 0; q < num_states_; ++q) {
      const auto& block = states_[q];
      if (!block.seen) throw ValidationError("state " + std::to_string(q) + " has no definition");
      bool implicit = !block.edges.empty() && !block.edges.front().label;
      for (const auto& e : block.edges) {
        if (e.label.has_value() == implicit) throw ParseError("state " + std::to_string(q) + " mixes implicit and explicit edges");
        if (e.target >= num_states_) throw ValidationError("edge target out of range in state " + std::to_string(q));
      }
      if (implicit) {
        if (block.edges.size() != hoa_letters)
          throw ValidationError("state " + std::to_string(q) + " has an incomplete implicit edge list");
        for (std::size_t v = 0; v < hoa_letters; ++v) hoa_delta[q * hoa_letters + v] = block.edges[v].target;
        continue;
      }
      for (std::uint32_t v = 0; v < hoa_letters; ++v) {
        std::optional<std::size_t> target;
        for (const auto& e : block.edges) {
          if (!(*e.label)->eval(v)) continue;
          if (target && *target != e.target)
            throw ValidationError("state " + std::to_string(q) + " is nondeterministic");
          target = e.target;
        }
        if (!target) throw ValidationError("state " + std::to_string(q) + " is incomplete");
        hoa_delta[q * hoa_letters + v] = *target;
      }
    }

    const std::size_t letters = std::size_t{1} << atom_order.size();
    std::vector<DraState> delta(num_states_ * letters);
    for (std::size_t q = 0; q < num_states_; ++q) {
      for (Letter l = 0; l < letters; ++l) {
        std::uint32_t v = 0;
        for (std::size_t i = 0; i < ap_to_atom.size(); ++i)
          if ((l >> ap_to_atom[i]) & 1U) v |= 1U << i;
        delta[q * letters + l] = static_cast<DraState>(hoa_delta[q * hoa_letters + v]);
      }
    }

    std::vector<RabinPair> pairs;
    for (auto [fin, inf] : rabin_pairs()) {
      RabinPair p{std::vector<bool>(num_states_), std::vector<bool>(num_states_)};
      for (std::size_t q = 0; q < num_states_; ++q) {
        for (auto s : states_[q].acc_sets) {
          if (s == fin) p.bad[q] = true;
          if (s == inf) p.good[q] = true;
        }
      }
      pairs.push_back(std::move(p));
    }
    return Dra(atom_order, num_states_, std::move(delta), static_cast<DraState>(*start_), std::move(pairs));
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t num_states_ = 0;
  std::optional<std::size_t> start_;
  std::vector<std::string> aps_;
  bool saw_ap_ = false;
  std::size_t num_sets_ = 0;
  std::optional<Cond> acceptance_;
  std::vector<StateBlock> states_;
};

}  // namespace detail

/// Parses a HOA v1 Rabin automaton and re-expresses its transitions over the
/// letters of `atom_order`. Atoms in `atom_order` that the automaton does not
/// mention are ignored by its transitions.
inline Dra parse(std::string_view text, const std::vector<std::string>& atom_order) {
  return detail::Parser(text).parse(atom_order);
}

}  // namespace rabin::hoa
