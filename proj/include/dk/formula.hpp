#pragma once

#include <algorithm>
#include <cctype>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dk/errors.hpp"
#include "dk/random.hpp"

namespace dk {

enum class Op { Atom, True, Not, Or, Box, D };

// Immutable epistemic formula. Primitive connectives are atoms, "true",
// negation, disjunction, single-agent box and the group operator D{...}.
// Everything else (&, ->, <->, <a>, "false") is construction-time sugar that
// expands into the primitives, so two formulas are equal iff their expanded
// trees are equal. Nodes are shared; copying is cheap.
class Formula {
  struct Node;
  using Ptr = std::shared_ptr<const Node>;

  struct Node {
    Op op;
    std::string label;               // Atom: name. Box: agent.
    std::vector<std::string> group;  // D only: sorted, unique, non-empty.
    Ptr lhs, rhs;                    // Or: both. Not/Box/D: lhs.
  };

 public:
  static Formula atom(std::string name) {
    return mk({Op::Atom, std::move(name), {}, nullptr, nullptr});
  }

  static Formula truth() { return mk({Op::True, {}, {}, nullptr, nullptr}); }

  static Formula falsity() { return negation(truth()); }

  static Formula negation(Formula f) {
    return mk({Op::Not, {}, {}, std::move(f.n_), nullptr});
  }

  static Formula disjunction(Formula l, Formula r) {
    return mk({Op::Or, {}, {}, std::move(l.n_), std::move(r.n_)});
  }

  static Formula conjunction(Formula l, Formula r) {
    return negation(disjunction(negation(std::move(l)), negation(std::move(r))));
  }

  static Formula implication(Formula l, Formula r) {
    return disjunction(negation(std::move(l)), std::move(r));
  }

  static Formula equivalence(Formula l, Formula r) {
    Formula fwd = implication(l, r);
    Formula bwd = implication(std::move(r), std::move(l));
    return conjunction(std::move(fwd), std::move(bwd));
  }

  static Formula box(std::string agent, Formula f) {
    return mk({Op::Box, std::move(agent), {}, std::move(f.n_), nullptr});
  }

  static Formula diamond(std::string agent, Formula f) {
    return negation(box(std::move(agent), negation(std::move(f))));
  }

  static Formula d(std::vector<std::string> group, Formula f) {
    std::sort(group.begin(), group.end());
    group.erase(std::unique(group.begin(), group.end()), group.end());
    if (group.empty()) throw Error("D group must be non-empty");
    return mk({Op::D, {}, std::move(group), std::move(f.n_), nullptr});
  }

  Op op() const { return n_->op; }

  // Atom name (Op::Atom) or agent (Op::Box).
  const std::string& label() const { return n_->label; }

  // D only.
  const std::vector<std::string>& group() const { return n_->group; }

  // Not / Box / D operand, and the left disjunct of Or.
  Formula child() const { return Formula(n_->lhs); }
  Formula rhs() const { return Formula(n_->rhs); }

  // Stable identity of the shared node; memoization key for evaluators.
  const void* id() const { return n_.get(); }

  friend bool operator==(const Formula& a, const Formula& b) {
    return a.n_ == b.n_ || equal(a.n_.get(), b.n_.get());
  }
  friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

 private:
  explicit Formula(Ptr n) : n_(std::move(n)) {}

  static Formula mk(Node n) { return Formula(std::make_shared<const Node>(std::move(n))); }

  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a->op != b->op || a->label != b->label || a->group != b->group) return false;
    if (!!a->lhs != !!b->lhs || !!a->rhs != !!b->rhs) return false;
    if (a->lhs && !equal(a->lhs.get(), b->lhs.get())) return false;
    if (a->rhs && !equal(a->rhs.get(), b->rhs.get())) return false;
    return true;
  }

  Ptr n_;
};

struct FormulaMeta {
  std::set<std::string> atoms;
  std::set<std::string> agents;
  bool is_l0 = true;   // no D operator anywhere
  int modal_depth = 0; // box and D both count one level
};

inline void collect_meta(const Formula& f, FormulaMeta& m, int depth) {
  switch (f.op()) {
    case Op::Atom:
      m.atoms.insert(f.label());
      break;
    case Op::True:
      break;
    case Op::Not:
      collect_meta(f.child(), m, depth);
      break;
    case Op::Or:
      collect_meta(f.child(), m, depth);
      collect_meta(f.rhs(), m, depth);
      break;
    case Op::Box:
      m.agents.insert(f.label());
      m.modal_depth = std::max(m.modal_depth, depth + 1);
      collect_meta(f.child(), m, depth + 1);
      break;
    case Op::D:
      m.is_l0 = false;
      m.agents.insert(f.group().begin(), f.group().end());
      m.modal_depth = std::max(m.modal_depth, depth + 1);
      collect_meta(f.child(), m, depth + 1);
      break;
  }
}

inline FormulaMeta meta(const Formula& f) {
  FormulaMeta m;
  collect_meta(f, m, 0);
  return m;
}

// ---------------------------------------------------------------------------
// Concrete syntax.
//
//   form := iff
//   iff  := imp ("<->" imp)*
//   imp  := or ("->" imp)?                        right-associative
//   or   := and ("|" and)*
//   and  := un ("&" un)*
//   un   := "~" un | "[" ID "]" un | "<" ID ">" un
//         | "D" "{" ID ("," ID)* "}" un
//         | "true" | "false" | ID | "(" form ")"
//
// "true", "false" and "D" are reserved words. Whitespace is insignificant.

namespace detail {

enum class Tok {
  Id, True, False, DKw, Tilde, Bar, Amp, Arrow, Iff,
  LPar, RPar, LBrack, RBrack, LBrace, RBrace, Comma, Less, Greater, End
};

struct Token {
  Tok kind;
  std::string text;
  int line;
  int col;
};

inline bool id_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool id_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

inline std::vector<Token> lex(std::string_view text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto push = [&](Tok k, std::string t, int l, int c) {
    out.push_back({k, std::move(t), l, c});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      col = 1;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++col;
      ++i;
      continue;
    }
    int l = line, cc = col;
    if (text.compare(i, 3, "<->") == 0) {
      push(Tok::Iff, "<->", l, cc);
      i += 3;
      col += 3;
      continue;
    }
    if (text.compare(i, 2, "->") == 0) {
      push(Tok::Arrow, "->", l, cc);
      i += 2;
      col += 2;
      continue;
    }
    if (id_start(c)) {
      std::size_t j = i;
      while (j < text.size() && id_char(text[j])) ++j;
      std::string word(text.substr(i, j - i));
      Tok k = Tok::Id;
      if (word == "true") k = Tok::True;
      else if (word == "false") k = Tok::False;
      else if (word == "D") k = Tok::DKw;
      push(k, std::move(word), l, cc);
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '~': k = Tok::Tilde; break;
      case '|': k = Tok::Bar; break;
      case '&': k = Tok::Amp; break;
      case '(': k = Tok::LPar; break;
      case ')': k = Tok::RPar; break;
      case '[': k = Tok::LBrack; break;
      case ']': k = Tok::RBrack; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ',': k = Tok::Comma; break;
      case '<': k = Tok::Less; break;
      case '>': k = Tok::Greater; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", l, cc);
    }
    push(k, std::string(1, c), l, cc);
    ++col;
    ++i;
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view text) : toks_(lex(text)) {}

  Formula parse() {
    Formula f = form();
    expect(Tok::End, "end of input");
    return f;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError("expected " + what + ", got " + got, t.line, t.col);
  }

  Token expect(Tok k, const char* what) {
    if (peek().kind != k) fail(what);
    return next();
  }

  Formula form() { return iff(); }

  Formula iff() {
    Formula f = imp();
    while (peek().kind == Tok::Iff) {
      next();
      f = Formula::equivalence(std::move(f), imp());
    }
    return f;
  }

  Formula imp() {
    Formula f = disj();
    if (peek().kind == Tok::Arrow) {
      next();
      return Formula::implication(std::move(f), imp());
    }
    return f;
  }

  Formula disj() {
    Formula f = conj();
    while (peek().kind == Tok::Bar) {
      next();
      f = Formula::disjunction(std::move(f), conj());
    }
    return f;
  }

  Formula conj() {
    Formula f = unary();
    while (peek().kind == Tok::Amp) {
      next();
      f = Formula::conjunction(std::move(f), unary());
    }
    return f;
  }

  Formula unary() {
    switch (peek().kind) {
      case Tok::Tilde:
        next();
        return Formula::negation(unary());
      case Tok::LBrack: {
        next();
        Token agent = expect(Tok::Id, "agent name");
        expect(Tok::RBrack, "']'");
        return Formula::box(agent.text, unary());
      }
      case Tok::Less: {
        next();
        Token agent = expect(Tok::Id, "agent name");
        expect(Tok::Greater, "'>'");
        return Formula::diamond(agent.text, unary());
      }
      case Tok::DKw: {
        next();
        expect(Tok::LBrace, "'{'");
        if (peek().kind == Tok::RBrace) fail("a non-empty agent group");
        std::vector<std::string> group;
        group.push_back(expect(Tok::Id, "agent name").text);
        while (peek().kind == Tok::Comma) {
          next();
          group.push_back(expect(Tok::Id, "agent name").text);
        }
        expect(Tok::RBrace, "'}'");
        return Formula::d(std::move(group), unary());
      }
      case Tok::True:
        next();
        return Formula::truth();
      case Tok::False:
        next();
        return Formula::falsity();
      case Tok::Id:
        return Formula::atom(next().text);
      case Tok::LPar: {
        next();
        Formula f = form();
        expect(Tok::RPar, "')'");
        return f;
      }
      default:
        fail("a formula");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Formula parse_formula(std::string_view text) {
  return detail::FormulaParser(text).parse();
}

// Prints primitives only, with the fewest parentheses the grammar allows, so
// parse(to_string(f)) == f for every formula.
inline void print_formula(const Formula& f, std::string& out, bool parenthesize) {
  if (parenthesize && f.op() == Op::Or) {
    out += '(';
    print_formula(f, out, false);
    out += ')';
    return;
  }
  switch (f.op()) {
    case Op::Atom:
      out += f.label();
      break;
    case Op::True:
      out += "true";
      break;
    case Op::Not:
      out += '~';
      print_formula(f.child(), out, true);
      break;
    case Op::Or:
      print_formula(f.child(), out, f.child().op() != Op::Or);
      out += " | ";
      print_formula(f.rhs(), out, true);
      break;
    case Op::Box:
      out += '[';
      out += f.label();
      out += ']';
      print_formula(f.child(), out, true);
      break;
    case Op::D: {
      out += "D{";
      bool first = true;
      for (const auto& a : f.group()) {
        if (!first) out += ',';
        out += a;
        first = false;
      }
      out += "} ";
      print_formula(f.child(), out, true);
      break;
    }
  }
}

inline std::string to_string(const Formula& f) {
  std::string out;
  print_formula(f, out, false);
  return out;
}

// Seeded structural generator, D operators included only when allow_d is set.
// depth bounds the tree height, which also bounds the modal depth.
inline Formula random_formula(std::mt19937_64& g,
                              const std::vector<std::string>& atoms,
                              const std::vector<std::string>& agents,
                              int depth, bool allow_d) {
  auto leaf = [&]() -> Formula {
    if (atoms.empty() || rand_below(g, 8) == 0) return Formula::truth();
    return Formula::atom(atoms[rand_below(g, atoms.size())]);
  };
  if (depth <= 0) return leaf();
  std::uint64_t modal_arms = agents.empty() ? 0 : (allow_d ? 2 : 1);
  switch (rand_below(g, 3 + modal_arms)) {
    case 0:
      return leaf();
    case 1:
      return Formula::negation(random_formula(g, atoms, agents, depth - 1, allow_d));
    case 2:
      return Formula::disjunction(random_formula(g, atoms, agents, depth - 1, allow_d),
                                  random_formula(g, atoms, agents, depth - 1, allow_d));
    case 3:
      return Formula::box(agents[rand_below(g, agents.size())],
                          random_formula(g, atoms, agents, depth - 1, allow_d));
    default: {
      std::vector<std::string> group;
      for (const auto& a : agents)
        if (rand_chance(g, 0.5)) group.push_back(a);
      if (group.empty()) group.push_back(agents[rand_below(g, agents.size())]);
      return Formula::d(std::move(group),
                        random_formula(g, atoms, agents, depth - 1, allow_d));
    }
  }
}

}  // namespace dk
