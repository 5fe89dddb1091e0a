#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "dk/errors.hpp"

namespace dk {

// One point in the four-dimensional taxonomy of group-knowledge semantics:
//   f  what is shared: accessibility relations themselves (cap) or D-free
//      formulas (L0)
//   a  how much each agent contributes: a single formula or a set of them;
//      unused (None) for cap
//   o  protocol shape: one simultaneous round (sim), a finite round-robin
//      sequence (omega), or an unbounded transfinite sequence (Omega);
//      unused for cap
//   q  whether some or all group members must end up knowing the target
// The constructor rejects tuples outside the twelve meaningful combinations.
enum class FormMode { Cap, L0 };
enum class AmountMode { None, Single, Set };
enum class OrderMode { None, Sim, SeqOmega, SeqTransfinite };
enum class QuantMode { Some, All };

struct Variant {
  FormMode f;
  AmountMode a;
  OrderMode o;
  QuantMode q;

  Variant(FormMode f, AmountMode a, OrderMode o, QuantMode q) : f(f), a(a), o(o), q(q) {
    if (f == FormMode::Cap) {
      if (a != AmountMode::None || o != OrderMode::None)
        throw Error("variant " + str() + " is not in the taxonomy");
      return;
    }
    if (a == AmountMode::None || o == OrderMode::None)
      throw Error("variant " + str() + " is not in the taxonomy");
    if (a == AmountMode::Single && o == OrderMode::SeqTransfinite)
      throw Error("variant " + str() + " is not in the taxonomy");
  }

  std::string str() const {
    std::string s = "(";
    s += f == FormMode::Cap ? "cap" : "L0";
    s += ',';
    s += a == AmountMode::None ? "-" : (a == AmountMode::Single ? "single" : "set");
    s += ',';
    switch (o) {
      case OrderMode::None: s += '-'; break;
      case OrderMode::Sim: s += "sim"; break;
      case OrderMode::SeqOmega: s += "omega"; break;
      case OrderMode::SeqTransfinite: s += "Omega"; break;
    }
    s += ',';
    s += q == QuantMode::Some ? "some" : "all";
    s += ')';
    return s;
  }

  friend bool operator==(const Variant& x, const Variant& y) {
    return x.f == y.f && x.a == y.a && x.o == y.o && x.q == y.q;
  }
  friend bool operator!=(const Variant& x, const Variant& y) { return !(x == y); }

  static Variant intersection() {
    return {FormMode::Cap, AmountMode::None, OrderMode::None, QuantMode::All};
  }

  static Variant fullcomm() {
    return {FormMode::L0, AmountMode::Single, OrderMode::Sim, QuantMode::All};
  }

  // The twelve variants in reporting order.
  static const std::vector<Variant>& all() {
    static const std::vector<Variant> v = [] {
      using F = FormMode;
      using A = AmountMode;
      using O = OrderMode;
      using Q = QuantMode;
      std::vector<Variant> out;
      out.push_back({F::Cap, A::None, O::None, Q::All});
      out.push_back({F::Cap, A::None, O::None, Q::Some});
      for (A a : {A::Single, A::Set})
        for (O o : {O::Sim, O::SeqOmega, O::SeqTransfinite}) {
          if (a == A::Single && o == O::SeqTransfinite) continue;
          for (Q q : {Q::Some, Q::All}) out.push_back({F::L0, a, o, q});
        }
      return out;
    }();
    return v;
  }

  std::size_t index() const {
    const auto& v = all();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] == *this) return i;
    throw Error("variant " + str() + " is not in the taxonomy");
  }

  static Variant parse(std::string_view text);
};

namespace detail {

inline std::vector<std::string> split_variant_fields(std::string_view body) {
  std::vector<std::string> fields(1);
  for (char c : body) {
    if (c == ',') {
      fields.emplace_back();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      fields.back() += c;
    }
  }
  return fields;
}

[[noreturn]] inline void variant_parse_fail(std::string_view text) {
  std::string msg = "unknown variant '" + std::string(text) + "'; valid variants are";
  for (const auto& v : Variant::all()) msg += ' ' + v.str();
  msg += " plus the aliases 'intersection' and 'fullcomm'";
  throw ParseError(msg);
}

}  // namespace detail

inline Variant Variant::parse(std::string_view text) {
  // Aliases for the two ends of the spectrum.
  if (text == "intersection") return intersection();
  if (text == "fullcomm") return fullcomm();
  if (text.size() < 2 || text.front() != '(' || text.back() != ')')
    detail::variant_parse_fail(text);
  auto fields = detail::split_variant_fields(text.substr(1, text.size() - 2));
  if (fields.size() != 4) detail::variant_parse_fail(text);

  FormMode f = FormMode::Cap;
  if (fields[0] == "L0") f = FormMode::L0;
  else if (fields[0] != "cap") detail::variant_parse_fail(text);

  AmountMode a = AmountMode::None;
  if (fields[1] == "single") a = AmountMode::Single;
  else if (fields[1] == "set") a = AmountMode::Set;
  else if (fields[1] != "-") detail::variant_parse_fail(text);

  OrderMode o = OrderMode::None;
  if (fields[2] == "sim") o = OrderMode::Sim;
  else if (fields[2] == "omega") o = OrderMode::SeqOmega;
  else if (fields[2] == "Omega") o = OrderMode::SeqTransfinite;
  else if (fields[2] != "-") detail::variant_parse_fail(text);

  QuantMode q = QuantMode::Some;
  if (fields[3] == "all") q = QuantMode::All;
  else if (fields[3] != "some") detail::variant_parse_fail(text);

  try {
    return {f, a, o, q};
  } catch (const Error&) {
    detail::variant_parse_fail(text);
  }
}

}  // namespace dk
