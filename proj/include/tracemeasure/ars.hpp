#ifndef TRACEMEASURE_ARS_HPP
#define TRACEMEASURE_ARS_HPP

#include "errors.hpp"

#include <algorithm>
#include <compare>
#include <concepts>
#include <cstdint>
#include <istream>
#include <optional>
#include <ranges>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tracemeasure {

/// Interned object handle, stable within one WeightedArs.
struct ObjId {
  std::uint32_t index = 0;

  friend auto operator<=>(const ObjId&, const ObjId&) = default;
};

template <class Obj>
struct Edge {
  Obj target;
  std::uint64_t mult;
};

/// Anything that can enumerate the weighted one-step reducts of an object.
/// Finite systems and lazily generated infinite ones both qualify; only the
/// exact measure-theoretic operations insist on finiteness.
template <class S>
concept RewriteSystem = requires(const S& sys, const typename S::object_type& a) {
  typename S::object_type;
  { sys.successors(a) } -> std::ranges::forward_range;
  { sys.name(a) } -> std::convertible_to<std::string>;
  requires std::totally_ordered<typename S::object_type>;
};

/// A finite abstract rewrite system with natural multiplicities, stored
/// sparsely: pairs that are absent have multiplicity zero.
class WeightedArs {
 public:
  using object_type = ObjId;

  ObjId intern(std::string_view name) {
    auto it = ids_.find(std::string(name));
    if (it != ids_.end()) return it->second;
    ObjId id{static_cast<std::uint32_t>(names_.size())};
    names_.emplace_back(name);
    out_.emplace_back();
    ids_.emplace(std::string(name), id);
    return id;
  }

  /// Adds `mult` to the multiplicity of a -> b. Zero declares both objects only.
  void add_rule(ObjId a, ObjId b, std::uint64_t mult = 1) {
    check(a);
    check(b);
    if (mult == 0) return;
    auto& edges = out_[a.index];
    auto it = std::lower_bound(edges.begin(), edges.end(), b,
                               [](const Edge<ObjId>& e, ObjId t) { return e.target < t; });
    if (it != edges.end() && it->target == b)
      it->mult += mult;
    else
      edges.insert(it, Edge<ObjId>{b, mult});
  }

  void add_rule(std::string_view a, std::string_view b, std::uint64_t mult = 1) {
    ObjId ia = intern(a);
    ObjId ib = intern(b);
    add_rule(ia, ib, mult);
  }

  std::optional<ObjId> find(std::string_view name) const {
    auto it = ids_.find(std::string(name));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  ObjId id(std::string_view name) const {
    auto found = find(name);
    if (!found) throw InputError("object not in system: " + std::string(name));
    return *found;
  }

  bool contains(ObjId a) const { return a.index < names_.size(); }

  void check(ObjId a) const {
    if (!contains(a)) throw InputError("object not in system: #" + std::to_string(a.index));
  }

  /// Nonzero-multiplicity reducts of `a`, sorted by target.
  const std::vector<Edge<ObjId>>& successors(ObjId a) const {
    check(a);
    return out_[a.index];
  }

  std::uint64_t multiplicity(ObjId a, ObjId b) const {
    for (const auto& e : successors(a))
      if (e.target == b) return e.mult;
    return 0;
  }

  const std::string& name(ObjId a) const {
    check(a);
    return names_[a.index];
  }

  std::size_t size() const { return names_.size(); }

  std::vector<ObjId> objects() const {
    std::vector<ObjId> all;
    all.reserve(names_.size());
    for (std::uint32_t i = 0; i < names_.size(); ++i) all.push_back(ObjId{i});
    return all;
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<Edge<ObjId>>> out_;
  std::unordered_map<std::string, ObjId> ids_;
};

/// rho(a): total multiplicity out of `a`. Zero exactly for normal objects.
template <RewriteSystem S>
std::uint64_t degree(const S& sys, const typename S::object_type& a) {
  std::uint64_t total = 0;
  for (const auto& e : sys.successors(a)) total += e.mult;
  return total;
}

inline std::vector<ObjId> non_normal_objects(const WeightedArs& ars) {
  std::vector<ObjId> result;
  for (ObjId a : ars.objects())
    if (!ars.successors(a).empty()) result.push_back(a);
  return result;
}

namespace detail {

inline bool is_name_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '\'';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline bool is_name(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), is_name_char);
}

}  // namespace detail

/// Reads the line-oriented rule format:
///
///     # comment
///     a -> b : 2
///     a -> c        (multiplicity defaults to 1)
///     d             (declares an object with no rules)
inline WeightedArs parse_ars(std::istream& in) {
  WeightedArs ars;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    auto fail = [&](const std::string& msg) { throw ParseError(msg, SourcePos{lineno, 1}); };

    const auto arrow = text.find("->");
    if (arrow == std::string_view::npos) {
      if (!detail::is_name(text)) fail("expected an object name or a rule 'a -> b'");
      ars.intern(text);
      continue;
    }
    std::string_view lhs = detail::trim(text.substr(0, arrow));
    std::string_view rest = text.substr(arrow + 2);
    std::uint64_t mult = 1;
    if (auto colon = rest.find(':'); colon != std::string_view::npos) {
      std::string_view m = detail::trim(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
      if (m.empty() || !std::all_of(m.begin(), m.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail("multiplicity must be a natural number");
      try {
        mult = std::stoull(std::string(m));
      } catch (const std::exception&) {
        fail("multiplicity out of range");
      }
    }
    std::string_view rhs = detail::trim(rest);
    if (!detail::is_name(lhs)) fail("bad object name '" + std::string(lhs) + "'");
    if (!detail::is_name(rhs)) fail("bad object name '" + std::string(rhs) + "'");
    ars.add_rule(lhs, rhs, mult);
  }
  return ars;
}

inline WeightedArs parse_ars(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_ars(in);
}

/// Renders `ars` back into the text format, one rule per line.
inline std::string format_ars(const WeightedArs& ars) {
  std::ostringstream out;
  for (ObjId a : ars.objects()) {
    const auto& edges = ars.successors(a);
    if (edges.empty()) continue;
    for (const auto& e : edges) {
      out << ars.name(a) << " -> " << ars.name(e.target);
      if (e.mult != 1) out << " : " << e.mult;
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace tracemeasure

#endif
