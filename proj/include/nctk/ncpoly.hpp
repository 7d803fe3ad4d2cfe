// Free noncommutative polynomials: finitely supported scalar combinations of
// words, with degree-capped multiplication for truncated settings.
#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "nctk/rat.hpp"
#include "nctk/word.hpp"

namespace nctk {

template <typename S> class NcPolyT {
public:
  using Terms = std::map<Word, S, DegLexLess>;

  NcPolyT() = default;
  static NcPolyT zero() { return NcPolyT(); }
  static NcPolyT one() { return monomial({}, S(1)); }
  static NcPolyT generator(int g) { return monomial(Word{static_cast<uint8_t>(g)}, S(1)); }
  static NcPolyT monomial(const Word& w, const S& c) {
    NcPolyT p;
    if (!(c == S(0))) p.terms_[w] = c;
    return p;
  }

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  int degree() const {
    return terms_.empty() ? -1 : static_cast<int>(terms_.rbegin()->first.size());
  }
  S coeff(const Word& w) const {
    auto it = terms_.find(w);
    return it == terms_.end() ? S(0) : it->second;
  }

  void add_term(const Word& w, const S& c) {
    if (c == S(0)) return;
    auto [it, fresh] = terms_.emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (it->second == S(0)) terms_.erase(it);
    }
  }

  NcPolyT& operator+=(const NcPolyT& o) {
    for (const auto& [w, c] : o.terms_) add_term(w, c);
    return *this;
  }
  NcPolyT& operator-=(const NcPolyT& o) {
    for (const auto& [w, c] : o.terms_) add_term(w, -c);
    return *this;
  }
  friend NcPolyT operator+(NcPolyT a, const NcPolyT& b) { return a += b; }
  friend NcPolyT operator-(NcPolyT a, const NcPolyT& b) { return a -= b; }
  friend NcPolyT operator*(const S& s, const NcPolyT& p) {
    NcPolyT r;
    if (s == S(0)) return r;
    for (const auto& [w, c] : p.terms_) r.terms_[w] = s * c;
    return r;
  }
  friend bool operator==(const NcPolyT& a, const NcPolyT& b) { return a.terms_ == b.terms_; }

  // Graded component of the given word degree.
  NcPolyT component(int degree) const {
    NcPolyT r;
    for (const auto& [w, c] : terms_) {
      if (static_cast<int>(w.size()) == degree) r.terms_[w] = c;
    }
    return r;
  }

  std::string print(const std::vector<std::string>& names) const;

private:
  Terms terms_;
};

using NcPoly = NcPolyT<Rat>;

// Product with words beyond degree_cap discarded (exact when cap is large
// enough; the truncation is the intended semantics inside NC-nilpotent
// quotients, where those words are zero anyway).
template <typename S>
NcPolyT<S> nc_mul(const NcPolyT<S>& a, const NcPolyT<S>& b, int degree_cap = -1) {
  NcPolyT<S> r;
  for (const auto& [wa, ca] : a.terms()) {
    for (const auto& [wb, cb] : b.terms()) {
      if (degree_cap >= 0 &&
          static_cast<int>(wa.size() + wb.size()) > degree_cap)
        continue;
      r.add_term(word_concat(wa, wb), ca * cb);
    }
  }
  return r;
}

template <typename S>
NcPolyT<S> commutator(const NcPolyT<S>& a, const NcPolyT<S>& b, int degree_cap = -1) {
  return nc_mul(a, b, degree_cap) - nc_mul(b, a, degree_cap);
}

template <typename S>
std::string NcPolyT<S>::print(const std::vector<std::string>& names) const {
  if (terms_.empty()) return "0";
  std::string s;
  bool first = true;
  for (const auto& [w, c] : terms_) {
    std::string cs;
    if constexpr (std::is_same_v<S, Rat>) cs = rat_print(c);
    else { std::ostringstream os; os << c; cs = os.str(); }
    if (!first) s += " + ";
    s += cs + (w.empty() ? "" : "*" + word_print(w, names));
    first = false;
  }
  return s;
}

// Evaluate a polynomial in an arbitrary unital algebra described by a small
// context: Ctx must provide Elem, zero(), one(), add(a,b), mul(a,b) and
// scale(S, a). Words evaluate left-to-right.
template <typename S, typename Ctx>
typename Ctx::Elem eval_ncpoly(const NcPolyT<S>& p, const Ctx& ctx,
                               const std::vector<typename Ctx::Elem>& gens) {
  auto acc = ctx.zero();
  for (const auto& [w, c] : p.terms()) {
    auto m = ctx.one();
    for (uint8_t g : w) m = ctx.mul(m, gens.at(g));
    acc = ctx.add(acc, ctx.scale(c, m));
  }
  return acc;
}

// First-order Leibniz expansion: the value of the derivation determined by
// generator values delta on the word polynomial p, alongside the
// homomorphism with generator images f. Exact whenever products of two
// delta-values vanish (central square-zero kernels).
template <typename S, typename Ctx>
typename Ctx::Elem eval_ncpoly_derivation(const NcPolyT<S>& p, const Ctx& ctx,
                                          const std::vector<typename Ctx::Elem>& f,
                                          const std::vector<typename Ctx::Elem>& delta) {
  auto acc = ctx.zero();
  for (const auto& [w, c] : p.terms()) {
    for (std::size_t pos = 0; pos < w.size(); ++pos) {
      auto m = ctx.one();
      for (std::size_t i = 0; i < pos; ++i) m = ctx.mul(m, f.at(w[i]));
      m = ctx.mul(m, delta.at(w[pos]));
      for (std::size_t i = pos + 1; i < w.size(); ++i) m = ctx.mul(m, f.at(w[i]));
      acc = ctx.add(acc, ctx.scale(c, m));
    }
  }
  return acc;
}

} // namespace nctk
