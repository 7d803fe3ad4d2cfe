// Commutative polynomials with integer exponent vectors, Laurent-capable:
// the coordinate rings of chart bases and their overlap localizations.
#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nctk/ncpoly.hpp"
#include "nctk/rat.hpp"

namespace nctk {

using ExpVec = std::vector<int>; // one (possibly negative) exponent per variable

class CPoly {
public:
  using Terms = std::map<ExpVec, Rat>;

  CPoly() = default;
  explicit CPoly(int nvars) : nvars_(nvars) {}

  static CPoly constant(int nvars, const Rat& c) {
    CPoly p(nvars);
    if (!is_zero(c)) p.terms_[ExpVec(nvars, 0)] = c;
    return p;
  }
  static CPoly variable(int nvars, int i, int power = 1) {
    CPoly p(nvars);
    ExpVec e(nvars, 0);
    e.at(i) = power;
    p.terms_[e] = Rat(1);
    return p;
  }
  static CPoly monomial(const ExpVec& e, const Rat& c) {
    CPoly p(static_cast<int>(e.size()));
    if (!is_zero(c)) p.terms_[e] = c;
    return p;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool is_zero_poly() const { return terms_.empty(); }
  bool is_monomial() const { return terms_.size() == 1; }

  Rat coeff(const ExpVec& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? Rat(0) : it->second;
  }
  Rat constant_term() const { return coeff(ExpVec(nvars_, 0)); }

  void add_term(const ExpVec& e, const Rat& c) {
    if (is_zero(c)) return;
    auto [it, fresh] = terms_.emplace(e, c);
    if (!fresh) {
      it->second += c;
      if (is_zero(it->second)) terms_.erase(it);
    }
  }

  CPoly& operator+=(const CPoly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  CPoly& operator-=(const CPoly& o) {
    check_vars(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  friend CPoly operator+(CPoly a, const CPoly& b) { return a += b; }
  friend CPoly operator-(CPoly a, const CPoly& b) { return a -= b; }
  friend CPoly operator-(const CPoly& a) { return Rat(-1) * a; }
  friend CPoly operator*(const Rat& s, const CPoly& p) {
    CPoly r(p.nvars_);
    if (is_zero(s)) return r;
    for (const auto& [e, c] : p.terms_) r.terms_[e] = s * c;
    return r;
  }
  friend CPoly operator*(const CPoly& a, const CPoly& b) {
    a.check_vars(b);
    CPoly r(a.nvars_);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        ExpVec e = ea;
        for (std::size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }
  friend bool operator==(const CPoly& a, const CPoly& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }
  friend bool operator<(const CPoly& a, const CPoly& b) {
    if (a.nvars_ != b.nvars_) return a.nvars_ < b.nvars_;
    auto ia = a.terms_.begin(), ib = b.terms_.begin();
    for (; ia != a.terms_.end() && ib != b.terms_.end(); ++ia, ++ib) {
      if (ia->first != ib->first) return ia->first < ib->first;
      if (!(ia->second == ib->second)) return ia->second < ib->second;
    }
    return ia == a.terms_.end() && ib != b.terms_.end();
  }

  CPoly pow(int n) const {
    if (n < 0) throw std::invalid_argument("CPoly::pow: negative power");
    CPoly r = constant(nvars_, Rat(1));
    CPoly base = *this;
    while (n) {
      if (n & 1) r = r * base;
      base = base * base;
      n >>= 1;
    }
    return r;
  }

  CPoly derivative(int var) const {
    CPoly r(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e.at(var) == 0) continue;
      ExpVec d = e;
      d[var] -= 1;
      r.add_term(d, Rat(e[var]) * c);
    }
    return r;
  }

  // Substitute: variable i becomes images[i]. Negative exponents require the
  // matching inverse to be supplied (images_inv[i] nonnull semantics handled
  // by the caller passing the inverse monomial/unit).
  CPoly substitute(const std::vector<CPoly>& images,
                   const std::vector<CPoly>& images_inv) const {
    if (terms_.empty()) return CPoly(images.empty() ? 0 : images[0].nvars());
    const int out_vars = images.at(0).nvars();
    CPoly r(out_vars);
    for (const auto& [e, c] : terms_) {
      CPoly m = CPoly::constant(out_vars, c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] > 0) m = m * images.at(i).pow(e[i]);
        else if (e[i] < 0) m = m * images_inv.at(i).pow(-e[i]);
      }
      r += m;
    }
    return r;
  }

  // Total degree (max over terms of the sum of positive exponents minus none;
  // Laurent terms count negative exponents toward the max-degree bound too).
  int total_degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      (void)c;
      int s = 0;
      for (int x : e) s += (x > 0 ? x : -x);
      if (s > d) d = s;
    }
    return d;
  }

  std::string print(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) s += " + ";
      s += rat_print(c);
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        s += "*" + names.at(i);
        if (e[i] != 1) s += "^" + std::to_string(e[i]);
      }
      first = false;
    }
    return s;
  }

private:
  void check_vars(const CPoly& o) const {
    if (nvars_ != o.nvars_)
      throw std::invalid_argument("CPoly: mixed variable counts");
  }

  int nvars_ = 0;
  Terms terms_;
};

// Total abelianization of a free noncommutative polynomial: words become
// commutative monomials (exponent = letter multiplicities).
inline CPoly abelianize(const NcPoly& p, int k) {
  CPoly r(k);
  for (const auto& [w, c] : p.terms()) {
    ExpVec e(k, 0);
    for (uint8_t g : w) e.at(g) += 1;
    r.add_term(e, c);
  }
  return r;
}

} // namespace nctk
