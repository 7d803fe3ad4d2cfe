// The truncated tensor model of the d-smooth thickening of a (Laurent-)
// polynomial base: elements are tuples (f_0, f_1, ..., f_{d+1}) with f_j in
// the j-fold tensor power of the free module of 1-forms, multiplication is
// truncated tensor concatenation with base coefficients central, and the
// base ring embeds via gamma(x_i) = (x_i, -dx_i, 0, ...).  The generated
// subalgebra realizes the free algebra modulo its commutator-filtration
// ideal I_{d+2}; that identification is certified degree by degree rather
// than assumed (see thickening_fidelity below).
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nctk/cpoly.hpp"
#include "nctk/filtration.hpp"
#include "nctk/fp.hpp"
#include "nctk/linalg.hpp"
#include "nctk/ncpoly.hpp"
#include "nctk/rat.hpp"
#include "nctk/word.hpp"

namespace nctk {

struct ThickeningBase {
  int nvars = 0;
  std::vector<std::string> names;   // one per variable; defaulted if empty
  std::vector<bool> laurent;        // invertible directions; defaulted false
};

class Thickening {
public:
  // Components keyed by tensor words in the dx-alphabet (letter g = dx_g),
  // word length = tensor degree <= d+1; zero coefficients never stored.
  struct Elem {
    std::map<Word, CPoly> comps;
    friend bool operator==(const Elem& a, const Elem& b) {
      return a.comps == b.comps;
    }
    friend bool operator!=(const Elem& a, const Elem& b) { return !(a == b); }
  };

  Thickening(ThickeningBase base, int d) : base_(std::move(base)), d_(d) {
    if (d_ < 0) throw std::invalid_argument("Thickening: d must be >= 0");
    if (base_.nvars < 0)
      throw std::invalid_argument("Thickening: negative variable count");
    if (base_.names.empty())
      for (int i = 0; i < base_.nvars; ++i)
        base_.names.push_back("x" + std::to_string(i));
    if (base_.laurent.empty()) base_.laurent.assign(base_.nvars, false);
    if (static_cast<int>(base_.names.size()) != base_.nvars ||
        static_cast<int>(base_.laurent.size()) != base_.nvars)
      throw std::invalid_argument("Thickening: descriptor size mismatch");
  }

  int smooth_degree() const { return d_; }
  int tensor_cap() const { return d_ + 1; }
  const ThickeningBase& base() const { return base_; }

  Elem zero() const { return {}; }

  Elem from_base(const CPoly& f0) const {
    if (f0.nvars() != base_.nvars)
      throw std::invalid_argument("Thickening: base element variable mismatch");
    Elem e;
    if (!f0.is_zero_poly()) e.comps[Word{}] = f0;
    return e;
  }

  Elem one() const { return from_base(CPoly::constant(base_.nvars, Rat(1))); }

  Elem gamma(int i) const {
    if (i < 0 || i >= base_.nvars)
      throw std::invalid_argument("Thickening: generator index out of range");
    Elem e;
    e.comps[Word{}] = CPoly::variable(base_.nvars, i);
    if (tensor_cap() >= 1)
      e.comps[Word{static_cast<uint8_t>(i)}] =
          CPoly::constant(base_.nvars, Rat(-1));
    return e;
  }

  // gamma of an invertible base direction, with its inverse: for a Laurent
  // variable x, gamma(x)^{-1} exists because x is a base unit.
  Elem gamma_inverse(int i) const {
    auto inv = inverse(gamma(i));
    if (!inv) throw std::invalid_argument("Thickening: direction not Laurent");
    return *inv;
  }

  static bool is_zero_elem(const Elem& a) { return a.comps.empty(); }

  Elem add(const Elem& a, const Elem& b) const {
    Elem r = a;
    for (const auto& [w, c] : b.comps) add_comp(r, w, c);
    return r;
  }
  Elem neg(const Elem& a) const { return scale(Rat(-1), a); }
  Elem sub(const Elem& a, const Elem& b) const { return add(a, neg(b)); }
  Elem scale(const Rat& s, const Elem& a) const {
    Elem r;
    if (is_zero(s)) return r;
    for (const auto& [w, c] : a.comps) r.comps[w] = s * c;
    return r;
  }
  Elem scale_base(const CPoly& s, const Elem& a) const {
    Elem r;
    for (const auto& [w, c] : a.comps) {
      CPoly p = s * c;
      if (!p.is_zero_poly()) r.comps[w] = p;
    }
    return r;
  }

  Elem mul(const Elem& a, const Elem& b) const {
    Elem r;
    const std::size_t cap = static_cast<std::size_t>(tensor_cap());
    for (const auto& [wa, ca] : a.comps) {
      for (const auto& [wb, cb] : b.comps) {
        if (wa.size() + wb.size() > cap) continue;
        add_comp(r, word_concat(wa, wb), ca * cb);
      }
    }
    return r;
  }

  // The base units are the nonzero scalar multiples of monomials supported
  // on the Laurent directions; an element is a unit iff f_0 is a base unit.
  bool base_is_unit(const CPoly& c) const {
    if (!c.is_monomial()) return false;
    const auto& [e, coef] = *c.terms().begin();
    (void)coef; // stored coefficients are nonzero
    for (int i = 0; i < base_.nvars; ++i)
      if (e[static_cast<std::size_t>(i)] != 0 && !base_.laurent[static_cast<std::size_t>(i)])
        return false;
    return true;
  }

  bool is_unit(const Elem& a) const {
    auto it = a.comps.find(Word{});
    return it != a.comps.end() && base_is_unit(it->second);
  }

  std::optional<Elem> inverse(const Elem& a) const {
    auto it = a.comps.find(Word{});
    if (it == a.comps.end() || !base_is_unit(it->second)) return std::nullopt;
    const auto& [e, coef] = *it->second.terms().begin();
    ExpVec einv = e;
    for (int& x : einv) x = -x;
    const Elem f0inv = from_base(CPoly::monomial(einv, Rat(1) / coef));
    // a = f0 (1 + n) with n of positive tensor degree; geometric series.
    const Elem n = mul(f0inv, sub(a, from_base(it->second)));
    Elem acc = one();
    Elem pw = one();
    for (int j = 1; j <= tensor_cap(); ++j) {
      pw = mul(pw, neg(n));
      if (is_zero_elem(pw)) break;
      acc = add(acc, pw);
    }
    Elem r = mul(acc, f0inv);
    if (mul(r, a) != one() || mul(a, r) != one())
      throw std::logic_error("Thickening::inverse: verification failed");
    return r;
  }

  Elem eval_word(const Word& w) const {
    Elem r = one();
    for (uint8_t g : w) r = mul(r, gamma(g));
    return r;
  }

  Elem eval_poly(const NcPoly& p) const {
    Elem r = zero();
    for (const auto& [w, c] : p.terms()) r = add(r, scale(c, eval_word(w)));
    return r;
  }

  // Functorial base change along x_i -> images[i] (images_inv[i] supplies the
  // inverse wherever a negative exponent must be substituted): coefficients
  // by substitution, tensor letters dx_i by the chain rule.  This is an
  // algebra map of truncated tensor models with the same smoothness degree.
  Elem map_to(const Thickening& target, const Elem& a,
              const std::vector<CPoly>& images,
              const std::vector<CPoly>& images_inv) const {
    if (target.d_ != d_)
      throw std::invalid_argument("Thickening::map_to: degree mismatch");
    if (static_cast<int>(images.size()) != base_.nvars ||
        static_cast<int>(images_inv.size()) != base_.nvars)
      throw std::invalid_argument("Thickening::map_to: image count mismatch");
    const int tn = target.base_.nvars;
    // one-form images: dx_i -> sum_j (d images[i] / d y_j) dy_j
    std::vector<std::vector<CPoly>> jac(static_cast<std::size_t>(base_.nvars));
    for (int i = 0; i < base_.nvars; ++i)
      for (int j = 0; j < tn; ++j)
        jac[static_cast<std::size_t>(i)].push_back(images[static_cast<std::size_t>(i)].derivative(j));
    Elem out = target.zero();
    for (const auto& [w, c] : a.comps) {
      // expand the letter product into the target alphabet
      std::map<Word, CPoly> part;
      part[Word{}] = c.substitute(images, images_inv);
      if (part[Word{}].is_zero_poly()) continue;
      for (uint8_t l : w) {
        std::map<Word, CPoly> next;
        for (const auto& [u, cu] : part) {
          for (int j = 0; j < tn; ++j) {
            const CPoly& dj = jac[l][static_cast<std::size_t>(j)];
            if (dj.is_zero_poly()) continue;
            CPoly prod = cu * dj;
            if (prod.is_zero_poly()) continue;
            Word uw = u;
            uw.push_back(static_cast<uint8_t>(j));
            auto [pit, fresh] = next.emplace(std::move(uw), prod);
            if (!fresh) {
              pit->second += prod;
              if (pit->second.is_zero_poly()) next.erase(pit);
            }
          }
        }
        part = std::move(next);
        if (part.empty()) break;
      }
      for (const auto& [u, cu] : part) add_comp(out, u, cu);
    }
    return out;
  }

  std::string print(const Elem& a) const {
    if (a.comps.empty()) return "0";
    std::string s;
    bool first = true;
    for (const auto& [w, c] : a.comps) {
      if (!first) s += " + ";
      s += "(" + c.print(base_.names) + ")";
      for (uint8_t g : w) s += "*d" + base_.names[g];
      first = false;
    }
    return s;
  }

private:
  static void add_comp(Elem& r, const Word& w, const CPoly& c) {
    if (c.is_zero_poly()) return;
    auto [it, fresh] = r.comps.emplace(w, c);
    if (!fresh) {
      it->second += c;
      if (it->second.is_zero_poly()) r.comps.erase(it);
    }
  }

  ThickeningBase base_;
  int d_ = 0;
};

// ---------------------------------------------------------------------------
// Model fidelity certificate.
//
// For each word degree e <= max_degree, the evaluation map sending degree-e
// words of the free algebra to their gamma-images must have kernel exactly
// the degree-e slice of I_{d+2}.  Two half-certificates combine into an
// exact statement:
//   (a) containment, checked over Q: every basis element of the slice
//       evaluates to zero in the model, so rank <= k^e - dim I_{d+2}^[e];
//   (b) a mod-p rank bound: rank of the integer evaluation matrix over F_p
//       is a lower bound for the rank over Q.
// When (b) meets the bound from (a), the kernel is pinned exactly.  If the
// chosen prime happens to drop rank, the exact rank is recomputed over Q.

struct ThickeningFidelityDegree {
  int degree = 0;
  int expected_rank = 0; // k^e - dim I_{d+2}^[e]
  int observed_rank = 0; // mod-p, upgraded to exact on shortfall
  bool kernel_contained = false;
  bool exact_rank_used = false;
  bool ok = false;
};

struct ThickeningFidelityReport {
  int k = 0;
  int d = 0;
  int max_degree = 0;
  std::vector<ThickeningFidelityDegree> degrees;
  bool ok = false;
};

namespace detail {

inline void monomials_of_degree(int deg, int nvars, ExpVec& cur, int from,
                                std::vector<ExpVec>& out) {
  if (from == nvars - 1) {
    cur[static_cast<std::size_t>(from)] = deg;
    out.push_back(cur);
    return;
  }
  for (int t = deg; t >= 0; --t) {
    cur[static_cast<std::size_t>(from)] = t;
    monomials_of_degree(deg - t, nvars, cur, from + 1, out);
  }
}

inline std::vector<ExpVec> monomials_of_degree(int deg, int nvars) {
  std::vector<ExpVec> out;
  if (nvars == 0) {
    if (deg == 0) out.push_back({});
    return out;
  }
  ExpVec cur(static_cast<std::size_t>(nvars), 0);
  monomials_of_degree(deg, nvars, cur, 0, out);
  return out;
}

} // namespace detail

inline ThickeningFidelityReport thickening_fidelity(int k, int d,
                                                    int max_degree) {
  using P = Fp<10007>;
  ThickeningFidelityReport rep;
  rep.k = k;
  rep.d = d;
  rep.max_degree = max_degree;
  rep.ok = true;

  Thickening model({k, {}, {}}, d);
  auto& eng = FiltrationEngine::instance();

  std::vector<Thickening::Elem> prev{model.one()}; // values at degree e-1
  for (int e = 1; e <= max_degree; ++e) {
    const auto words = words_of_degree(e, k);
    std::vector<Thickening::Elem> vals(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
      const Word& w = words[i];
      Word pre(w.begin(), w.end() - 1);
      const auto& base = prev[static_cast<std::size_t>(
          pre.empty() ? 0 : word_index(pre, k))];
      vals[i] = model.mul(base, model.gamma(w.back()));
    }

    ThickeningFidelityDegree dd;
    dd.degree = e;

    // column indexing of the degree-e graded slice of the model
    std::map<std::pair<Word, ExpVec>, int> col;
    for (int j = 0; j <= std::min(e, d + 1); ++j)
      for (const Word& u : words_of_degree(j, k))
        for (const ExpVec& m : detail::monomials_of_degree(e - j, k))
          col.emplace(std::make_pair(u, m), static_cast<int>(col.size()));

    Eigen::Matrix<P, Eigen::Dynamic, Eigen::Dynamic> mp(
        static_cast<int>(words.size()), static_cast<int>(col.size()));
    mp.setZero();
    struct Entry { int r, c; Rat v; };
    std::vector<Entry> exact_entries; // reused on the exact-rank fallback
    for (std::size_t i = 0; i < vals.size(); ++i) {
      for (const auto& [u, c] : vals[i].comps) {
        for (const auto& [m, coef] : c.terms()) {
          auto it = col.find(std::make_pair(u, m));
          if (it == col.end())
            throw std::logic_error("thickening_fidelity: ungraded image");
          const long num = static_cast<long>(coef.get_num().get_si());
          const long den = static_cast<long>(coef.get_den().get_si());
          mp(static_cast<int>(i), it->second) = P(num) / P(den);
          exact_entries.push_back({static_cast<int>(i), it->second, coef});
        }
      }
    }

    const auto cell = eng.ideal_cell(d + 2, e, k);
    const int null_dim = cell.dim();
    dd.expected_rank = static_cast<int>(words.size()) - null_dim;
    dd.observed_rank = rank_of(mp);
    if (dd.observed_rank != dd.expected_rank) {
      // prime dropped rank (or genuine failure): settle it exactly
      Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic> mq(
          static_cast<int>(words.size()), static_cast<int>(col.size()));
      mq.setZero();
      for (const auto& t : exact_entries) mq(t.r, t.c) = t.v;
      dd.observed_rank = rank_of(mq);
      dd.exact_rank_used = true;
    }

    // exact containment: each cell basis row evaluates to zero
    dd.kernel_contained = true;
    for (const auto& row : cell.rows()) {
      Thickening::Elem acc = model.zero();
      for (const auto& [idx, coef] : row)
        acc = model.add(acc, model.scale(coef, vals[static_cast<std::size_t>(idx)]));
      if (!Thickening::is_zero_elem(acc)) {
        dd.kernel_contained = false;
        break;
      }
    }

    dd.ok = dd.kernel_contained && dd.observed_rank == dd.expected_rank;
    rep.ok = rep.ok && dd.ok;
    rep.degrees.push_back(std::move(dd));
    prev = std::move(vals);
  }
  return rep;
}

} // namespace nctk
