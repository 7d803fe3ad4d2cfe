#pragma once
// Nonabelian hypercohomology in degree <= 1 for a sheaf of groups acting on
// a sheaf of sets over a finite nerve: classes of pairs (g_ij, e_i), the
// subgroup H^0(X, G, c), pair-extension data (A0 -> G' -> G acting on
// E' -> E with A1 translating freely on E'), the induced differentials
// d_e : A0 -> A1, the connecting maps delta0/delta1 into the cohomology of
// the twisted two-term complex, and exhaustive finite-mode oracles.
#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "nctk/cech.hpp"

namespace nctk {

// ---------------------------------------------------------------------------
// finite sheaves of sets with a group action

struct SetSheaf {
  std::map<Nerve::Simplex, int> card; // |E(s)|
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, std::vector<int>> res;
  // act[s][g][e]: action of the companion group sheaf's G(s)
  std::map<Nerve::Simplex, std::vector<std::vector<int>>> act;

  int size(const Nerve::Simplex& s) const {
    auto it = card.find(s);
    if (it == card.end()) throw std::invalid_argument("set sheaf: unknown simplex");
    return it->second;
  }
  int restrict_elem(const Nerve::Simplex& from, const Nerve::Simplex& to,
                    int e) const {
    if (from == to) return e;
    auto it = res.find({from, to});
    if (it == res.end())
      throw std::invalid_argument("set sheaf: missing restriction");
    return it->second[static_cast<std::size_t>(e)];
  }
  int apply(const Nerve::Simplex& s, int g, int e) const {
    auto it = act.find(s);
    if (it == act.end()) throw std::invalid_argument("set sheaf: missing action");
    return it->second[static_cast<std::size_t>(g)][static_cast<std::size_t>(e)];
  }

  // G acts with the same table on the same set over every simplex
  static SetSheaf constant(const Nerve& N, int n, const FinGroup& G,
                           const std::vector<std::vector<int>>& action) {
    if (static_cast<int>(action.size()) != G.n)
      throw std::invalid_argument("set sheaf: action table has wrong size");
    SetSheaf E;
    std::vector<int> id(static_cast<std::size_t>(n));
    for (int e = 0; e < n; ++e) id[static_cast<std::size_t>(e)] = e;
    for (const auto& s : N.simplices) {
      E.card[s] = n;
      E.act[s] = action;
      for (const auto& t : N.simplices)
        if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
          E.res[{s, t}] = id;
    }
    return E;
  }
  static SetSheaf point(const Nerve& N, const GroupSheaf& S) {
    SetSheaf E;
    for (const auto& s : N.simplices) {
      E.card[s] = 1;
      E.act[s].assign(static_cast<std::size_t>(S.at(s).n), {0});
      for (const auto& t : N.simplices)
        if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
          E.res[{s, t}] = {0};
    }
    return E;
  }

  void validate(const Nerve& N, const GroupSheaf& S) const {
    for (const auto& s : N.simplices) {
      const int n = size(s);
      if (n <= 0) throw std::invalid_argument("set sheaf: empty section set");
      const FinGroup& G = S.at(s);
      auto it = act.find(s);
      if (it == act.end() ||
          static_cast<int>(it->second.size()) != G.n)
        throw std::invalid_argument("set sheaf: action table has wrong size");
      for (const auto& row : it->second) {
        if (static_cast<int>(row.size()) != n)
          throw std::invalid_argument("set sheaf: action table has wrong size");
        for (int e : row)
          if (e < 0 || e >= n)
            throw std::invalid_argument("set sheaf: action value out of range");
      }
      for (int e = 0; e < n; ++e)
        if (apply(s, G.id(), e) != e)
          throw std::invalid_argument("set sheaf: identity does not fix sections");
      for (int g = 0; g < G.n; ++g)
        for (int h = 0; h < G.n; ++h)
          for (int e = 0; e < n; ++e)
            if (apply(s, g, apply(s, h, e)) != apply(s, G.mul(g, h), e))
              throw std::invalid_argument("set sheaf: not a group action");
      for (const auto& t : N.simplices) {
        if (t == s || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        auto rt = res.find({s, t});
        if (rt == res.end() || static_cast<int>(rt->second.size()) != n)
          throw std::invalid_argument("set sheaf: missing restriction");
        for (int e : rt->second)
          if (e < 0 || e >= size(t))
            throw std::invalid_argument("set sheaf: restriction out of range");
        // restriction is equivariant along the group restriction
        for (int g = 0; g < G.n; ++g)
          for (int e = 0; e < n; ++e)
            if (restrict_elem(s, t, apply(s, g, e)) !=
                apply(t, S.restrict_elem(s, t, g), restrict_elem(s, t, e)))
              throw std::invalid_argument(
                  "set sheaf: restriction not equivariant");
        for (const auto& v : N.simplices) {
          if (v == t || !std::includes(v.begin(), v.end(), t.begin(), t.end()))
            continue;
          for (int e = 0; e < n; ++e)
            if (restrict_elem(t, v, restrict_elem(s, t, e)) !=
                restrict_elem(s, v, e))
              throw std::invalid_argument(
                  "set sheaf: restrictions not functorial");
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// 1-cocycles of a pair (G acting on E) and their classes

struct HyperCocycle1 {
  Cocycle1 g;
  std::vector<int> e; // one section per chart
  std::vector<int> key() const {
    std::vector<int> k = g.val;
    k.insert(k.end(), e.begin(), e.end());
    return k;
  }
  bool operator==(const HyperCocycle1& o) const {
    return g == o.g && e == o.e;
  }
  bool operator<(const HyperCocycle1& o) const { return key() < o.key(); }
};

inline Z1Report hyper_z1_validate(const Nerve& N, const GroupSheaf& S,
                                  const SetSheaf& E, const HyperCocycle1& c) {
  const PairIndexer P = PairIndexer::of(N);
  Z1Report rep = validate_z1(N, S, P, c.g);
  // bail out before the section checks if the group part is not even a
  // well-formed cochain (pair values are read below without range checks)
  if (static_cast<int>(c.g.val.size()) != P.size()) return rep;
  for (int t = 0; t < P.size(); ++t)
    if (c.g.val[static_cast<std::size_t>(t)] < 0 ||
        c.g.val[static_cast<std::size_t>(t)] >= S.at(P.simplex(t)).n)
      return rep;
  if (static_cast<int>(c.e.size()) != N.charts) {
    rep.ok = false;
    rep.violations.push_back("wrong number of chart sections");
    return rep;
  }
  for (int i = 0; i < N.charts; ++i)
    if (c.e[static_cast<std::size_t>(i)] < 0 ||
        c.e[static_cast<std::size_t>(i)] >= E.size({i})) {
      rep.ok = false;
      std::ostringstream os;
      os << "section e_" << i << " out of range";
      rep.violations.push_back(os.str());
      return rep;
    }
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const int lhs = E.restrict_elem({i}, pr, c.e[static_cast<std::size_t>(i)]);
    const int rhs = E.apply(pr, pair_value(S, P, c.g, i, j, pr),
                            E.restrict_elem({j}, pr, c.e[static_cast<std::size_t>(j)]));
    if (lhs != rhs) {
      rep.ok = false;
      std::ostringstream os;
      os << "section (" << i << "," << j << "): e_i != g_ij(e_j)";
      rep.violations.push_back(os.str());
    }
  }
  return rep;
}

inline HyperCocycle1 hyper_act(const GroupSheaf& S, const SetSheaf& E,
                               const PairIndexer& P, const std::vector<int>& h,
                               const HyperCocycle1& c) {
  HyperCocycle1 out;
  out.g = coboundary_act(S, P, h, c.g);
  out.e.resize(c.e.size());
  for (std::size_t i = 0; i < c.e.size(); ++i)
    out.e[i] = E.apply({static_cast<int>(i)}, h[i], c.e[i]);
  return out;
}

inline HyperCocycle1 hyper_canonical(const Nerve& N, const GroupSheaf& S,
                                     const SetSheaf& E, const PairIndexer& P,
                                     const HyperCocycle1& c, long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(S.at({i}).n);
  HyperCocycle1 best = c;
  for_each_tuple(radix, guard, "hyper_canonical", [&](const std::vector<int>& h) {
    const HyperCocycle1 cand = hyper_act(S, E, P, h, c);
    if (cand < best) best = cand;
  });
  return best;
}

inline std::vector<HyperCocycle1> hyper_z1_enumerate(const Nerve& N,
                                                     const GroupSheaf& S,
                                                     const SetSheaf& E,
                                                     const PairIndexer& P,
                                                     long long guard) {
  std::vector<int> radix;
  for (int t = 0; t < P.size(); ++t) radix.push_back(S.at(P.simplex(t)).n);
  for (int i = 0; i < N.charts; ++i) radix.push_back(E.size({i}));
  std::vector<HyperCocycle1> out;
  for_each_tuple(radix, guard, "hyper_z1_enumerate",
                 [&](const std::vector<int>& x) {
                   HyperCocycle1 c;
                   c.g.val.assign(x.begin(), x.begin() + P.size());
                   c.e.assign(x.begin() + P.size(), x.end());
                   if (hyper_z1_validate(N, S, E, c).ok) out.push_back(c);
                 });
  return out;
}

struct HyperClasses {
  std::vector<HyperCocycle1> reps;
  long long z1_count = 0;
};

inline HyperClasses hyper_h1_classes(const Nerve& N, const GroupSheaf& S,
                                     const SetSheaf& E, long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  HyperClasses out;
  std::set<HyperCocycle1> reps;
  for (const HyperCocycle1& c : hyper_z1_enumerate(N, S, E, P, guard)) {
    ++out.z1_count;
    reps.insert(hyper_canonical(N, S, E, P, c, guard));
  }
  out.reps.assign(reps.begin(), reps.end());
  return out;
}

// H^0(X, G, c): sections of the inner form that also fix the e_i
inline std::vector<std::vector<int>> hyper_h0(const Nerve& N,
                                              const GroupSheaf& S,
                                              const SetSheaf& E,
                                              const HyperCocycle1& c,
                                              long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(S.at({i}).n);
  std::vector<std::vector<int>> out;
  for_each_tuple(radix, guard, "hyper_h0", [&](const std::vector<int>& al) {
    for (int t = 0; t < P.size(); ++t) {
      auto [i, j] = P.list[static_cast<std::size_t>(t)];
      const Nerve::Simplex pr{i, j};
      const FinGroup& G = S.at(pr);
      const int ai = S.restrict_elem({i}, pr, al[static_cast<std::size_t>(i)]);
      const int aj = S.restrict_elem({j}, pr, al[static_cast<std::size_t>(j)]);
      const int g = c.g.val[static_cast<std::size_t>(t)];
      if (G.mul(ai, g) != G.mul(g, aj)) return;
    }
    for (int i = 0; i < N.charts; ++i)
      if (E.apply({i}, al[static_cast<std::size_t>(i)],
                  c.e[static_cast<std::size_t>(i)]) !=
          c.e[static_cast<std::size_t>(i)])
        return;
    out.push_back(al);
  });
  return out;
}

// ---------------------------------------------------------------------------
// pair data: 1 -> A0 -> G' -> G -> 1 acting on E' -> E = E'/A1

struct HyperPair {
  ExtensionSheaf X; // groups, with A0 = kernel sheaf
  SetSheaf Ep;      // E', acted on by the total sheaf
  SetSheaf E;       // E,  acted on by the quotient sheaf
  std::map<Nerve::Simplex, FinGroup> A1;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, std::vector<int>> resA1;
  std::map<Nerve::Simplex, std::vector<std::vector<int>>> act1; // [a][e']
  std::map<Nerve::Simplex, std::vector<std::vector<int>>> mod1; // [gbar][a]
  std::map<Nerve::Simplex, std::vector<int>> proj;              // E' -> E

  const FinGroup& a1_at(const Nerve::Simplex& s) const {
    auto it = A1.find(s);
    if (it == A1.end()) throw std::invalid_argument("pair: unknown simplex");
    return it->second;
  }
  int rA1(const Nerve::Simplex& f, const Nerve::Simplex& t, int a) const {
    if (f == t) return a;
    return resA1.at({f, t})[static_cast<std::size_t>(a)];
  }
  int translate(const Nerve::Simplex& s, int a, int ep) const {
    return act1.at(s)[static_cast<std::size_t>(a)][static_cast<std::size_t>(ep)];
  }
  int gmod(const Nerve::Simplex& s, int gbar, int a) const {
    return mod1.at(s)[static_cast<std::size_t>(gbar)][static_cast<std::size_t>(a)];
  }
  int p_set(const Nerve::Simplex& s, int ep) const {
    return proj.at(s)[static_cast<std::size_t>(ep)];
  }
  int some_lift_e(const Nerve::Simplex& s, int e) const {
    for (int ep = 0; ep < Ep.size(s); ++ep)
      if (p_set(s, ep) == e) return ep;
    throw std::logic_error("pair: section has no lift");
  }
  // the unique a1 with target = a1 + base (free action)
  int a1_diff(const Nerve::Simplex& s, int target, int base) const {
    int found = -1;
    for (int a = 0; a < a1_at(s).n; ++a)
      if (translate(s, a, base) == target) {
        if (found >= 0) throw std::logic_error("pair: A1 action not free");
        found = a;
      }
    if (found < 0) throw std::logic_error("pair: sections not in one A1 orbit");
    return found;
  }
  // d_e(a0) in A1(s), from a0(e') = d_e(a0) + e' over any lift e' of e
  int d_of(const Nerve::Simplex& s, int e, int a0k) const {
    const int ep = some_lift_e(s, e);
    const int moved =
        Ep.apply(s, X.at(s).kernel[static_cast<std::size_t>(a0k)], ep);
    return a1_diff(s, moved, ep);
  }

  void validate(const Nerve& N) const {
    const GroupSheaf ST = X.total_sheaf(N);
    const GroupSheaf SQ = X.quot_sheaf(N);
    Ep.validate(N, ST);
    E.validate(N, SQ);
    for (const auto& s : N.simplices) {
      const FinExtension& Xs = X.at(s);
      const FinGroup& A = a1_at(s);
      A.validate();
      if (!A.abelian()) throw std::invalid_argument("pair: A1 not abelian");
      const int np = Ep.size(s), ne = E.size(s);
      // translation action of A1, free, with orbits = fibers of proj
      auto ita = act1.find(s);
      if (ita == act1.end() || static_cast<int>(ita->second.size()) != A.n)
        throw std::invalid_argument("pair: A1 action table has wrong size");
      for (int a = 0; a < A.n; ++a)
        for (int b = 0; b < A.n; ++b)
          for (int ep = 0; ep < np; ++ep)
            if (translate(s, a, translate(s, b, ep)) !=
                translate(s, A.mul(a, b), ep))
              throw std::invalid_argument("pair: A1 does not act");
      for (int ep = 0; ep < np; ++ep)
        if (translate(s, A.id(), ep) != ep)
          throw std::invalid_argument("pair: A1 identity moves a section");
      for (int a = 1; a < A.n; ++a)
        for (int ep = 0; ep < np; ++ep)
          if (translate(s, a, ep) == ep)
            throw std::invalid_argument("pair: A1 action not free");
      auto itp = proj.find(s);
      if (itp == proj.end() || static_cast<int>(itp->second.size()) != np)
        throw std::invalid_argument("pair: projection has wrong size");
      std::vector<char> hit(static_cast<std::size_t>(ne), 0);
      for (int ep = 0; ep < np; ++ep) {
        const int e = p_set(s, ep);
        if (e < 0 || e >= ne)
          throw std::invalid_argument("pair: projection out of range");
        hit[static_cast<std::size_t>(e)] = 1;
        for (int a = 0; a < A.n; ++a)
          if (p_set(s, translate(s, a, ep)) != e)
            throw std::invalid_argument("pair: projection not A1 invariant");
      }
      for (char h : hit)
        if (!h) throw std::invalid_argument("pair: projection not surjective");
      if (np != A.n * ne)
        throw std::invalid_argument("pair: fibers are not single A1 orbits");
      // G' equivariance of proj and the module law g'(a+e') = p(g')(a)+g'(e')
      auto itm = mod1.find(s);
      if (itm == mod1.end() ||
          static_cast<int>(itm->second.size()) != Xs.G.n)
        throw std::invalid_argument("pair: module table has wrong size");
      for (int gb = 0; gb < Xs.G.n; ++gb) {
        for (int a = 0; a < A.n; ++a) {
          const int ga = gmod(s, gb, a);
          if (ga < 0 || ga >= A.n)
            throw std::invalid_argument("pair: module table out of range");
        }
        if (gmod(s, gb, A.id()) != A.id())
          throw std::invalid_argument("pair: module action not additive");
        for (int a = 0; a < A.n; ++a)
          for (int b = 0; b < A.n; ++b)
            if (gmod(s, gb, A.mul(a, b)) !=
                A.mul(gmod(s, gb, a), gmod(s, gb, b)))
              throw std::invalid_argument("pair: module action not additive");
      }
      for (int gp = 0; gp < Xs.Gp.n; ++gp)
        for (int ep = 0; ep < np; ++ep) {
          if (p_set(s, Ep.apply(s, gp, ep)) !=
              E.apply(s, Xs.p(gp), p_set(s, ep)))
            throw std::invalid_argument("pair: projection not equivariant");
          for (int a = 0; a < A.n; ++a)
            if (Ep.apply(s, gp, translate(s, a, ep)) !=
                translate(s, gmod(s, Xs.p(gp), a), Ep.apply(s, gp, ep)))
              throw std::invalid_argument("pair: module law fails");
        }
      // d_e: well defined over the fiber, additive, equivariant
      for (int e = 0; e < ne; ++e)
        for (int ak = 0; ak < Xs.A.n; ++ak) {
          int val = -1;
          for (int ep = 0; ep < np; ++ep) {
            if (p_set(s, ep) != e) continue;
            const int moved =
                Ep.apply(s, Xs.kernel[static_cast<std::size_t>(ak)], ep);
            const int dv = a1_diff(s, moved, ep);
            if (val < 0) val = dv;
            else if (val != dv)
              throw std::invalid_argument("pair: d_e not well defined");
          }
          for (int bk = 0; bk < Xs.A.n; ++bk)
            if (d_of(s, e, Xs.a_mul(ak, bk)) !=
                A.mul(d_of(s, e, ak), d_of(s, e, bk)))
              throw std::invalid_argument("pair: d_e not additive");
          for (int gb = 0; gb < Xs.G.n; ++gb)
            if (gmod(s, gb, d_of(s, e, ak)) !=
                d_of(s, E.apply(s, gb, e), Xs.ad_of(gb, ak)))
              throw std::invalid_argument("pair: d_e not equivariant");
        }
      // restrictions commute with everything
      for (const auto& t : N.simplices) {
        if (t == s || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        auto itr = resA1.find({s, t});
        if (itr == resA1.end() || static_cast<int>(itr->second.size()) != A.n)
          throw std::invalid_argument("pair: missing A1 restriction");
        const FinGroup& At = a1_at(t);
        for (int a = 0; a < A.n; ++a)
          for (int b = 0; b < A.n; ++b)
            if (rA1(s, t, A.mul(a, b)) !=
                At.mul(rA1(s, t, a), rA1(s, t, b)))
              throw std::invalid_argument("pair: A1 restriction not additive");
        for (int ep = 0; ep < np; ++ep) {
          if (E.restrict_elem(s, t, p_set(s, ep)) !=
              p_set(t, Ep.restrict_elem(s, t, ep)))
            throw std::invalid_argument(
                "pair: projection does not commute with restriction");
          for (int a = 0; a < A.n; ++a)
            if (Ep.restrict_elem(s, t, translate(s, a, ep)) !=
                translate(t, rA1(s, t, a), Ep.restrict_elem(s, t, ep)))
              throw std::invalid_argument(
                  "pair: A1 action does not commute with restriction");
        }
        for (int gb = 0; gb < Xs.G.n; ++gb)
          for (int a = 0; a < A.n; ++a)
            if (rA1(s, t, gmod(s, gb, a)) !=
                gmod(t, X.rG(s, t, gb), rA1(s, t, a)))
              throw std::invalid_argument(
                  "pair: module structure does not commute with restriction");
        for (const auto& v : N.simplices) {
          if (v == t || !std::includes(v.begin(), v.end(), t.begin(), t.end()))
            continue;
          for (int a = 0; a < A.n; ++a)
            if (rA1(t, v, rA1(s, t, a)) != rA1(s, v, a))
              throw std::invalid_argument(
                  "pair: A1 restrictions not functorial");
        }
      }
    }
  }
};

// ---------------------------------------------------------------------------
// cochains with values in the twisted two-term complex (A_bullet^g, d_e)

struct TC1 {
  std::vector<int> a0; // per pair, kernel index
  std::vector<int> a1; // per chart, A1 element
  bool operator==(const TC1& o) const { return a0 == o.a0 && a1 == o.a1; }
  bool operator<(const TC1& o) const {
    return std::tie(a0, a1) < std::tie(o.a0, o.a1);
  }
  bool zero() const {
    return std::all_of(a0.begin(), a0.end(), [](int v) { return v == 0; }) &&
           std::all_of(a1.begin(), a1.end(), [](int v) { return v == 0; });
  }
};

struct TC2 {
  std::vector<int> a0; // per triple, kernel index
  std::vector<int> a1; // per pair, A1 element
  bool operator==(const TC2& o) const { return a0 == o.a0 && a1 == o.a1; }
  bool operator<(const TC2& o) const {
    return std::tie(a0, a1) < std::tie(o.a0, o.a1);
  }
  bool zero() const {
    return std::all_of(a0.begin(), a0.end(), [](int v) { return v == 0; }) &&
           std::all_of(a1.begin(), a1.end(), [](int v) { return v == 0; });
  }
};

// bundles the base hyper cocycle with the lookups every differential needs
struct TCContext {
  const Nerve& N;
  const HyperPair& HP;
  PairIndexer P;
  TripleIndexer T;
  GroupSheaf SG; // quotient sheaf
  HyperCocycle1 base;

  TCContext(const Nerve& n, const HyperPair& hp, HyperCocycle1 c)
      : N(n), HP(hp), P(PairIndexer::of(n)), T(TripleIndexer::of(n)),
        SG(hp.X.quot_sheaf(n)), base(std::move(c)) {
    const Z1Report rep = hyper_z1_validate(N, SG, HP.E, base);
    if (!rep.ok)
      throw std::invalid_argument("twisted complex: base is not a 1-cocycle");
  }
  int gq(int i, int j, const Nerve::Simplex& target) const {
    return pair_value(SG, P, base.g, i, j, target);
  }
  int e_lead(const Nerve::Simplex& s) const {
    return HP.E.restrict_elem({s[0]}, s,
                              base.e[static_cast<std::size_t>(s[0])]);
  }
  int d_lead(const Nerve::Simplex& s, int a0k) const {
    return HP.d_of(s, e_lead(s), a0k);
  }
};

inline TC1 tc_delta0(const TCContext& C, const std::vector<int>& b0) {
  TC1 out;
  out.a0.resize(static_cast<std::size_t>(C.P.size()));
  out.a1.resize(static_cast<std::size_t>(C.N.charts));
  for (int t = 0; t < C.P.size(); ++t) {
    auto [i, j] = C.P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinExtension& Es = C.HP.X.at(pr);
    const int bi = C.HP.X.rA({i}, pr, b0[static_cast<std::size_t>(i)]);
    const int bj = C.HP.X.rA({j}, pr, b0[static_cast<std::size_t>(j)]);
    out.a0[static_cast<std::size_t>(t)] =
        Es.a_mul(bi, Es.a_inv(Es.ad_of(C.gq(i, j, pr), bj)));
  }
  for (int i = 0; i < C.N.charts; ++i)
    out.a1[static_cast<std::size_t>(i)] =
        C.d_lead({i}, b0[static_cast<std::size_t>(i)]);
  return out;
}

inline TC2 tc_delta1(const TCContext& C, const TC1& b) {
  TC2 out;
  out.a0.resize(static_cast<std::size_t>(C.T.size()));
  out.a1.resize(static_cast<std::size_t>(C.P.size()));
  for (int u = 0; u < C.T.size(); ++u) {
    const auto& tr = C.T.list[static_cast<std::size_t>(u)];
    const int i = tr[0], j = tr[1], k = tr[2];
    const Nerve::Simplex s{i, j, k};
    const FinExtension& Es = C.HP.X.at(s);
    const int bij = C.HP.X.rA({i, j}, s,
                              b.a0[static_cast<std::size_t>(C.P.at(i, j))]);
    const int bjk = C.HP.X.rA({j, k}, s,
                              b.a0[static_cast<std::size_t>(C.P.at(j, k))]);
    const int bik = C.HP.X.rA({i, k}, s,
                              b.a0[static_cast<std::size_t>(C.P.at(i, k))]);
    out.a0[static_cast<std::size_t>(u)] = Es.a_mul(
        Es.a_mul(bij, Es.ad_of(C.gq(i, j, s), bjk)), Es.a_inv(bik));
  }
  for (int t = 0; t < C.P.size(); ++t) {
    auto [i, j] = C.P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinGroup& A = C.HP.a1_at(pr);
    const int db = C.d_lead(pr, b.a0[static_cast<std::size_t>(t)]);
    const int bi = C.HP.rA1({i}, pr, b.a1[static_cast<std::size_t>(i)]);
    const int bj = C.HP.rA1({j}, pr, b.a1[static_cast<std::size_t>(j)]);
    out.a1[static_cast<std::size_t>(t)] =
        A.mul(A.mul(db, A.inv(bi)), C.HP.gmod(pr, C.gq(i, j, pr), bj));
  }
  return out;
}

// degree-3 target of the last differential: (A0 on quads, A1 on triples)
struct TC3 {
  std::vector<int> a0;
  std::vector<int> a1;
  bool zero() const {
    return std::all_of(a0.begin(), a0.end(), [](int v) { return v == 0; }) &&
           std::all_of(a1.begin(), a1.end(), [](int v) { return v == 0; });
  }
};

inline TC3 tc_delta2(const TCContext& C, const TC2& c) {
  TC3 out;
  const auto quads = C.N.quads();
  out.a0.resize(quads.size());
  out.a1.resize(static_cast<std::size_t>(C.T.size()));
  for (std::size_t qi = 0; qi < quads.size(); ++qi) {
    const auto& q = quads[qi];
    const int i = q[0], j = q[1], k = q[2], l = q[3];
    const FinExtension& Es = C.HP.X.at(q);
    auto tv = [&](int a, int b, int cc) {
      return C.HP.X.rA({a, b, cc}, q,
                       c.a0[static_cast<std::size_t>(C.T.find(a, b, cc))]);
    };
    const int term = Es.a_mul(
        Es.a_mul(tv(i, j, k), Es.a_inv(tv(i, j, l))),
        Es.a_mul(tv(i, k, l), Es.a_inv(Es.ad_of(C.gq(i, j, q), tv(j, k, l)))));
    out.a0[qi] = term;
  }
  for (int u = 0; u < C.T.size(); ++u) {
    const auto& tr = C.T.list[static_cast<std::size_t>(u)];
    const int i = tr[0], j = tr[1], k = tr[2];
    const Nerve::Simplex s{i, j, k};
    const FinGroup& A = C.HP.a1_at(s);
    auto pv = [&](int a, int b) {
      return C.HP.rA1({a, b}, s,
                      c.a1[static_cast<std::size_t>(C.P.at(a, b))]);
    };
    const int dterm = C.d_lead(s, c.a0[static_cast<std::size_t>(u)]);
    out.a1[static_cast<std::size_t>(u)] =
        A.mul(A.mul(dterm, A.mul(pv(i, k), A.inv(pv(i, j)))),
              A.inv(C.HP.gmod(s, C.gq(i, j, s), pv(j, k))));
  }
  return out;
}

inline bool is_tc1_cocycle(const TCContext& C, const TC1& a) {
  return tc_delta1(C, a).zero();
}
inline bool is_tc2_cocycle(const TCContext& C, const TC2& a) {
  return tc_delta2(C, a).zero();
}

inline TC1 tc1_add(const TCContext& C, const TC1& x, const TC1& y) {
  TC1 out = x;
  for (int t = 0; t < C.P.size(); ++t)
    out.a0[static_cast<std::size_t>(t)] =
        C.HP.X.at(C.P.simplex(t))
            .a_mul(x.a0[static_cast<std::size_t>(t)],
                   y.a0[static_cast<std::size_t>(t)]);
  for (int i = 0; i < C.N.charts; ++i)
    out.a1[static_cast<std::size_t>(i)] =
        C.HP.a1_at({i}).mul(x.a1[static_cast<std::size_t>(i)],
                            y.a1[static_cast<std::size_t>(i)]);
  return out;
}

inline TC2 tc2_add(const TCContext& C, const TC2& x, const TC2& y) {
  TC2 out = x;
  for (int u = 0; u < C.T.size(); ++u) {
    const auto& tr = C.T.list[static_cast<std::size_t>(u)];
    out.a0[static_cast<std::size_t>(u)] =
        C.HP.X.at({tr[0], tr[1], tr[2]})
            .a_mul(x.a0[static_cast<std::size_t>(u)],
                   y.a0[static_cast<std::size_t>(u)]);
  }
  for (int t = 0; t < C.P.size(); ++t)
    out.a1[static_cast<std::size_t>(t)] =
        C.HP.a1_at(C.P.simplex(t))
            .mul(x.a1[static_cast<std::size_t>(t)],
                 y.a1[static_cast<std::size_t>(t)]);
  return out;
}

inline TC2 tc2_neg(const TCContext& C, const TC2& x) {
  TC2 out = x;
  for (int u = 0; u < C.T.size(); ++u) {
    const auto& tr = C.T.list[static_cast<std::size_t>(u)];
    out.a0[static_cast<std::size_t>(u)] =
        C.HP.X.at({tr[0], tr[1], tr[2]})
            .a_inv(x.a0[static_cast<std::size_t>(u)]);
  }
  for (int t = 0; t < C.P.size(); ++t)
    out.a1[static_cast<std::size_t>(t)] =
        C.HP.a1_at(C.P.simplex(t)).inv(x.a1[static_cast<std::size_t>(t)]);
  return out;
}

inline TC1 tc1_zero(const TCContext& C) {
  TC1 z;
  z.a0.assign(static_cast<std::size_t>(C.P.size()), 0);
  z.a1.assign(static_cast<std::size_t>(C.N.charts), 0);
  return z;
}

// exact class invariant: least element of a + image of tc_delta0
inline TC1 tc1_canonical(const TCContext& C, const TC1& a, long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < C.N.charts; ++i) radix.push_back(C.HP.X.at({i}).A.n);
  TC1 best = a;
  for_each_tuple(radix, guard, "tc1_canonical", [&](const std::vector<int>& b) {
    const TC1 cand = tc1_add(C, a, tc_delta0(C, b));
    if (cand < best) best = cand;
  });
  return best;
}

// ---------------------------------------------------------------------------
// delta0: H^0(X, G, c) -> H^1(A_bullet^g, d_e), relative to a chosen lift c'

struct HyperDelta0Result {
  TC1 a;
  TC1 canonical;
  bool vanishes = false;
};

inline HyperDelta0Result hyper_delta0(const Nerve& N, const HyperPair& HP,
                                      const std::vector<int>& alpha,
                                      const HyperCocycle1& cprime,
                                      long long guard,
                                      const std::vector<int>& alpha_lifts = {}) {
  const GroupSheaf ST = HP.X.total_sheaf(N);
  {
    const Z1Report rep = hyper_z1_validate(N, ST, HP.Ep, cprime);
    if (!rep.ok)
      throw std::invalid_argument("hyper_delta0: c' is not a 1-cocycle");
  }
  const PairIndexer P = PairIndexer::of(N);
  // project c' to the base cocycle c
  HyperCocycle1 base;
  base.g.val.resize(static_cast<std::size_t>(P.size()));
  base.e.resize(static_cast<std::size_t>(N.charts));
  for (int t = 0; t < P.size(); ++t)
    base.g.val[static_cast<std::size_t>(t)] =
        HP.X.at(P.simplex(t)).p(cprime.g.val[static_cast<std::size_t>(t)]);
  for (int i = 0; i < N.charts; ++i)
    base.e[static_cast<std::size_t>(i)] =
        HP.p_set({i}, cprime.e[static_cast<std::size_t>(i)]);
  TCContext C(N, HP, base);
  // alpha must lie in H^0(X, G, c)
  {
    const auto h0 = hyper_h0(N, C.SG, HP.E, base, guard);
    if (std::find(h0.begin(), h0.end(), alpha) == h0.end())
      throw std::invalid_argument("hyper_delta0: alpha not in H^0(X,G,c)");
  }
  std::vector<int> lifts(static_cast<std::size_t>(N.charts));
  for (int i = 0; i < N.charts; ++i) {
    const FinExtension& Xi = HP.X.at({i});
    const int want = alpha[static_cast<std::size_t>(i)];
    if (!alpha_lifts.empty()) {
      const int al = alpha_lifts[static_cast<std::size_t>(i)];
      if (Xi.p(al) != want)
        throw std::invalid_argument("hyper_delta0: supplied lift is wrong");
      lifts[static_cast<std::size_t>(i)] = al;
    } else {
      lifts[static_cast<std::size_t>(i)] = Xi.lift(want);
    }
  }
  HyperDelta0Result R;
  R.a.a0.resize(static_cast<std::size_t>(P.size()));
  R.a.a1.resize(static_cast<std::size_t>(N.charts));
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinExtension& Es = HP.X.at(pr);
    const int u = HP.X.rT({i}, pr, lifts[static_cast<std::size_t>(i)]);
    const int w = HP.X.rT({j}, pr, lifts[static_cast<std::size_t>(j)]);
    const int gp = cprime.g.val[static_cast<std::size_t>(t)];
    const int val = Es.Gp.mul(Es.Gp.mul(Es.Gp.inv(u), gp),
                              Es.Gp.mul(w, Es.Gp.inv(gp)));
    const int k = Es.kidx[static_cast<std::size_t>(val)];
    if (k < 0)
      throw std::logic_error("hyper_delta0: comparison left the kernel");
    R.a.a0[static_cast<std::size_t>(t)] = k;
  }
  for (int i = 0; i < N.charts; ++i) {
    const Nerve::Simplex ch{i};
    const int ep = cprime.e[static_cast<std::size_t>(i)];
    int found = -1;
    for (int a = 0; a < HP.a1_at(ch).n; ++a)
      if (HP.Ep.apply(ch, lifts[static_cast<std::size_t>(i)],
                      HP.translate(ch, a, ep)) == ep) {
        if (found >= 0)
          throw std::logic_error("hyper_delta0: lift equation not unique");
        found = a;
      }
    if (found < 0)
      throw std::logic_error("hyper_delta0: lift equation unsolvable");
    R.a.a1[static_cast<std::size_t>(i)] = found;
  }
  if (!is_tc1_cocycle(C, R.a))
    throw std::logic_error("hyper_delta0: output is not a twisted 1-cocycle");
  R.canonical = tc1_canonical(C, R.a, guard);
  R.vanishes = R.canonical.zero();
  return R;
}

// ---------------------------------------------------------------------------
// delta1: obstruction in H^2(A_bullet^g, d_e) to lifting a hyper class

struct HyperDelta1Result {
  TC2 obs;
  bool vanishes = false;
  bool lift_exists = false;
};

// least preimages of the cocycle data: the default choice of lifts
inline std::vector<int> least_g_lifts(const TCContext& C) {
  std::vector<int> gl(static_cast<std::size_t>(C.P.size()));
  for (int t = 0; t < C.P.size(); ++t)
    gl[static_cast<std::size_t>(t)] = C.HP.X.at(C.P.simplex(t))
                                          .lift(C.base.g.val[static_cast<std::size_t>(t)]);
  return gl;
}
inline std::vector<int> least_e_lifts(const TCContext& C) {
  std::vector<int> el(static_cast<std::size_t>(C.N.charts));
  for (int i = 0; i < C.N.charts; ++i)
    el[static_cast<std::size_t>(i)] =
        C.HP.some_lift_e({i}, C.base.e[static_cast<std::size_t>(i)]);
  return el;
}

// obstruction cochain of the chosen lifts (g'_ij per pair, e'_i per chart);
// changing the lifts by (b0, b1) adds tc_delta1(b0, b1)
inline TC2 hyper_obstruction(const TCContext& C, const std::vector<int>& gl,
                             const std::vector<int>& el) {
  const HyperPair& HP = C.HP;
  for (int t = 0; t < C.P.size(); ++t)
    if (HP.X.at(C.P.simplex(t)).p(gl[static_cast<std::size_t>(t)]) !=
        C.base.g.val[static_cast<std::size_t>(t)])
      throw std::invalid_argument("hyper_obstruction: g lift is wrong");
  for (int i = 0; i < C.N.charts; ++i)
    if (HP.p_set({i}, el[static_cast<std::size_t>(i)]) !=
        C.base.e[static_cast<std::size_t>(i)])
      throw std::invalid_argument("hyper_obstruction: e lift is wrong");
  // lifted pair values with the antisymmetry convention
  auto lift_value = [&](int i, int j, const Nerve::Simplex& target) {
    const int a = std::min(i, j), b = std::max(i, j);
    const Nerve::Simplex pr{a, b};
    int g = gl[static_cast<std::size_t>(C.P.at(a, b))];
    if (i > j) g = HP.X.at(pr).Gp.inv(g);
    return HP.X.rT(pr, target, g);
  };
  TC2 obs;
  obs.a0.resize(static_cast<std::size_t>(C.T.size()));
  obs.a1.resize(static_cast<std::size_t>(C.P.size()));
  for (int u = 0; u < C.T.size(); ++u) {
    const auto& tr = C.T.list[static_cast<std::size_t>(u)];
    const int i = tr[0], j = tr[1], k = tr[2];
    const Nerve::Simplex s{i, j, k};
    const FinExtension& Es = HP.X.at(s);
    const int prod = Es.Gp.mul(
        Es.Gp.mul(lift_value(i, j, s), lift_value(j, k, s)),
        Es.Gp.inv(lift_value(i, k, s)));
    const int kk = Es.kidx[static_cast<std::size_t>(prod)];
    if (kk < 0)
      throw std::logic_error("hyper_obstruction: triple defect left the kernel");
    obs.a0[static_cast<std::size_t>(u)] = kk;
  }
  for (int t = 0; t < C.P.size(); ++t) {
    auto [i, j] = C.P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const int moved =
        HP.Ep.apply(pr, gl[static_cast<std::size_t>(t)],
                    HP.Ep.restrict_elem({j}, pr, el[static_cast<std::size_t>(j)]));
    const int baseep =
        HP.Ep.restrict_elem({i}, pr, el[static_cast<std::size_t>(i)]);
    obs.a1[static_cast<std::size_t>(t)] = HP.a1_diff(pr, moved, baseep);
  }
  return obs;
}

inline HyperDelta1Result hyper_delta1(const Nerve& N, const HyperPair& HP,
                                      const HyperCocycle1& c, long long guard) {
  TCContext C(N, HP, c);
  const GroupSheaf ST = HP.X.total_sheaf(N);
  HyperDelta1Result R;
  R.obs = hyper_obstruction(C, least_g_lifts(C), least_e_lifts(C));
  if (!is_tc2_cocycle(C, R.obs))
    throw std::logic_error("hyper_delta1: output is not a twisted 2-cocycle");

  // vanishing: some change of lifts kills the obstruction on the nose
  const TC2 target = tc2_neg(C, R.obs);
  {
    std::vector<int> radix;
    for (int t = 0; t < C.P.size(); ++t)
      radix.push_back(HP.X.at(C.P.simplex(t)).A.n);
    for (int i = 0; i < N.charts; ++i) radix.push_back(HP.a1_at({i}).n);
    try {
      for_each_tuple(radix, guard, "hyper_delta1 vanishing",
                     [&](const std::vector<int>& x) {
                       TC1 b;
                       b.a0.assign(x.begin(), x.begin() + C.P.size());
                       b.a1.assign(x.begin() + C.P.size(), x.end());
                       if (tc_delta1(C, b) == target) throw int(0);
                     });
    } catch (int) {
      R.vanishes = true;
    }
  }

  // oracle: enumerate Z^1(G' act E') and test projection into the orbit of c
  std::set<std::vector<int>> orbit;
  {
    std::vector<int> radix;
    for (int i = 0; i < N.charts; ++i) radix.push_back(C.SG.at({i}).n);
    for_each_tuple(radix, guard, "hyper_delta1 orbit",
                   [&](const std::vector<int>& h) {
                     orbit.insert(hyper_act(C.SG, HP.E, C.P, h, c).key());
                   });
  }
  for (const HyperCocycle1& cp :
       hyper_z1_enumerate(N, ST, HP.Ep, C.P, guard)) {
    HyperCocycle1 pc;
    pc.g.val.resize(static_cast<std::size_t>(C.P.size()));
    pc.e.resize(static_cast<std::size_t>(N.charts));
    for (int t = 0; t < C.P.size(); ++t)
      pc.g.val[static_cast<std::size_t>(t)] =
          HP.X.at(C.P.simplex(t)).p(cp.g.val[static_cast<std::size_t>(t)]);
    for (int i = 0; i < N.charts; ++i)
      pc.e[static_cast<std::size_t>(i)] =
          HP.p_set({i}, cp.e[static_cast<std::size_t>(i)]);
    if (orbit.count(pc.key())) {
      R.lift_exists = true;
      break;
    }
  }
  return R;
}

// ---------------------------------------------------------------------------
// cohomology of the twisted two-term complex, finite backend

struct TwistedH {
  long long count = 0;                 // number of classes
  std::vector<std::vector<int>> reps;  // canonical representatives (flattened)
};

inline TwistedH twisted_h_finite(const Nerve& N, const HyperPair& HP,
                                 const HyperCocycle1& base, int degree,
                                 long long guard) {
  TCContext C(N, HP, base);
  TwistedH out;
  if (degree == 0) {
    std::vector<int> radix;
    for (int i = 0; i < N.charts; ++i) radix.push_back(HP.X.at({i}).A.n);
    for_each_tuple(radix, guard, "twisted_h degree 0",
                   [&](const std::vector<int>& b) {
                     if (tc_delta0(C, b).zero()) {
                       ++out.count;
                       out.reps.push_back(b);
                     }
                   });
    return out;
  }
  if (degree == 1) {
    std::vector<int> radix;
    long long gauge = 1;
    for (int i = 0; i < N.charts; ++i)
      gauge = guard_mul(gauge, HP.X.at({i}).A.n, guard, "twisted_h degree 1");
    for (int t = 0; t < C.P.size(); ++t)
      radix.push_back(HP.X.at(C.P.simplex(t)).A.n);
    for (int i = 0; i < N.charts; ++i) radix.push_back(HP.a1_at({i}).n);
    long long space = gauge;
    for (int r : radix) space = guard_mul(space, r, guard, "twisted_h degree 1");
    std::set<TC1> classes;
    for_each_tuple(radix, guard, "twisted_h degree 1",
                   [&](const std::vector<int>& x) {
                     TC1 a;
                     a.a0.assign(x.begin(), x.begin() + C.P.size());
                     a.a1.assign(x.begin() + C.P.size(), x.end());
                     if (is_tc1_cocycle(C, a))
                       classes.insert(tc1_canonical(C, a, guard));
                   });
    out.count = static_cast<long long>(classes.size());
    for (const TC1& a : classes) {
      std::vector<int> flat = a.a0;
      flat.insert(flat.end(), a.a1.begin(), a.a1.end());
      out.reps.push_back(flat);
    }
    return out;
  }
  if (degree == 2) {
    std::vector<int> radix1;
    for (int t = 0; t < C.P.size(); ++t)
      radix1.push_back(HP.X.at(C.P.simplex(t)).A.n);
    for (int i = 0; i < N.charts; ++i) radix1.push_back(HP.a1_at({i}).n);
    std::vector<int> radix2;
    for (int u = 0; u < C.T.size(); ++u) {
      const auto& tr = C.T.list[static_cast<std::size_t>(u)];
      radix2.push_back(HP.X.at({tr[0], tr[1], tr[2]}).A.n);
    }
    for (int t = 0; t < C.P.size(); ++t)
      radix2.push_back(HP.a1_at(C.P.simplex(t)).n);
    long long space = 1;
    for (int r : radix1) space = guard_mul(space, r, guard, "twisted_h degree 2");
    for (int r : radix2) space = guard_mul(space, r, guard, "twisted_h degree 2");
    // canonical rep = least element of the coset under im(tc_delta1)
    auto canonical2 = [&](const TC2& a) {
      TC2 best = a;
      for_each_tuple(radix1, guard, "twisted_h degree 2",
                     [&](const std::vector<int>& x) {
                       TC1 b;
                       b.a0.assign(x.begin(), x.begin() + C.P.size());
                       b.a1.assign(x.begin() + C.P.size(), x.end());
                       const TC2 cand = tc2_add(C, a, tc_delta1(C, b));
                       if (cand < best) best = cand;
                     });
      return best;
    };
    std::set<TC2> classes;
    for_each_tuple(radix2, guard, "twisted_h degree 2",
                   [&](const std::vector<int>& x) {
                     TC2 a;
                     a.a0.assign(x.begin(), x.begin() + C.T.size());
                     a.a1.assign(x.begin() + C.T.size(), x.end());
                     if (is_tc2_cocycle(C, a)) classes.insert(canonical2(a));
                   });
    out.count = static_cast<long long>(classes.size());
    for (const TC2& a : classes) {
      std::vector<int> flat = a.a0;
      flat.insert(flat.end(), a.a1.begin(), a.a1.end());
      out.reps.push_back(flat);
    }
    return out;
  }
  throw std::invalid_argument("twisted_h_finite: degree must be 0, 1 or 2");
}

// ---------------------------------------------------------------------------
// morphisms of pairs and the induced map on hyper classes

struct HyperMorphism {
  std::map<Nerve::Simplex, GroupHom> phi;      // G1(s) -> G2(s)
  std::map<Nerve::Simplex, std::vector<int>> psi; // E1(s) -> E2(s)

  void validate(const Nerve& N, const GroupSheaf& S1, const SetSheaf& E1,
                const GroupSheaf& S2, const SetSheaf& E2) const {
    for (const auto& s : N.simplices) {
      const GroupHom& f = phi.at(s);
      const std::vector<int>& m = psi.at(s);
      if (static_cast<int>(m.size()) != E1.size(s))
        throw std::invalid_argument("pair morphism: set map has wrong size");
      for (int e : m)
        if (e < 0 || e >= E2.size(s))
          throw std::invalid_argument("pair morphism: set map out of range");
      for (int g = 0; g < S1.at(s).n; ++g)
        for (int e = 0; e < E1.size(s); ++e)
          if (m[static_cast<std::size_t>(E1.apply(s, g, e))] !=
              E2.apply(s, f(g), m[static_cast<std::size_t>(e)]))
            throw std::invalid_argument("pair morphism: not equivariant");
      for (const auto& t : N.simplices) {
        if (t == s || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        for (int g = 0; g < S1.at(s).n; ++g)
          if (phi.at(t)(S1.restrict_elem(s, t, g)) !=
              S2.restrict_elem(s, t, phi.at(s)(g)))
            throw std::invalid_argument(
                "pair morphism: group map not compatible with restriction");
        for (int e = 0; e < E1.size(s); ++e)
          if (psi.at(t)[static_cast<std::size_t>(E1.restrict_elem(s, t, e))] !=
              E2.restrict_elem(s, t, psi.at(s)[static_cast<std::size_t>(e)]))
            throw std::invalid_argument(
                "pair morphism: set map not compatible with restriction");
      }
    }
  }
};

inline HyperCocycle1 hyper_map(const Nerve& N, const HyperMorphism& M,
                               const PairIndexer& P, const HyperCocycle1& c) {
  HyperCocycle1 out;
  out.g.val.resize(c.g.val.size());
  for (int t = 0; t < P.size(); ++t)
    out.g.val[static_cast<std::size_t>(t)] =
        M.phi.at(P.simplex(t))(c.g.val[static_cast<std::size_t>(t)]);
  out.e.resize(c.e.size());
  for (int i = 0; i < N.charts; ++i)
    out.e[static_cast<std::size_t>(i)] =
        M.psi.at({i})[static_cast<std::size_t>(c.e[static_cast<std::size_t>(i)])];
  return out;
}

} // namespace nctk
