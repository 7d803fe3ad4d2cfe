// Cech 1-cohomology of finite nerves with coefficients in sheaves of finite
// groups, and the connecting calculus of an abelian-kernel extension of
// group sheaves 1 -> A -> G' -> G -> 1:
//
//   delta0 : H^0(G)  -> H^1(A),    a_ij = (g'_i)^{-1} g'_j
//   delta1 : H^1(G)  -> "H^2(A^g)", c_ijk = g'_ij g'_jk g'_ki (normalised lifts)
//   fibers of H^1(G') -> H^1(G) over [g]  ==  orbits of H^0(G^g) acting
//   twistedly on H^1(A^g)
//
// Sheaves carry one finite group per simplex plus restriction homomorphisms,
// so stalkwise-constant-but-twisted coefficient systems (monodromy gluing)
// are first-class citizens; all the interesting nonvanishing instances live
// there.  Every guarded enumeration throws GuardExceeded instead of silently
// truncating, and every classifying answer is cross-checked against a direct
// search where one exists (global lifts for delta0, cocycle lifts for delta1).
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nctk/fingroup.hpp"
#include "nctk/nerve.hpp"

namespace nctk {

struct GuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// multiply search-space sizes with an explicit ceiling
inline long long guard_mul(long long cur, long long factor, long long guard,
                           const char* what) {
  if (factor <= 0) return 0;
  if (cur > guard / factor) {
    std::ostringstream os;
    os << "search-space guard exceeded in " << what << " (" << cur << " * "
       << factor << " > " << guard << ")";
    throw GuardExceeded(os.str());
  }
  return cur * factor;
}

// iterate all tuples x with 0 <= x[t] < radix[t]; guard the total count
template <typename F>
void for_each_tuple(const std::vector<int>& radix, long long guard,
                    const char* what, F&& fn) {
  long long total = 1;
  for (int r : radix) total = guard_mul(total, r, guard, what);
  if (total == 0) return;
  std::vector<int> x(radix.size(), 0);
  while (true) {
    fn(static_cast<const std::vector<int>&>(x));
    std::size_t t = 0;
    for (; t < x.size(); ++t) {
      if (++x[t] < radix[t]) break;
      x[t] = 0;
    }
    if (t == x.size()) break;
  }
}

// ---------------------------------------------------------------------------
// indexing of the nerve's pairs and triples

struct PairIndexer {
  std::vector<std::pair<int, int>> list; // sorted lexicographically
  std::map<std::pair<int, int>, int> pos;

  static PairIndexer of(const Nerve& N) {
    PairIndexer P;
    for (const auto& s : N.pairs()) {
      P.pos[{s[0], s[1]}] = static_cast<int>(P.list.size());
      P.list.push_back({s[0], s[1]});
    }
    return P;
  }
  int size() const { return static_cast<int>(list.size()); }
  int at(int i, int j) const { // requires i < j and the pair to exist
    auto it = pos.find({i, j});
    if (it == pos.end()) throw std::invalid_argument("pair not in nerve");
    return it->second;
  }
  bool has(int i, int j) const { return pos.count({i, j}) != 0; }
  Nerve::Simplex simplex(int t) const {
    return {list[static_cast<std::size_t>(t)].first,
            list[static_cast<std::size_t>(t)].second};
  }
};

struct TripleIndexer {
  std::vector<std::array<int, 3>> list;

  static TripleIndexer of(const Nerve& N) {
    TripleIndexer T;
    for (const auto& s : N.triples()) T.list.push_back({s[0], s[1], s[2]});
    return T;
  }
  int size() const { return static_cast<int>(list.size()); }
  int find(int i, int j, int k) const {
    for (int t = 0; t < size(); ++t)
      if (list[static_cast<std::size_t>(t)] == std::array<int, 3>{i, j, k}) return t;
    throw std::invalid_argument("triple not in nerve");
  }
};

// ---------------------------------------------------------------------------
// sheaves of finite groups on a nerve

struct GroupSheaf {
  std::map<Nerve::Simplex, FinGroup> grp;
  // restriction homomorphism G(U_S) -> G(U_T) for each S subset T
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> res;

  const FinGroup& at(const Nerve::Simplex& s) const {
    auto it = grp.find(s);
    if (it == grp.end()) throw std::invalid_argument("sheaf: unknown simplex");
    return it->second;
  }
  int restrict_elem(const Nerve::Simplex& from, const Nerve::Simplex& to,
                    int g) const {
    if (from == to) return g;
    auto it = res.find({from, to});
    if (it == res.end())
      throw std::invalid_argument("sheaf: missing restriction");
    return it->second(g);
  }

  static GroupSheaf constant(const Nerve& N, const FinGroup& G) {
    GroupSheaf S;
    for (const auto& s : N.simplices) S.grp[s] = G;
    std::vector<int> idmap(static_cast<std::size_t>(G.n));
    for (int a = 0; a < G.n; ++a) idmap[static_cast<std::size_t>(a)] = a;
    for (const auto& s : N.simplices)
      for (const auto& t : N.simplices)
        if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
          S.res[{s, t}] = GroupHom::checked(G, G, idmap);
    return S;
  }

  void validate(const Nerve& N) const {
    for (const auto& s : N.simplices) {
      at(s).validate();
      for (const auto& t : N.simplices) {
        if (s == t || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        auto it = res.find({s, t});
        if (it == res.end())
          throw std::invalid_argument("sheaf: missing restriction");
        GroupHom::checked(at(s), at(t), it->second.map); // rechecks hom law
        // functoriality s -> t -> v == s -> v
        for (const auto& v : N.simplices) {
          if (t == v || !std::includes(v.begin(), v.end(), t.begin(), t.end()))
            continue;
          for (int g = 0; g < at(s).n; ++g)
            if (restrict_elem(t, v, restrict_elem(s, t, g)) !=
                restrict_elem(s, v, g))
              throw std::invalid_argument("sheaf: restrictions not functorial");
        }
      }
    }
  }
};

// 1-cochain: one group element per ordered pair i < j of the nerve;
// g_ii = 1 and g_ji = g_ij^{-1} are built into the representation,
// matching the normalisation of the cocycle definition
struct Cocycle1 {
  std::vector<int> val;
  bool operator==(const Cocycle1& o) const { return val == o.val; }
  bool operator<(const Cocycle1& o) const { return val < o.val; }
};

struct Z1Report {
  bool ok = true;
  std::vector<std::string> violations;
};

// value of the cochain on the ordered pair (i, j) restricted into the group
// of `target`; uses g_ji = g_ij^{-1} when i > j and g_ii = 1
inline int pair_value(const GroupSheaf& S, const PairIndexer& P,
                      const Cocycle1& c, int i, int j,
                      const Nerve::Simplex& target) {
  if (i == j) return S.at(target).id();
  const int a = std::min(i, j), b = std::max(i, j);
  const Nerve::Simplex pr{a, b};
  int g = c.val[static_cast<std::size_t>(P.at(a, b))];
  if (i > j) g = S.at(pr).inv(g);
  return S.restrict_elem(pr, target, g);
}

inline Z1Report validate_z1(const Nerve& N, const GroupSheaf& S,
                            const PairIndexer& P, const Cocycle1& c) {
  Z1Report rep;
  if (static_cast<int>(c.val.size()) != P.size()) {
    rep.ok = false;
    rep.violations.push_back("cochain length does not match nerve pairs");
    return rep;
  }
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const int order = S.at({i, j}).n;
    if (c.val[static_cast<std::size_t>(t)] < 0 ||
        c.val[static_cast<std::size_t>(t)] >= order) {
      rep.ok = false;
      std::ostringstream os;
      os << "value at (" << i << "," << j << ") out of range";
      rep.violations.push_back(os.str());
      return rep;
    }
  }
  for (const auto& s : N.triples()) {
    const int i = s[0], j = s[1], k = s[2];
    const FinGroup& G = S.at(s);
    const int gij = pair_value(S, P, c, i, j, s);
    const int gjk = pair_value(S, P, c, j, k, s);
    const int gik = pair_value(S, P, c, i, k, s);
    if (G.mul(gij, gjk) != gik) {
      rep.ok = false;
      std::ostringstream os;
      os << "triangle (" << i << "," << j << "," << k
         << "): g_ij*g_jk != g_ik";
      rep.violations.push_back(os.str());
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// H^0 and plain H^1 by guarded enumeration

inline std::vector<std::vector<int>> h0_sections(const Nerve& N,
                                                 const GroupSheaf& S,
                                                 long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(S.at({i}).n);
  std::vector<std::vector<int>> out;
  const auto prs = N.pairs();
  for_each_tuple(radix, guard, "h0_sections", [&](const std::vector<int>& x) {
    for (const auto& pr : prs) {
      if (S.restrict_elem({pr[0]}, pr, x[static_cast<std::size_t>(pr[0])]) !=
          S.restrict_elem({pr[1]}, pr, x[static_cast<std::size_t>(pr[1])]))
        return;
    }
    out.push_back(x);
  });
  return out;
}

inline std::vector<Cocycle1> z1_enumerate(const Nerve& N, const GroupSheaf& S,
                                          const PairIndexer& P,
                                          long long guard) {
  std::vector<int> radix;
  for (auto [i, j] : P.list) radix.push_back(S.at({i, j}).n);
  std::vector<Cocycle1> out;
  for_each_tuple(radix, guard, "z1_enumerate", [&](const std::vector<int>& x) {
    Cocycle1 c{x};
    if (validate_z1(N, S, P, c).ok) out.push_back(std::move(c));
  });
  return out;
}

// coboundary action g ~ h_i g_ij h_j^{-1} with h_i a 0-cochain
inline Cocycle1 coboundary_act(const GroupSheaf& S, const PairIndexer& P,
                               const std::vector<int>& h, const Cocycle1& c) {
  Cocycle1 out = c;
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinGroup& G = S.at(pr);
    const int hi = S.restrict_elem({i}, pr, h[static_cast<std::size_t>(i)]);
    const int hj = S.restrict_elem({j}, pr, h[static_cast<std::size_t>(j)]);
    out.val[static_cast<std::size_t>(t)] =
        G.mul(G.mul(hi, c.val[static_cast<std::size_t>(t)]), G.inv(hj));
  }
  return out;
}

// lexicographically least element of the coboundary orbit of c
inline Cocycle1 h1_canonical(const Nerve& N, const GroupSheaf& S,
                             const PairIndexer& P, const Cocycle1& c,
                             long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(S.at({i}).n);
  Cocycle1 best = c;
  for_each_tuple(radix, guard, "h1_canonical", [&](const std::vector<int>& h) {
    Cocycle1 cand = coboundary_act(S, P, h, c);
    if (cand < best) best = std::move(cand);
  });
  return best;
}

struct H1Classes {
  std::vector<Cocycle1> reps; // canonical, sorted
  long long z1_count = 0;
};

inline H1Classes h1_classes(const Nerve& N, const GroupSheaf& S,
                            long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  H1Classes out;
  std::set<Cocycle1> seen;
  for (const Cocycle1& c : z1_enumerate(N, S, P, guard)) {
    ++out.z1_count;
    seen.insert(h1_canonical(N, S, P, c, guard));
  }
  out.reps.assign(seen.begin(), seen.end());
  return out;
}

// ---------------------------------------------------------------------------
// extensions of group sheaves: per-simplex 1 -> A -> G' -> G -> 1 together
// with restriction homomorphisms of the total sheaf G' that commute with the
// projections; restrictions of G and A are induced and checked

struct ExtensionSheaf {
  std::map<Nerve::Simplex, FinExtension> ext;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> resT;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> resG;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, std::vector<int>> resA;

  const FinExtension& at(const Nerve::Simplex& s) const {
    auto it = ext.find(s);
    if (it == ext.end())
      throw std::invalid_argument("extension sheaf: unknown simplex");
    return it->second;
  }
  int rT(const Nerve::Simplex& f, const Nerve::Simplex& t, int x) const {
    if (f == t) return x;
    return resT.at({f, t})(x);
  }
  int rG(const Nerve::Simplex& f, const Nerve::Simplex& t, int g) const {
    if (f == t) return g;
    return resG.at({f, t})(g);
  }
  int rA(const Nerve::Simplex& f, const Nerve::Simplex& t, int a) const {
    if (f == t) return a;
    return resA.at({f, t})[static_cast<std::size_t>(a)];
  }

  GroupSheaf total_sheaf(const Nerve& N) const {
    GroupSheaf S;
    for (const auto& s : N.simplices) S.grp[s] = at(s).Gp;
    S.res = resT;
    return S;
  }
  GroupSheaf quot_sheaf(const Nerve& N) const {
    GroupSheaf S;
    for (const auto& s : N.simplices) S.grp[s] = at(s).G;
    S.res = resG;
    return S;
  }
  GroupSheaf kernel_sheaf(const Nerve& N) const {
    GroupSheaf S;
    for (const auto& s : N.simplices) S.grp[s] = at(s).A;
    for (const auto& [key, map] : resA) {
      S.res[key] = GroupHom::checked(at(key.first).A, at(key.second).A, map);
    }
    return S;
  }

  static ExtensionSheaf build(
      const Nerve& N, std::map<Nerve::Simplex, FinExtension> data,
      std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> rT) {
    ExtensionSheaf X;
    X.ext = std::move(data);
    X.resT = std::move(rT);
    for (const auto& s : N.simplices)
      if (!X.ext.count(s))
        throw std::invalid_argument("extension sheaf: missing simplex data");
    for (const auto& s : N.simplices) {
      for (const auto& t : N.simplices) {
        if (s == t || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        auto it = X.resT.find({s, t});
        if (it == X.resT.end())
          throw std::invalid_argument("extension sheaf: missing restriction");
        const FinExtension& Es = X.at(s);
        const FinExtension& Et = X.at(t);
        GroupHom::checked(Es.Gp, Et.Gp, it->second.map);
        // induced quotient restriction: g |-> p_T(rT(any lift of g));
        // well defined iff rT maps ker(p_S) into ker(p_T)
        for (int a : Es.kernel)
          if (Et.p(it->second(a)) != 0)
            throw std::invalid_argument(
                "extension sheaf: restriction does not preserve the kernel");
        std::vector<int> qmap(static_cast<std::size_t>(Es.G.n), -1);
        for (int x = 0; x < Es.Gp.n; ++x) {
          const int g = Es.p(x);
          const int im = Et.p(it->second(x));
          if (qmap[static_cast<std::size_t>(g)] < 0)
            qmap[static_cast<std::size_t>(g)] = im;
          else if (qmap[static_cast<std::size_t>(g)] != im)
            throw std::invalid_argument(
                "extension sheaf: induced quotient restriction ill defined");
        }
        X.resG[{s, t}] = GroupHom::checked(Es.G, Et.G, qmap);
        std::vector<int> amap(Es.kernel.size());
        for (std::size_t a = 0; a < Es.kernel.size(); ++a) {
          const int im = it->second(Es.kernel[a]);
          const int k = Et.kidx[static_cast<std::size_t>(im)];
          if (k < 0)
            throw std::logic_error("extension sheaf: kernel image escaped");
          amap[a] = k;
        }
        X.resA[{s, t}] = std::move(amap);
      }
    }
    // functoriality of the total restrictions (induces it for G and A)
    X.total_sheaf(N).validate(N);
    X.quot_sheaf(N).validate(N);
    X.kernel_sheaf(N).validate(N);
    return X;
  }

  static ExtensionSheaf constant(const Nerve& N, const FinExtension& E) {
    std::map<Nerve::Simplex, FinExtension> data;
    for (const auto& s : N.simplices) data[s] = E;
    std::vector<int> idmap(static_cast<std::size_t>(E.Gp.n));
    for (int a = 0; a < E.Gp.n; ++a) idmap[static_cast<std::size_t>(a)] = a;
    std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> rT;
    for (const auto& s : N.simplices)
      for (const auto& t : N.simplices)
        if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
          rT[{s, t}] = GroupHom::checked(E.Gp, E.Gp, idmap);
    return build(N, std::move(data), std::move(rT));
  }
};

// 1-cochain with kernel values: per pair t, an index into at(pair).A
struct ACocycle {
  std::vector<int> val;
  bool operator==(const ACocycle& o) const { return val == o.val; }
  bool operator<(const ACocycle& o) const { return val < o.val; }
  bool zero() const {
    for (int v : val)
      if (v != 0) return false;
    return true;
  }
};

// a_ij + Ad(g_ij) a_jk == a_ik on every triple, all restricted to the triple
inline bool is_twisted_cocycle(const Nerve& N, const ExtensionSheaf& X,
                               const PairIndexer& P, const Cocycle1& g,
                               const ACocycle& a) {
  for (const auto& s : N.triples()) {
    const int i = s[0], j = s[1], k = s[2];
    const FinExtension& E = X.at(s);
    const Nerve::Simplex pij{i, j}, pjk{j, k}, pik{i, k};
    const int aij = X.rA(pij, s, a.val[static_cast<std::size_t>(P.at(i, j))]);
    const int ajk = X.rA(pjk, s, a.val[static_cast<std::size_t>(P.at(j, k))]);
    const int aik = X.rA(pik, s, a.val[static_cast<std::size_t>(P.at(i, k))]);
    const int gij = X.rG(pij, s, g.val[static_cast<std::size_t>(P.at(i, j))]);
    if (E.a_mul(aij, E.ad_of(gij, ajk)) != aik) return false;
  }
  return true;
}

inline std::vector<ACocycle> twisted_z1(const Nerve& N,
                                        const ExtensionSheaf& X,
                                        const PairIndexer& P, const Cocycle1& g,
                                        long long guard) {
  std::vector<int> radix;
  for (int t = 0; t < P.size(); ++t) radix.push_back(X.at(P.simplex(t)).A.n);
  std::vector<ACocycle> out;
  for_each_tuple(radix, guard, "twisted_z1", [&](const std::vector<int>& x) {
    ACocycle a{x};
    if (is_twisted_cocycle(N, X, P, g, a)) out.push_back(std::move(a));
  });
  return out;
}

// twisted coboundary of a 0-cochain b (b_i in A(U_i)):
// (delta b)_ij = b_i - Ad(g_ij) b_j, restricted into A(U_ij)
inline ACocycle twisted_coboundary(const Nerve& N, const ExtensionSheaf& X,
                                   const PairIndexer& P, const Cocycle1& g,
                                   const std::vector<int>& b) {
  (void)N;
  ACocycle out;
  out.val.resize(static_cast<std::size_t>(P.size()));
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinExtension& E = X.at(pr);
    const int bi = X.rA({i}, pr, b[static_cast<std::size_t>(i)]);
    const int bj = X.rA({j}, pr, b[static_cast<std::size_t>(j)]);
    const int gij = g.val[static_cast<std::size_t>(t)];
    out.val[static_cast<std::size_t>(t)] =
        E.a_mul(bi, E.a_inv(E.ad_of(gij, bj)));
  }
  return out;
}

inline ACocycle a_add(const ExtensionSheaf& X, const PairIndexer& P,
                      const ACocycle& a, const ACocycle& b) {
  ACocycle out = a;
  for (int t = 0; t < P.size(); ++t)
    out.val[static_cast<std::size_t>(t)] = X.at(P.simplex(t)).A.mul(
        out.val[static_cast<std::size_t>(t)], b.val[static_cast<std::size_t>(t)]);
  return out;
}

// exact canonical representative of the twisted class of `a`: the
// lexicographically least element of { a + delta(b) } over all gauges b
inline ACocycle twisted_canonical(const Nerve& N, const ExtensionSheaf& X,
                                  const PairIndexer& P, const Cocycle1& g,
                                  const ACocycle& a, long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(X.at({i}).A.n);
  ACocycle best = a;
  for_each_tuple(radix, guard, "twisted_canonical",
                 [&](const std::vector<int>& b) {
                   ACocycle cand =
                       a_add(X, P, a, twisted_coboundary(N, X, P, g, b));
                   if (cand < best) best = std::move(cand);
                 });
  return best;
}

// trivial G-cocycle (identity on every pair) for the untwisted case
inline Cocycle1 trivial_cocycle(const PairIndexer& P) {
  Cocycle1 c;
  c.val.assign(static_cast<std::size_t>(P.size()), 0);
  return c;
}

// ---------------------------------------------------------------------------
// delta0: global section of G  ->  class of (g'_i)^{-1} g'_j in H^1(A)

struct Delta0Result {
  ACocycle a;         // the cocycle for the least-preimage lifts
  ACocycle canonical; // exact class invariant (all zero iff class vanishes)
  bool vanishes = false;
  bool lifts_globally = false; // direct search over all preimage choices
};

inline Delta0Result delta0(const Nerve& N, const ExtensionSheaf& X,
                           const std::vector<int>& family, long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  if (static_cast<int>(family.size()) != N.charts)
    throw std::invalid_argument("delta0: family size");
  for (auto [i, j] : P.list) {
    const Nerve::Simplex pr{i, j};
    if (X.rG({i}, pr, family[static_cast<std::size_t>(i)]) !=
        X.rG({j}, pr, family[static_cast<std::size_t>(j)]))
      throw std::invalid_argument("delta0: not a global section");
  }
  Delta0Result R;
  R.a.val.resize(static_cast<std::size_t>(P.size()));
  std::vector<int> lift(family.size());
  for (std::size_t i = 0; i < family.size(); ++i)
    lift[i] = X.at({static_cast<int>(i)}).lift(family[i]);
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex pr{i, j};
    const FinExtension& E = X.at(pr);
    const int gi = X.rT({i}, pr, lift[static_cast<std::size_t>(i)]);
    const int gj = X.rT({j}, pr, lift[static_cast<std::size_t>(j)]);
    const int prod = E.Gp.mul(E.Gp.inv(gi), gj);
    const int k = E.kidx[static_cast<std::size_t>(prod)];
    if (k < 0) throw std::logic_error("delta0: difference not in kernel");
    R.a.val[static_cast<std::size_t>(t)] = k;
  }
  const Cocycle1 triv = trivial_cocycle(P);
  R.canonical = twisted_canonical(N, X, P, triv, R.a, guard);
  R.vanishes = R.canonical.zero();

  // oracle: does the family lift to a global section of G'?
  std::vector<std::vector<int>> fibers;
  std::vector<int> radix;
  for (std::size_t i = 0; i < family.size(); ++i) {
    fibers.push_back(X.at({static_cast<int>(i)}).fiber(family[i]));
    radix.push_back(static_cast<int>(fibers.back().size()));
  }
  bool found = false;
  for_each_tuple(radix, guard, "delta0 oracle", [&](const std::vector<int>& x) {
    if (found) return;
    for (auto [i, j] : P.list) {
      const Nerve::Simplex pr{i, j};
      const int xi =
          fibers[static_cast<std::size_t>(i)][static_cast<std::size_t>(x[static_cast<std::size_t>(i)])];
      const int xj =
          fibers[static_cast<std::size_t>(j)][static_cast<std::size_t>(x[static_cast<std::size_t>(j)])];
      if (X.rT({i}, pr, xi) != X.rT({j}, pr, xj)) return;
    }
    found = true;
  });
  R.lifts_globally = found;
  return R;
}

// action of a global section h of G on an A-cochain: (h . a)_ij = Ad(h|_ij) a_ij
inline ACocycle a_act_h0(const Nerve& N, const ExtensionSheaf& X,
                         const std::vector<int>& family, const ACocycle& a) {
  const PairIndexer P = PairIndexer::of(N);
  (void)N;
  ACocycle out = a;
  for (int t = 0; t < P.size(); ++t) {
    auto [i, j] = P.list[static_cast<std::size_t>(t)];
    (void)j;
    const Nerve::Simplex pr{i, j};
    const FinExtension& E = X.at(pr);
    out.val[static_cast<std::size_t>(t)] =
        E.ad_of(X.rG({i}, pr, family[static_cast<std::size_t>(i)]),
                a.val[static_cast<std::size_t>(t)]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// delta1: Z^1(G)  ->  twisted 2-cocycle class; zero iff the class of g lifts

struct Delta1Result {
  std::vector<int> c;   // per triple (i<j<k): kernel index of g'_ij g'_jk g'_ki
  bool vanishes = false;    // c is a twisted coboundary of a pair cochain
  bool lift_exists = false; // direct search: some Z^1(G') projects into [g]
};

inline Delta1Result delta1(const Nerve& N, const ExtensionSheaf& X,
                           const Cocycle1& g, long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  const GroupSheaf SG = X.quot_sheaf(N);
  {
    const Z1Report rep = validate_z1(N, SG, P, g);
    if (!rep.ok)
      throw std::invalid_argument("delta1: input is not a 1-cocycle: " +
                                  rep.violations.front());
  }
  const TripleIndexer T = TripleIndexer::of(N);
  Delta1Result R;
  R.c.resize(static_cast<std::size_t>(T.size()));

  // normalised lifts: one lift per ordered pair i<j, inverse for j>i
  std::vector<int> lift(static_cast<std::size_t>(P.size()));
  for (int t = 0; t < P.size(); ++t)
    lift[static_cast<std::size_t>(t)] =
        X.at(P.simplex(t)).lift(g.val[static_cast<std::size_t>(t)]);
  for (int t = 0; t < T.size(); ++t) {
    const auto [i, j, k] = T.list[static_cast<std::size_t>(t)];
    const Nerve::Simplex tri{i, j, k};
    const FinExtension& E = X.at(tri);
    const int gij = X.rT({i, j}, tri, lift[static_cast<std::size_t>(P.at(i, j))]);
    const int gjk = X.rT({j, k}, tri, lift[static_cast<std::size_t>(P.at(j, k))]);
    const int gik = X.rT({i, k}, tri, lift[static_cast<std::size_t>(P.at(i, k))]);
    const int prod = E.Gp.mul(E.Gp.mul(gij, gjk), E.Gp.inv(gik));
    const int a = E.kidx[static_cast<std::size_t>(prod)];
    if (a < 0) throw std::logic_error("delta1: triple product not in kernel");
    R.c[static_cast<std::size_t>(t)] = a;
  }

  // twisted 2-cocycle identity on quadruples (consistency assertion)
  for (const auto& q : N.quads()) {
    const int i = q[0], j = q[1], k = q[2], l = q[3];
    const FinExtension& E = X.at(q);
    auto cq = [&](int a, int b, int c) {
      const Nerve::Simplex tri{a, b, c};
      return X.rA(tri, q, R.c[static_cast<std::size_t>(T.find(a, b, c))]);
    };
    const int lhs = E.a_mul(cq(i, j, k), cq(i, k, l));
    const int gij =
        X.rG({i, j}, q, g.val[static_cast<std::size_t>(P.at(i, j))]);
    const int rhs = E.a_mul(E.ad_of(gij, cq(j, k, l)), cq(i, j, l));
    if (lhs != rhs)
      throw std::logic_error("delta1: twisted 2-cocycle identity failed");
  }

  // vanishing: exists b on pairs with c_ijk = b_ij + Ad(g_ij) b_jk - b_ik
  if (T.size() == 0) {
    R.vanishes = true;
  } else {
    std::vector<int> radix;
    for (int t = 0; t < P.size(); ++t) radix.push_back(X.at(P.simplex(t)).A.n);
    bool found = false;
    for_each_tuple(
        radix, guard, "delta1 vanishing", [&](const std::vector<int>& b) {
          if (found) return;
          for (int t = 0; t < T.size(); ++t) {
            const auto [i, j, k] = T.list[static_cast<std::size_t>(t)];
            const Nerve::Simplex tri{i, j, k};
            const FinExtension& E = X.at(tri);
            const int bij = X.rA({i, j}, tri, b[static_cast<std::size_t>(P.at(i, j))]);
            const int bjk = X.rA({j, k}, tri, b[static_cast<std::size_t>(P.at(j, k))]);
            const int bik = X.rA({i, k}, tri, b[static_cast<std::size_t>(P.at(i, k))]);
            const int gij =
                X.rG({i, j}, tri, g.val[static_cast<std::size_t>(P.at(i, j))]);
            const int want =
                E.a_mul(E.a_mul(bij, E.ad_of(gij, bjk)), E.a_inv(bik));
            if (want != R.c[static_cast<std::size_t>(t)]) return;
          }
          found = true;
        });
    R.vanishes = found;
  }

  // oracle: enumerate Z^1(G') and test whether any projects cohomologous to g
  std::set<std::vector<int>> orbit; // all cocycles cohomologous to g
  {
    std::vector<int> radix;
    for (int i = 0; i < N.charts; ++i) radix.push_back(X.at({i}).G.n);
    for_each_tuple(radix, guard, "delta1 orbit",
                   [&](const std::vector<int>& h) {
                     orbit.insert(coboundary_act(SG, P, h, g).val);
                   });
  }
  {
    const GroupSheaf SGp = X.total_sheaf(N);
    std::vector<int> radix;
    for (int t = 0; t < P.size(); ++t) radix.push_back(X.at(P.simplex(t)).Gp.n);
    bool found = false;
    for_each_tuple(radix, guard, "delta1 lift search",
                   [&](const std::vector<int>& x) {
                     if (found) return;
                     Cocycle1 cand{x};
                     if (!validate_z1(N, SGp, P, cand).ok) return;
                     std::vector<int> proj(x.size());
                     for (int t = 0; t < P.size(); ++t)
                       proj[static_cast<std::size_t>(t)] = X.at(P.simplex(t))
                           .p(x[static_cast<std::size_t>(t)]);
                     if (orbit.count(proj)) found = true;
                   });
    R.lift_exists = found;
  }
  return R;
}

// ---------------------------------------------------------------------------
// fibers of H^1(G') -> H^1(G) over [g] versus twisted H^0(G^g)-orbits

struct FiberOrbits {
  bool liftable = false;
  Cocycle1 base_g;  // representative of [g] that actually lifts
  Cocycle1 base_gp; // a chosen lift of base_g to Z^1(G')
  std::vector<ACocycle> h1_reps; // twisted H^1(A^g) classes, canonical, sorted
  std::vector<int> fiber_of;     // class index -> fiber id (image in H^1(G'))
  std::vector<Cocycle1> fiber_images; // canonical H^1(G') rep per fiber id
  std::vector<int> orbit_of;          // class index -> twisted-action orbit id
  bool law_holds = false;             // fiber partition == orbit partition
  std::vector<int> naive_orbit_of;    // orbit ids under the untwisted action
  bool naive_matches = false;         // naive partition == fiber partition
};

// global sections of the twisted inner form: alpha_i g_ij = g_ij alpha_j
inline std::vector<std::vector<int>> twisted_h0(const Nerve& N,
                                                const ExtensionSheaf& X,
                                                const PairIndexer& P,
                                                const Cocycle1& g,
                                                long long guard) {
  std::vector<int> radix;
  for (int i = 0; i < N.charts; ++i) radix.push_back(X.at({i}).G.n);
  std::vector<std::vector<int>> out;
  for_each_tuple(radix, guard, "twisted_h0", [&](const std::vector<int>& al) {
    for (int t = 0; t < P.size(); ++t) {
      auto [i, j] = P.list[static_cast<std::size_t>(t)];
      const Nerve::Simplex pr{i, j};
      const FinGroup& G = X.at(pr).G;
      const int ai = X.rG({i}, pr, al[static_cast<std::size_t>(i)]);
      const int aj = X.rG({j}, pr, al[static_cast<std::size_t>(j)]);
      const int gij = g.val[static_cast<std::size_t>(t)];
      if (G.mul(ai, gij) != G.mul(gij, aj)) return;
    }
    out.push_back(al);
  });
  return out;
}

inline FiberOrbits fiber_orbits(const Nerve& N, const ExtensionSheaf& X,
                                const Cocycle1& g_in, long long guard) {
  const PairIndexer P = PairIndexer::of(N);
  const GroupSheaf SG = X.quot_sheaf(N);
  const GroupSheaf SGp = X.total_sheaf(N);
  {
    const Z1Report rep = validate_z1(N, SG, P, g_in);
    if (!rep.ok)
      throw std::invalid_argument("fiber_orbits: input is not a 1-cocycle");
  }
  FiberOrbits R;

  // find a representative of [g_in] that lifts, together with a lift
  std::set<std::vector<int>> orbit;
  {
    std::vector<int> radix;
    for (int i = 0; i < N.charts; ++i) radix.push_back(X.at({i}).G.n);
    for_each_tuple(radix, guard, "fiber_orbits orbit",
                   [&](const std::vector<int>& h) {
                     orbit.insert(coboundary_act(SG, P, h, g_in).val);
                   });
  }
  {
    std::vector<int> radix;
    for (int t = 0; t < P.size(); ++t) radix.push_back(X.at(P.simplex(t)).Gp.n);
    bool found = false;
    for_each_tuple(radix, guard, "fiber_orbits lift search",
                   [&](const std::vector<int>& x) {
                     if (found) return;
                     Cocycle1 cand{x};
                     if (!validate_z1(N, SGp, P, cand).ok) return;
                     std::vector<int> proj(x.size());
                     for (int t = 0; t < P.size(); ++t)
                       proj[static_cast<std::size_t>(t)] = X.at(P.simplex(t))
                           .p(x[static_cast<std::size_t>(t)]);
                     if (orbit.count(proj)) {
                       found = true;
                       R.base_gp = cand;
                       R.base_g = Cocycle1{proj};
                     }
                   });
    if (!found) return R; // empty fiber; liftable stays false
  }
  R.liftable = true;
  const Cocycle1& g = R.base_g;

  // twisted H^1(A^g): classes by exact canonical form
  std::map<ACocycle, int> class_id;
  for (const ACocycle& a : twisted_z1(N, X, P, g, guard)) {
    const ACocycle can = twisted_canonical(N, X, P, g, a, guard);
    class_id.emplace(can, 0);
  }
  {
    int next = 0;
    for (auto& [rep, id] : class_id) id = next++;
  }
  R.h1_reps.resize(class_id.size());
  for (const auto& [rep, id] : class_id)
    R.h1_reps[static_cast<std::size_t>(id)] = rep;

  // map to H^1(G'): a |-> (a_ij g'_ij), classes by guarded canonicalisation
  std::map<Cocycle1, int> fiber_ids;
  R.fiber_of.resize(class_id.size());
  for (const auto& [a, id] : class_id) {
    Cocycle1 x;
    x.val.resize(static_cast<std::size_t>(P.size()));
    for (int t = 0; t < P.size(); ++t) {
      const FinExtension& E = X.at(P.simplex(t));
      x.val[static_cast<std::size_t>(t)] = E.Gp.mul(
          E.kernel[static_cast<std::size_t>(a.val[static_cast<std::size_t>(t)])],
          R.base_gp.val[static_cast<std::size_t>(t)]);
    }
    if (!validate_z1(N, SGp, P, x).ok)
      throw std::logic_error("fiber_orbits: twisted lift not a cocycle");
    const Cocycle1 can = h1_canonical(N, SGp, P, x, guard);
    auto [it, fresh] =
        fiber_ids.emplace(can, static_cast<int>(fiber_ids.size()));
    R.fiber_of[static_cast<std::size_t>(id)] = it->second;
    if (fresh) R.fiber_images.push_back(can);
  }

  // twisted (and naive) action of H^0(G^g) on the classes
  const auto h0 = twisted_h0(N, X, P, g, guard);
  auto act = [&](const std::vector<int>& al, const ACocycle& a, bool twisted) {
    ACocycle out;
    out.val.resize(static_cast<std::size_t>(P.size()));
    for (int t = 0; t < P.size(); ++t) {
      auto [i, j] = P.list[static_cast<std::size_t>(t)];
      const Nerve::Simplex pr{i, j};
      const FinExtension& E = X.at(pr);
      const int ai = X.rT({i}, pr, X.at({i}).lift(al[static_cast<std::size_t>(i)]));
      const int aj = X.rT({j}, pr, X.at({j}).lift(al[static_cast<std::size_t>(j)]));
      const int gp = R.base_gp.val[static_cast<std::size_t>(t)];
      const int lhs = E.Gp.mul(
          ai,
          E.kernel[static_cast<std::size_t>(a.val[static_cast<std::size_t>(t)])]);
      const int rhs = twisted ? E.Gp.conj(gp, aj) : ai;
      const int prod = E.Gp.mul(lhs, E.Gp.inv(rhs));
      const int k = E.kidx[static_cast<std::size_t>(prod)];
      if (k < 0) throw std::logic_error("fiber_orbits: action left the kernel");
      out.val[static_cast<std::size_t>(t)] = k;
    }
    return out;
  };
  auto orbits_under = [&](bool twisted) {
    std::vector<int> ids(class_id.size(), -1);
    int next = 0;
    for (const auto& [rep, id] : class_id) {
      if (ids[static_cast<std::size_t>(id)] >= 0) continue;
      const int label = next++;
      std::vector<ACocycle> frontier{rep};
      ids[static_cast<std::size_t>(id)] = label;
      while (!frontier.empty()) {
        std::vector<ACocycle> nxt;
        for (const ACocycle& a : frontier)
          for (const auto& al : h0) {
            const ACocycle im = act(al, a, twisted);
            if (!is_twisted_cocycle(N, X, P, g, im))
              throw std::logic_error(
                  "fiber_orbits: action image not a twisted cocycle");
            const ACocycle can = twisted_canonical(N, X, P, g, im, guard);
            const int cid = class_id.at(can);
            if (ids[static_cast<std::size_t>(cid)] < 0) {
              ids[static_cast<std::size_t>(cid)] = label;
              nxt.push_back(can);
            }
          }
        frontier = std::move(nxt);
      }
    }
    return ids;
  };
  R.orbit_of = orbits_under(true);
  R.naive_orbit_of = orbits_under(false);

  auto same_partition = [](const std::vector<int>& x,
                           const std::vector<int>& y) {
    std::map<int, int> xy, yx;
    for (std::size_t t = 0; t < x.size(); ++t) {
      auto [it1, f1] = xy.emplace(x[t], y[t]);
      if (!f1 && it1->second != y[t]) return false;
      auto [it2, f2] = yx.emplace(y[t], x[t]);
      if (!f2 && it2->second != x[t]) return false;
    }
    return true;
  };
  R.law_holds = same_partition(R.fiber_of, R.orbit_of);
  R.naive_matches = same_partition(R.fiber_of, R.naive_orbit_of);
  return R;
}

} // namespace nctk
