// Finite nerves of open covers: charts, overlaps, triples, quadruples.
// Purely combinatorial — simplices are sorted vertex lists closed under
// faces, plus the flags standing in for geometric hypotheses (full simplex
// and connected intersections model an irreducible base).
#pragma once

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nctk {

struct Nerve {
  using Simplex = std::vector<int>; // sorted, distinct vertices

  int charts = 0;
  std::set<Simplex> simplices; // nonempty intersections, face-closed
  bool full_simplex = false;   // every subset of charts intersects
  bool connected_intersections = true;

  bool has(const Simplex& s) const { return simplices.count(s) != 0; }

  std::vector<Simplex> of_size(int k) const {
    std::vector<Simplex> out;
    for (const auto& s : simplices)
      if (static_cast<int>(s.size()) == k) out.push_back(s);
    return out;
  }
  std::vector<Simplex> pairs() const { return of_size(2); }
  std::vector<Simplex> triples() const { return of_size(3); }
  std::vector<Simplex> quads() const { return of_size(4); }

  // face-closure sanity: every nonempty subset of a simplex is present
  void validate() const {
    for (const auto& s : simplices) {
      if (s.empty()) throw std::invalid_argument("nerve: empty simplex");
      if (!std::is_sorted(s.begin(), s.end()) ||
          std::adjacent_find(s.begin(), s.end()) != s.end())
        throw std::invalid_argument("nerve: simplex not sorted/distinct");
      for (int v : s)
        if (v < 0 || v >= charts)
          throw std::invalid_argument("nerve: vertex out of range");
      for (std::size_t drop = 0; drop < s.size(); ++drop) {
        if (s.size() == 1) break;
        Simplex face;
        for (std::size_t t = 0; t < s.size(); ++t)
          if (t != drop) face.push_back(s[t]);
        if (!has(face))
          throw std::invalid_argument("nerve: not closed under faces");
      }
    }
    for (int i = 0; i < charts; ++i)
      if (!has({i})) throw std::invalid_argument("nerve: missing chart");
  }

  // all subsets of {0..n-1} of size <= 4 (higher intersections are never
  // consulted by the degree <= 2 cohomology this toolkit computes)
  static Nerve full(int n) {
    if (n < 1) throw std::invalid_argument("nerve: need >= 1 chart");
    Nerve N;
    N.charts = n;
    N.full_simplex = true;
    for (int mask = 1; mask < (1 << n); ++mask) {
      if (__builtin_popcount(static_cast<unsigned>(mask)) > 4) continue;
      Simplex s;
      for (int v = 0; v < n; ++v)
        if (mask & (1 << v)) s.push_back(v);
      N.simplices.insert(std::move(s));
    }
    N.validate();
    return N;
  }

  // n arcs covering a circle: consecutive overlaps only, no triples (n >= 4);
  // for n = 3 the three pairwise overlaps exist but the triple is empty
  static Nerve circle(int n) {
    if (n < 3) throw std::invalid_argument("nerve: circle needs >= 3 arcs");
    Nerve N;
    N.charts = n;
    N.full_simplex = false;
    for (int i = 0; i < n; ++i) N.simplices.insert({i});
    for (int i = 0; i < n; ++i) {
      int j = (i + 1) % n;
      Simplex e{std::min(i, j), std::max(i, j)};
      N.simplices.insert(std::move(e));
    }
    if (n == 3) N.simplices.insert({0, 2}); // already present; keep explicit
    N.validate();
    return N;
  }

  // arbitrary nerve from maximal simplices (face closure taken here)
  static Nerve from_maximal(int n, const std::vector<Simplex>& maximal,
                            bool full = false) {
    Nerve N;
    N.charts = n;
    N.full_simplex = full;
    for (int i = 0; i < n; ++i) N.simplices.insert({i});
    for (auto s : maximal) {
      std::sort(s.begin(), s.end());
      const int m = static_cast<int>(s.size());
      for (int mask = 1; mask < (1 << m); ++mask) {
        Simplex face;
        for (int t = 0; t < m; ++t)
          if (mask & (1 << t)) face.push_back(s[static_cast<std::size_t>(t)]);
        N.simplices.insert(std::move(face));
      }
    }
    N.validate();
    return N;
  }
};

} // namespace nctk
