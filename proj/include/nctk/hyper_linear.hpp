#pragma once
// Linear backend for the twisted two-term complex: when A0 and A1 are finite
// dimensional vector spaces (modules over an exact field scalar) and the
// twisting data Ad(g_ij), g_ij-action and d_e are linear maps, the cochain
// spaces assemble into one block matrix per degree and cohomology is exact
// rank arithmetic.  Block layout, with the leading-vertex convention for the
// d_e and Ad twists on every simplex:
//
//   C^0 = (+) charts  A0(i)
//   C^1 = (+) pairs   A0(ij)   (+) charts  A1(i)
//   C^2 = (+) triples A0(ijk)  (+) pairs   A1(ij)
//   C^3 = (+) quads   A0(ijkl) (+) triples A1(ijk)
#include <Eigen/Core>

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "nctk/linalg.hpp"
#include "nctk/nerve.hpp"

namespace nctk {

template <typename S> struct LinearTwistedComplex {
  using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

  Nerve N;
  std::map<Nerve::Simplex, int> dim0, dim1;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, Mat> res0, res1;
  std::map<Nerve::Simplex, Mat> ad0;  // |s| >= 2: Ad(g_{s0,s1}) on A0(s)
  std::map<Nerve::Simplex, Mat> act1; // |s| >= 2: g_{s0,s1} acting on A1(s)
  std::map<Nerve::Simplex, Mat> dmat; // d_{e_{s0}} : A0(s) -> A1(s)

  int d0(const Nerve::Simplex& s) const { return dim0.at(s); }
  int d1(const Nerve::Simplex& s) const { return dim1.at(s); }
  Mat r0(const Nerve::Simplex& f, const Nerve::Simplex& t) const {
    if (f == t) return Mat::Identity(d0(f), d0(f));
    return res0.at({f, t});
  }
  Mat r1(const Nerve::Simplex& f, const Nerve::Simplex& t) const {
    if (f == t) return Mat::Identity(d1(f), d1(f));
    return res1.at({f, t});
  }

  // degree -> (offsets of the A0 blocks, offsets of the A1 blocks, total)
  struct Layout {
    std::vector<Nerve::Simplex> s0, s1;
    std::vector<int> off0, off1;
    int total = 0;
  };
  Layout layout(int degree) const {
    Layout L;
    L.s0 = simplices_of_size(degree + 1);
    L.s1 = degree >= 1 ? simplices_of_size(degree) : std::vector<Nerve::Simplex>{};
    for (const auto& s : L.s0) {
      L.off0.push_back(L.total);
      L.total += d0(s);
    }
    for (const auto& s : L.s1) {
      L.off1.push_back(L.total);
      L.total += d1(s);
    }
    return L;
  }
  std::vector<Nerve::Simplex> simplices_of_size(int k) const {
    std::vector<Nerve::Simplex> out;
    for (const auto& s : N.simplices)
      if (static_cast<int>(s.size()) == k) out.push_back(s);
    std::sort(out.begin(), out.end());
    return out;
  }

  Mat D0() const {
    const Layout c0 = layout(0), c1 = layout(1);
    Mat D = Mat::Zero(c1.total, c0.total);
    auto chart_pos = [&](int i) {
      return c0.off0[static_cast<std::size_t>(i)];
    };
    for (std::size_t t = 0; t < c1.s0.size(); ++t) {
      const auto& pr = c1.s0[t];
      const int i = pr[0], j = pr[1], row = c1.off0[t];
      D.block(row, chart_pos(i), d0(pr), d0({i})) += r0({i}, pr);
      D.block(row, chart_pos(j), d0(pr), d0({j})) -=
          ad0.at(pr) * r0({j}, pr);
    }
    for (std::size_t t = 0; t < c1.s1.size(); ++t) {
      const auto& ch = c1.s1[t];
      D.block(c1.off1[t], chart_pos(ch[0]), d1(ch), d0(ch)) += dmat.at(ch);
    }
    return D;
  }

  Mat D1() const {
    const Layout c1 = layout(1), c2 = layout(2);
    auto pair_pos = [&](int i, int j) {
      const Nerve::Simplex pr{i, j};
      for (std::size_t t = 0; t < c1.s0.size(); ++t)
        if (c1.s0[t] == pr) return c1.off0[t];
      throw std::invalid_argument("linear complex: pair not in nerve");
    };
    auto chart_pos = [&](int i) {
      return c1.off1[static_cast<std::size_t>(i)];
    };
    Mat D = Mat::Zero(c2.total, c1.total);
    for (std::size_t t = 0; t < c2.s0.size(); ++t) {
      const auto& s = c2.s0[t];
      const int i = s[0], j = s[1], k = s[2], row = c2.off0[t];
      D.block(row, pair_pos(i, j), d0(s), d0({i, j})) += r0({i, j}, s);
      D.block(row, pair_pos(j, k), d0(s), d0({j, k})) +=
          ad0.at(s) * r0({j, k}, s);
      D.block(row, pair_pos(i, k), d0(s), d0({i, k})) -= r0({i, k}, s);
    }
    for (std::size_t t = 0; t < c2.s1.size(); ++t) {
      const auto& pr = c2.s1[t];
      const int i = pr[0], j = pr[1], row = c2.off1[t];
      D.block(row, pair_pos(i, j), d1(pr), d0(pr)) += dmat.at(pr);
      D.block(row, chart_pos(i), d1(pr), d1({i})) -= r1({i}, pr);
      D.block(row, chart_pos(j), d1(pr), d1({j})) +=
          act1.at(pr) * r1({j}, pr);
    }
    return D;
  }

  Mat D2() const {
    const Layout c2 = layout(2), c3 = layout(3);
    auto triple_pos = [&](int i, int j, int k) {
      const Nerve::Simplex s{i, j, k};
      for (std::size_t t = 0; t < c2.s0.size(); ++t)
        if (c2.s0[t] == s) return c2.off0[t];
      throw std::invalid_argument("linear complex: triple not in nerve");
    };
    auto pair_pos = [&](int i, int j) {
      const Nerve::Simplex pr{i, j};
      for (std::size_t t = 0; t < c2.s1.size(); ++t)
        if (c2.s1[t] == pr) return c2.off1[t];
      throw std::invalid_argument("linear complex: pair not in nerve");
    };
    Mat D = Mat::Zero(c3.total, c2.total);
    for (std::size_t t = 0; t < c3.s0.size(); ++t) {
      const auto& q = c3.s0[t];
      const int i = q[0], j = q[1], k = q[2], l = q[3], row = c3.off0[t];
      D.block(row, triple_pos(i, j, k), d0(q), d0({i, j, k})) +=
          r0({i, j, k}, q);
      D.block(row, triple_pos(i, j, l), d0(q), d0({i, j, l})) -=
          r0({i, j, l}, q);
      D.block(row, triple_pos(i, k, l), d0(q), d0({i, k, l})) +=
          r0({i, k, l}, q);
      D.block(row, triple_pos(j, k, l), d0(q), d0({j, k, l})) -=
          ad0.at(q) * r0({j, k, l}, q);
    }
    for (std::size_t t = 0; t < c3.s1.size(); ++t) {
      const auto& s = c3.s1[t];
      const int i = s[0], j = s[1], k = s[2], row = c3.off1[t];
      D.block(row, triple_pos(i, j, k), d1(s), d0(s)) += dmat.at(s);
      D.block(row, pair_pos(i, k), d1(s), d1({i, k})) += r1({i, k}, s);
      D.block(row, pair_pos(i, j), d1(s), d1({i, j})) -= r1({i, j}, s);
      D.block(row, pair_pos(j, k), d1(s), d1({j, k})) -=
          act1.at(s) * r1({j, k}, s);
    }
    return D;
  }

  static bool all_zero(const Mat& m) {
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c)
        if (!(m(r, c) == S(0))) return false;
    return true;
  }

  void validate() const {
    for (const auto& s : N.simplices) {
      if (dim0.at(s) < 0 || dim1.at(s) < 0)
        throw std::invalid_argument("linear complex: negative dimension");
      const Mat& d = dmat.at(s);
      if (d.rows() != d1(s) || d.cols() != d0(s))
        throw std::invalid_argument("linear complex: d has wrong shape");
      if (s.size() >= 2) {
        const Mat& a = ad0.at(s);
        const Mat& m = act1.at(s);
        if (a.rows() != d0(s) || a.cols() != d0(s) || m.rows() != d1(s) ||
            m.cols() != d1(s))
          throw std::invalid_argument("linear complex: twist has wrong shape");
      }
      for (const auto& t : N.simplices) {
        if (t == s || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
          continue;
        const Mat R0 = r0(s, t), R1 = r1(s, t);
        if (R0.rows() != d0(t) || R0.cols() != d0(s) || R1.rows() != d1(t) ||
            R1.cols() != d1(s))
          throw std::invalid_argument(
              "linear complex: restriction has wrong shape");
        if (t[0] == s[0] && !all_zero(dmat.at(t) * R0 - R1 * dmat.at(s)))
          throw std::invalid_argument(
              "linear complex: d does not commute with restriction");
        for (const auto& v : N.simplices) {
          if (v == t || !std::includes(v.begin(), v.end(), t.begin(), t.end()))
            continue;
          if (!all_zero(r0(t, v) * R0 - r0(s, v)) ||
              !all_zero(r1(t, v) * R1 - r1(s, v)))
            throw std::invalid_argument(
                "linear complex: restrictions not functorial");
        }
      }
    }
    for (const auto& pr : N.pairs()) {
      const int j = pr[1];
      if (!all_zero(dmat.at(pr) * ad0.at(pr) * r0({j}, pr) -
                    act1.at(pr) * r1({j}, pr) * dmat.at({j})))
        throw std::invalid_argument(
            "linear complex: d not equivariant for the twist");
    }
    if (!all_zero(D1() * D0()))
      throw std::invalid_argument("linear complex: D1 * D0 != 0");
    if (!all_zero(D2() * D1()))
      throw std::invalid_argument("linear complex: D2 * D1 != 0");
  }

  struct Cohomology {
    int dim = 0;
    Mat reps; // columns are cocycle representatives of a basis of H^n
  };

  Cohomology h(int degree) const {
    Cohomology out;
    Mat cycles, boundaries_from;
    if (degree == 0) {
      cycles = kernel_basis(D0());
      out.dim = static_cast<int>(cycles.cols());
      out.reps = cycles;
      return out;
    }
    if (degree == 1) {
      cycles = kernel_basis(D1());
      boundaries_from = D0();
    } else if (degree == 2) {
      cycles = kernel_basis(D2());
      boundaries_from = D1();
    } else {
      throw std::invalid_argument("linear complex: degree must be 0, 1 or 2");
    }
    Subspace<S> span(static_cast<int>(cycles.rows()));
    span.insert_all(boundaries_from);
    std::vector<int> keep;
    for (int c = 0; c < cycles.cols(); ++c)
      if (span.insert(cycles.col(c))) keep.push_back(c);
    out.dim = static_cast<int>(keep.size());
    out.reps = Mat(cycles.rows(), out.dim);
    for (int c = 0; c < out.dim; ++c)
      out.reps.col(c) = cycles.col(keep[static_cast<std::size_t>(c)]);
    return out;
  }

  // untwisted constant coefficients: one d everywhere, identity twists
  static LinearTwistedComplex constant(const Nerve& N, const Mat& d) {
    LinearTwistedComplex L;
    L.N = N;
    const int n0 = static_cast<int>(d.cols());
    const int n1 = static_cast<int>(d.rows());
    for (const auto& s : N.simplices) {
      L.dim0[s] = n0;
      L.dim1[s] = n1;
      L.dmat[s] = d;
      if (s.size() >= 2) {
        L.ad0[s] = Mat::Identity(n0, n0);
        L.act1[s] = Mat::Identity(n1, n1);
      }
      for (const auto& t : N.simplices)
        if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
          L.res0[{s, t}] = Mat::Identity(n0, n0);
          L.res1[{s, t}] = Mat::Identity(n1, n1);
        }
    }
    return L;
  }
};

} // namespace nctk
