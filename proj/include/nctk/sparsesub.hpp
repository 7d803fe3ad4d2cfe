// Sparse exact subspace with incremental echelon insertion, over any field
// scalar (Rat for characteristic zero, Fp<P> for the enumerative modes).
//
// The filtration cells live in word spaces of dimension k^m (up to 729 in
// the shipped test ranges); their spanning sets are large but each spanning
// vector is short, so an incremental sparse echelon beats dense RREF by a
// wide margin. Pivots are the least support index; rows are kept lead-1.
#pragma once

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "nctk/rat.hpp"

namespace nctk {

template <class S>
using SparseRowT = std::vector<std::pair<int, S>>; // sorted by index

template <class S>
inline void sparse_axpy(SparseRowT<S>& v, const S& f, const SparseRowT<S>& p) {
  // v += f * p, merging sorted supports.
  SparseRowT<S> out;
  out.reserve(v.size() + p.size());
  std::size_t i = 0, j = 0;
  while (i < v.size() && j < p.size()) {
    if (v[i].first < p[j].first) {
      out.push_back(std::move(v[i++]));
    } else if (v[i].first > p[j].first) {
      out.emplace_back(p[j].first, f * p[j].second);
      ++j;
    } else {
      S c = v[i].second + f * p[j].second;
      if (!is_zero(c)) out.emplace_back(v[i].first, std::move(c));
      ++i;
      ++j;
    }
  }
  while (i < v.size()) out.push_back(std::move(v[i++]));
  for (; j < p.size(); ++j) out.emplace_back(p[j].first, f * p[j].second);
  v = std::move(out);
}

template <class S>
class SparseSubspaceT {
public:
  explicit SparseSubspaceT(long ambient = 0) : ambient_(ambient) {}

  long ambient_dim() const { return ambient_; }
  int dim() const { return static_cast<int>(rows_.size()); }
  const std::vector<SparseRowT<S>>& rows() const { return rows_; }

  // Reduce v against the stored rows (result has no stored pivot in support).
  SparseRowT<S> reduce(SparseRowT<S> v) const {
    std::size_t at = 0;
    while (at < v.size()) {
      auto it = pivot_row_.find(v[at].first);
      if (it == pivot_row_.end()) {
        ++at; // not a pivot: later pivots can still occur further right
        continue;
      }
      S f = -v[at].second;
      sparse_axpy(v, f, rows_[it->second]);
      // v[at] was cancelled; indices before `at` are untouched non-pivots.
    }
    return v;
  }

  bool contains(const SparseRowT<S>& v) const { return reduce(v).empty(); }

  // Insert a vector; true if the dimension grew.
  bool insert(SparseRowT<S> v) {
    v = reduce(std::move(v));
    if (v.empty()) return false;
    const S lead = v.front().second;
    if (!(lead == S(1))) {
      for (auto& [i, c] : v) c /= lead;
    }
    pivot_row_.emplace(v.front().first, static_cast<int>(rows_.size()));
    rows_.push_back(std::move(v));
    return true;
  }

  bool has_pivot(int col) const { return pivot_row_.count(col) != 0; }

  // Canonicalize to full RREF (each pivot appears in exactly one row),
  // rows sorted by pivot. Call once after all insertions are done.
  void canonicalize() {
    std::vector<int> order;
    order.reserve(rows_.size());
    for (const auto& [piv, r] : pivot_row_) order.push_back(r);
    std::vector<SparseRowT<S>> sorted;
    sorted.reserve(rows_.size());
    for (int r : order) sorted.push_back(std::move(rows_[r]));
    rows_ = std::move(sorted);
    pivot_row_.clear();
    for (std::size_t r = 0; r < rows_.size(); ++r)
      pivot_row_.emplace(rows_[r].front().first, static_cast<int>(r));
    // Back-substitute, last pivot first.
    for (int r = static_cast<int>(rows_.size()) - 1; r >= 0; --r) {
      const int piv = rows_[r].front().first;
      for (int s = 0; s < r; ++s) {
        auto& row = rows_[s];
        auto it = std::lower_bound(
            row.begin(), row.end(), piv,
            [](const std::pair<int, S>& a, int b) { return a.first < b; });
        if (it != row.end() && it->first == piv) {
          S f = -it->second;
          sparse_axpy(row, f, rows_[r]);
        }
      }
    }
  }

private:
  long ambient_ = 0;
  std::map<int, int> pivot_row_;
  std::vector<SparseRowT<S>> rows_;
};

using SparseRow = SparseRowT<Rat>;
using SparseSubspace = SparseSubspaceT<Rat>;

} // namespace nctk
