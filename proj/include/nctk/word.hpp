// Words in a free monoid on numbered generators, with the degree-lex order
// used for all deterministic iteration and printing.
#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

namespace nctk {

using Word = std::vector<uint8_t>; // generator indices, 0-based

struct DegLexLess {
  bool operator()(const Word& a, const Word& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

inline Word word_concat(const Word& a, const Word& b) {
  Word w = a;
  w.insert(w.end(), b.begin(), b.end());
  return w;
}

inline std::string word_print(const Word& w, const std::vector<std::string>& names) {
  if (w.empty()) return "1";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += "*";
    s += names.at(w[i]);
  }
  return s;
}

// All words of the given degree over k generators, in lex order; the order
// doubles as the coordinate indexing of the degree-m homogeneous component.
inline std::vector<Word> words_of_degree(int degree, int k) {
  std::vector<Word> out;
  if (degree == 0) {
    out.push_back({});
    return out;
  }
  Word w(degree, 0);
  while (true) {
    out.push_back(w);
    int i = degree - 1;
    while (i >= 0 && w[i] == k - 1) {
      w[i] = 0;
      --i;
    }
    if (i < 0) break;
    ++w[i];
  }
  return out;
}

// Index of a degree-m word in words_of_degree(m, k): base-k number.
inline long word_index(const Word& w, int k) {
  long idx = 0;
  for (uint8_t g : w) idx = idx * k + g;
  return idx;
}

inline long words_count(int degree, int k) {
  long n = 1;
  for (int i = 0; i < degree; ++i) n *= k;
  return n;
}

} // namespace nctk
