// Exact rational scalar for the toolkit: GMP's mpq_class adapted to Eigen.
//
// All ranks, kernels and solves in this project run over exact fields, so
// Eigen is used only through its dense containers and expression arithmetic;
// pivoting is first-nonzero (see linalg.hpp), never magnitude-based, and no
// Eigen decomposition is ever instantiated on these scalars.
#pragma once

#include <Eigen/Core>
#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace Eigen {

template <> struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  typedef mpq_class Real;
  typedef mpq_class NonInteger;
  typedef mpq_class Nested;
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};

} // namespace Eigen

namespace nctk {

using Rat = mpq_class;
using Int = mpz_class;

using MatQ = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;
using VecQ = Eigen::Matrix<Rat, Eigen::Dynamic, 1>;

inline Rat rat_of(long num, long den = 1) {
  if (den == 0) throw std::invalid_argument("rat_of: zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

// Parse the wire format "num/den" (or "num"); used by the JSON layer.
inline std::optional<Rat> rat_parse(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) {
      Rat r(Int(s), 1);
      r.canonicalize();
      return r;
    }
    const std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    if (num.empty() || den.empty()) return std::nullopt;
    Int d(den);
    if (d == 0) return std::nullopt;
    Rat r(Int(num), d);
    r.canonicalize();
    return r;
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

// Canonical wire format: integers print bare, other values as "num/den".
inline std::string rat_print(const Rat& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

inline bool is_zero(const Rat& r) { return sgn(r) == 0; }

} // namespace nctk
