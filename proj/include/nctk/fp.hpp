// Prime-field scalar F_p usable inside Eigen dense matrices.
//
// The toolkit's enumerative modes (finite fiber counts, mod-p rank
// certificates) instantiate the same templated linear algebra with this
// scalar that the exact-rational paths use with Rat.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <ostream>
#include <stdexcept>

namespace nctk {

template <unsigned P> struct Fp {
  static_assert(P >= 2, "Fp: modulus must be at least 2");
  uint32_t v = 0;

  Fp() = default;
  Fp(long long x) {
    long long m = x % static_cast<long long>(P);
    if (m < 0) m += P;
    v = static_cast<uint32_t>(m);
  }

  static constexpr unsigned modulus() { return P; }

  friend Fp operator+(Fp a, Fp b) { return Fp(static_cast<long long>(a.v) + b.v); }
  friend Fp operator-(Fp a, Fp b) { return Fp(static_cast<long long>(a.v) + P - b.v); }
  friend Fp operator-(Fp a) { return Fp(static_cast<long long>(P) - a.v); }
  friend Fp operator*(Fp a, Fp b) {
    return Fp(static_cast<long long>((static_cast<uint64_t>(a.v) * b.v) % P));
  }
  Fp& operator+=(Fp o) { return *this = *this + o; }
  Fp& operator-=(Fp o) { return *this = *this - o; }
  Fp& operator*=(Fp o) { return *this = *this * o; }

  Fp pow(uint64_t e) const {
    Fp base = *this, acc = Fp(1);
    while (e) {
      if (e & 1) acc *= base;
      base *= base;
      e >>= 1;
    }
    return acc;
  }

  Fp inv() const {
    if (v == 0) throw std::domain_error("Fp: inverse of zero");
    return pow(P - 2); // P is required to be prime by the call sites.
  }

  friend Fp operator/(Fp a, Fp b) { return a * b.inv(); }
  Fp& operator/=(Fp o) { return *this = *this / o; }

  friend bool operator==(Fp a, Fp b) { return a.v == b.v; }
  friend bool operator!=(Fp a, Fp b) { return a.v != b.v; }
  friend std::ostream& operator<<(std::ostream& os, Fp a) { return os << a.v; }
};

template <unsigned P>
using MatFp = Eigen::Matrix<Fp<P>, Eigen::Dynamic, Eigen::Dynamic>;
template <unsigned P> using VecFp = Eigen::Matrix<Fp<P>, Eigen::Dynamic, 1>;

template <unsigned P> inline bool is_zero(Fp<P> a) { return a.v == 0; }

} // namespace nctk

namespace Eigen {

template <unsigned P>
struct NumTraits<nctk::Fp<P>> : GenericNumTraits<nctk::Fp<P>> {
  typedef nctk::Fp<P> Real;
  typedef nctk::Fp<P> NonInteger;
  typedef nctk::Fp<P> Nested;
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0, // field semantics: division is exact
    IsSigned = 0,
    IsComplex = 0,
    RequireInitialization = 0,
    ReadCost = 1,
    AddCost = 2,
    MulCost = 3
  };
};

} // namespace Eigen
