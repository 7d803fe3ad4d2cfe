// Finite-dimensional algebra layer: presentations, structure, centers,
// NC-nilpotency degrees, homomorphisms, fiber products.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <string>
#include <vector>

#include "nctk/findim.hpp"
#include "nctk/fp.hpp"

using namespace nctk;

namespace {

// 2x2 matrix algebra over the rationals, basis E00, E01, E10, E11.
FinAlg mat2() {
  using Vec = FinAlg::Vec;
  auto unit_pair = [](int i, int j) { return i * 2 + j; };
  std::vector<std::vector<Vec>> table(4, std::vector<Vec>(4, Vec::Zero(4)));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) {
          Vec v = Vec::Zero(4);
          if (j == k) v(unit_pair(i, l)) = Rat(1);
          table[unit_pair(i, j)][unit_pair(k, l)] = v;
        }
  Vec unit = Vec::Zero(4);
  unit(unit_pair(0, 0)) = Rat(1);
  unit(unit_pair(1, 1)) = Rat(1);
  return FinAlg::from_table({"E00", "E01", "E10", "E11"}, table, unit,
                            {1, 2}); // generated by E01, E10
}

// dual numbers Q[e]/(e^2)
FinAlg dual_numbers() {
  return FinAlg::from_presentation(
      1, 1, {nc_mul(NcPoly::generator(0), NcPoly::generator(0))}, false);
}

} // namespace

TEST_CASE("presentations: stabilization, inconsistency, small quotients") {
  const NcPoly x = NcPoly::generator(0);
  CHECK(dual_numbers().dim() == 2);

  // no nilpotency relation: refuse
  CHECK_THROWS_WITH_AS(FinAlg::from_presentation(1, 3, {}, false),
                       doctest::Contains("non-nilpotent"), std::runtime_error);

  // constant relation: inconsistent
  CHECK_THROWS_WITH_AS(
      FinAlg::from_presentation(1, 2, {NcPoly::monomial(Word{}, Rat(2))}, false),
      doctest::Contains("1 = 0"), std::invalid_argument);

  // non-homogeneous relation: rejected by design
  CHECK_THROWS_AS(FinAlg::from_presentation(1, 2, {x - nc_mul(x, x)}, false),
                  std::invalid_argument);
}

TEST_CASE("the seven-dimensional test algebra") {
  // free on x, y modulo (I_3 + m^3): I_3 has nothing below degree 3, so the
  // quotient is free/m^3 with basis 1, x, y, x^2, xy, yx, y^2.
  const FinAlg L1 = FinAlg::filtration_quotient(3, 2, 2);
  CHECK(L1.dim() == 7);
  CHECK(L1.graded_local());
  CHECK(L1.nc_degree() == 1); // central extension of a commutative algebra

  // Same algebra from an explicit presentation: m^3 spanned by all degree-3
  // words (I_3's degree <= 3 part is already inside that span).
  std::vector<NcPoly> rels;
  for (const Word& w : words_of_degree(3, 2))
    rels.push_back(NcPoly::monomial(w, Rat(1)));
  const FinAlg L1p = FinAlg::from_presentation(2, 2, rels, false);
  CHECK(L1p.dim() == 7);

  // center: Q·1 + m^2 (m^3 = 0 makes every quadratic central)
  const auto z = L1.center_basis();
  CHECK(z.size() == 5);

  // units: graded-local criterion
  const auto one = L1.one();
  const auto x = L1.gen(0);
  CHECK(!L1.is_unit(x));
  auto inv = L1.inverse(one + x);
  REQUIRE(inv.has_value());
  CHECK(L1.mul(*inv, one + x) == one);
  CHECK(L1.lift(*inv).print({"x", "y"}) == "1 + -1*x + 1*x*x");

  // abelianization kernel: commutators only, dimension 1 here
  CHECK(L1.abelianization_kernel_basis().size() == 1);
}

TEST_CASE("degree-3 truncation separates the filtration") {
  // free/(I_3 + m^4): [x,y] survives and is central, dimension 13.
  const FinAlg T = FinAlg::filtration_quotient(3, 3, 2);
  CHECK(T.dim() == 13);
  CHECK(T.nc_degree() == 1);
  const auto c = T.bracket(T.gen(0), T.gen(1));
  CHECK(c != T.zero());
  for (int g = 0; g < 2; ++g) CHECK(T.bracket(c, T.gen(g)) == T.zero());
  // center: 1, [x,y], and the six surviving cubics
  CHECK(T.center_basis().size() == 8);

  // free/m^4 without the I_3 quotient has NC-degree 3
  const FinAlg F = FinAlg::truncated_free(2, 3);
  CHECK(F.dim() == 15);
  CHECK(F.nc_degree() == 2);
  CHECK(F.filtration_image(3).dim() == 2);
  CHECK(F.filtration_image(4).dim() == 0);
}

TEST_CASE("matrix algebra: center, units, non-nilpotency") {
  const FinAlg M = mat2();
  CHECK(M.dim() == 4);
  // center = scalars
  const auto z = M.center_basis();
  REQUIRE(z.size() == 1);
  CHECK(M.mul(z[0], M.one()) == z[0]);
  // not NC-nilpotent: the commutator ideal is everything
  CHECK(!M.nc_degree().has_value());
  CHECK(M.filtration_image(2).dim() == 4);
  CHECK(M.filtration_image(5).dim() == 4);
  // units: E01 + E10 is an involution, E00 is a proper idempotent
  FinAlg::Vec s = M.zero();
  s(1) = Rat(1);
  s(2) = Rat(1);
  auto inv = M.inverse(s);
  REQUIRE(inv.has_value());
  CHECK(*inv == s);
  FinAlg::Vec e00 = M.zero();
  e00(0) = Rat(1);
  CHECK(!M.is_unit(e00));
}

TEST_CASE("table-backed filtration recursion agrees with the graded one") {
  // Convert word-backed quotients to bare structure constants and re-run the
  // NC-degree computation through the table path.
  for (auto make : {+[]() { return FinAlg::filtration_quotient(3, 2, 2); },
                    +[]() { return FinAlg::filtration_quotient(3, 3, 2); },
                    +[]() { return FinAlg::truncated_free(2, 3); },
                    +[]() { return FinAlg::filtration_quotient(4, 4, 2); }}) {
    const FinAlg W = make();
    const int D = W.dim();
    std::vector<std::vector<FinAlg::Vec>> table(D, std::vector<FinAlg::Vec>(D));
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) table[i][j] = W.structure_constant(i, j);
    std::vector<std::string> names;
    for (int i = 0; i < D; ++i) names.push_back(W.basis_name(i));
    const FinAlg T = FinAlg::from_table(names, table, W.one());
    CHECK(T.nc_degree() == W.nc_degree());
    for (int n = 2; n <= 5; ++n)
      CHECK(T.filtration_image(n).dim() == W.filtration_image(n).dim());
  }
}

TEST_CASE("homomorphisms on generators") {
  const FinAlg L1 = FinAlg::filtration_quotient(3, 2, 2);
  const FinAlg T = FinAlg::filtration_quotient(3, 3, 2);

  // identity
  auto id = hom_on_generators(L1, L1, {L1.gen(0), L1.gen(1)});
  REQUIRE(id.has_value());
  CHECK(id->is_algebra_hom());
  CHECK(id->is_surjective());

  // swap automorphism
  auto sw = hom_on_generators(L1, L1, {L1.gen(1), L1.gen(0)});
  REQUIRE(sw.has_value());
  CHECK(sw->is_algebra_hom());

  // unipotent substitution x -> x + x^2
  auto up = hom_on_generators(
      L1, L1, {L1.gen(0) + L1.mul(L1.gen(0), L1.gen(0)), L1.gen(1)});
  REQUIRE(up.has_value());
  CHECK(up->is_surjective());

  // no hom L1 -> T sending generators to generators: m^3 would not die
  CHECK(!hom_on_generators(L1, T, {T.gen(0), T.gen(1)}).has_value());

  // projection T -> L1 is fine
  auto pr = hom_on_generators(T, L1, {L1.gen(0), L1.gen(1)});
  REQUIRE(pr.has_value());
  CHECK(pr->is_algebra_hom());
  CHECK(pr->is_surjective());
  CHECK(is_central_extension(*pr)); // kernel m^3 + ([x,y]) is central, squares to 0
}

TEST_CASE("fiber products") {
  const FinAlg D = dual_numbers();
  // Q[e] x_Q Q[e]: project both to scalars
  const FinAlg scalars = FinAlg::truncated_free(1, 0);
  auto pa = hom_on_generators(D, scalars, {scalars.zero()});
  REQUIRE(pa.has_value());
  auto F = fiber_product(*pa, *pa);
  CHECK(F.algebra.dim() == 3);
  CHECK(F.algebra.nc_degree() == 0); // commutative

  // fiber with the identity leg: isomorphic to the source
  const FinAlg L1 = FinAlg::filtration_quotient(3, 2, 2);
  const FinAlg T = FinAlg::filtration_quotient(3, 3, 2);
  auto pr = hom_on_generators(T, L1, {L1.gen(0), L1.gen(1)});
  auto idL = hom_on_generators(L1, L1, {L1.gen(0), L1.gen(1)});
  REQUIRE(pr.has_value());
  REQUIRE(idL.has_value());
  auto G = fiber_product(*pr, *idL);
  CHECK(G.algebra.dim() == T.dim());

  // non-surjective leg refused
  auto emb = hom_on_generators(
      L1, L1, {L1.mul(L1.gen(0), L1.gen(0)), L1.mul(L1.gen(0), L1.gen(1))});
  REQUIRE(emb.has_value()); // images in m^2, all relations die
  CHECK_THROWS_WITH_AS(fiber_product(*pr, *emb),
                       doctest::Contains("non-surjective"),
                       std::invalid_argument);
}

TEST_CASE("rearrangement isomorphism for central extensions") {
  const FinAlg L1 = FinAlg::filtration_quotient(3, 2, 2);
  const FinAlg T = FinAlg::filtration_quotient(3, 3, 2);
  auto pr = hom_on_generators(T, L1, {L1.gen(0), L1.gen(1)});
  REQUIRE(pr.has_value());
  CHECK(central_rearrangement_check(*pr));

  // the free/m^3 -> free/m^2 step of the m-adic tower is also central
  const FinAlg F2 = FinAlg::truncated_free(2, 2);
  const FinAlg F1 = FinAlg::truncated_free(2, 1);
  auto step = hom_on_generators(F2, F1, {F1.gen(0), F1.gen(1)});
  REQUIRE(step.has_value());
  CHECK(central_rearrangement_check(*step));
}

TEST_CASE("prime-field instantiation") {
  using A3 = FinAlgT<Fp<3>>;
  const A3 L = A3::filtration_quotient(3, 2, 2);
  CHECK(L.dim() == 7);
  CHECK(L.nc_degree() == 1);
  CHECK(L.center_basis().size() == 5);
  // enumerate units: eps != 0, i.e. 2 * 3^6 of the 3^7 elements
  const auto one = L.one();
  auto inv = L.inverse(one + L.gen(0));
  REQUIRE(inv.has_value());
  CHECK(L.mul(*inv, one + L.gen(0)) == one);
}
