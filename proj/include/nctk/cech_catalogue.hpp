// Catalogue of extension-sheaf instances for the exhaustive connecting-map
// studies: constant extensions over small nerves, monodromy-twisted circles,
// chartwise inner twists, and heterogeneous (rank-jumping) sheaves whose
// delta1 genuinely obstructs.  Shared by the unit tests, the acceptance
// suite, and the CLI self-test.
#pragma once

#include <string>
#include <vector>

#include "nctk/cech.hpp"

namespace nctk {

// ---- base extensions -------------------------------------------------------

// identity extension: A trivial, G' = G
inline FinExtension ext_identity(const FinGroup& G) {
  std::vector<int> proj(static_cast<std::size_t>(G.n));
  for (int x = 0; x < G.n; ++x) proj[static_cast<std::size_t>(x)] = x;
  return FinExtension::make(G, G, std::move(proj));
}

// sign map S3 -> Z/2 with kernel A3 (nontrivial conjugation action)
inline FinExtension ext_sign_s3() {
  const FinGroup S3 = FinGroup::symmetric(3);
  // permutations ranked lexicographically: 012,021,102,120,201,210
  std::vector<int> proj{0, 1, 1, 0, 0, 1};
  return FinExtension::make(S3, FinGroup::cyclic(2), std::move(proj));
}

// D4 -> Z/2 (rotation part dies), kernel Z/4 inverted by the flips
inline FinExtension ext_d4_over_z2() {
  const FinGroup D4 = FinGroup::dihedral(4);
  std::vector<int> proj(8);
  for (int x = 0; x < 8; ++x) proj[static_cast<std::size_t>(x)] = x / 4;
  return FinExtension::make(D4, FinGroup::cyclic(2), std::move(proj));
}

// Q8 -> V4 with central kernel {±1}
inline FinExtension ext_q8_over_v4() {
  const FinGroup Q8 = FinGroup::quaternion8();
  const FinGroup V4 =
      FinGroup::product(FinGroup::cyclic(2), FinGroup::cyclic(2));
  // axes 1, i, j, k |-> (0,0), (1,0), (0,1), (1,1)
  static const int axmap[4] = {0, 2, 1, 3};
  std::vector<int> proj(8);
  for (int x = 0; x < 8; ++x) proj[static_cast<std::size_t>(x)] = axmap[x / 2];
  return FinExtension::make(Q8, V4, std::move(proj));
}

// ---- automorphism helpers --------------------------------------------------

inline std::vector<int> auto_identity(const FinGroup& G) {
  std::vector<int> m(static_cast<std::size_t>(G.n));
  for (int x = 0; x < G.n; ++x) m[static_cast<std::size_t>(x)] = x;
  return m;
}

// x -> -x (an automorphism for abelian groups)
inline std::vector<int> auto_inversion(const FinGroup& G) {
  if (!G.abelian())
    throw std::invalid_argument("inversion is only a hom for abelian groups");
  std::vector<int> m(static_cast<std::size_t>(G.n));
  for (int x = 0; x < G.n; ++x) m[static_cast<std::size_t>(x)] = G.inv(x);
  return m;
}

// x -> g x g^{-1}
inline std::vector<int> auto_inner(const FinGroup& G, int g) {
  std::vector<int> m(static_cast<std::size_t>(G.n));
  for (int x = 0; x < G.n; ++x) m[static_cast<std::size_t>(x)] = G.conj(g, x);
  return m;
}

// ---- sheaf builders --------------------------------------------------------

// constant extension with one overridden chart->pair restriction (monodromy
// twist); only meaningful on nerves without triples through the twisted pair
inline ExtensionSheaf mobius_sheaf(const Nerve& N, const FinExtension& E,
                                   int chart, const Nerve::Simplex& pair,
                                   const std::vector<int>& aut) {
  std::map<Nerve::Simplex, FinExtension> data;
  for (const auto& s : N.simplices) data[s] = E;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> rT;
  const std::vector<int> id = auto_identity(E.Gp);
  for (const auto& s : N.simplices)
    for (const auto& t : N.simplices)
      if (s != t && std::includes(t.begin(), t.end(), s.begin(), s.end()))
        rT[{s, t}] = GroupHom::checked(E.Gp, E.Gp, id);
  rT[{Nerve::Simplex{chart}, pair}] = GroupHom::checked(E.Gp, E.Gp, aut);
  return ExtensionSheaf::build(N, std::move(data), std::move(rT));
}

// constant extension with one automorphism per chart applied on every
// restriction out of that chart (functorial on any nerve)
inline ExtensionSheaf chart_twisted_sheaf(
    const Nerve& N, const FinExtension& E,
    const std::vector<std::vector<int>>& chart_auto) {
  std::map<Nerve::Simplex, FinExtension> data;
  for (const auto& s : N.simplices) data[s] = E;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> rT;
  const std::vector<int> id = auto_identity(E.Gp);
  for (const auto& s : N.simplices)
    for (const auto& t : N.simplices) {
      if (s == t || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
        continue;
      if (s.size() == 1)
        rT[{s, t}] = GroupHom::checked(
            E.Gp, E.Gp, chart_auto[static_cast<std::size_t>(s[0])]);
      else
        rT[{s, t}] = GroupHom::checked(E.Gp, E.Gp, id);
    }
  return ExtensionSheaf::build(N, std::move(data), std::move(rT));
}

// heterogeneous sheaf: Z/2 with trivial kernel on charts and pairs, Z/4 over
// Z/2 on triples and quadruples, glued by x -> 2x.  The quotient sheaf has
// zero restrictions into triples, so its Z^1 is unconstrained, while lifts
// must satisfy a genuine parity equation: delta1 obstructs here.
inline ExtensionSheaf rank_jump_sheaf(const Nerve& N) {
  const FinExtension low = ext_identity(FinGroup::cyclic(2));
  const FinExtension high = FinExtension::cyclic_mod(4, 2);
  std::map<Nerve::Simplex, FinExtension> data;
  for (const auto& s : N.simplices) data[s] = s.size() <= 2 ? low : high;
  std::map<std::pair<Nerve::Simplex, Nerve::Simplex>, GroupHom> rT;
  const std::vector<int> id2{0, 1};
  const std::vector<int> dbl{0, 2}; // Z/2 -> Z/4, x -> 2x
  const std::vector<int> id4{0, 1, 2, 3};
  for (const auto& s : N.simplices)
    for (const auto& t : N.simplices) {
      if (s == t || !std::includes(t.begin(), t.end(), s.begin(), s.end()))
        continue;
      const bool slow = s.size() <= 2, tlow = t.size() <= 2;
      if (slow && tlow)
        rT[{s, t}] = GroupHom::checked(low.Gp, low.Gp, id2);
      else if (slow && !tlow)
        rT[{s, t}] = GroupHom::checked(low.Gp, high.Gp, dbl);
      else
        rT[{s, t}] = GroupHom::checked(high.Gp, high.Gp, id4);
    }
  return ExtensionSheaf::build(N, std::move(data), std::move(rT));
}

// ---- nerves ----------------------------------------------------------------

inline Nerve nerve_two_triangles() { // contractible, 4 charts, 2 triples
  return Nerve::from_maximal(4, {{0, 1, 2}, {0, 2, 3}});
}
inline Nerve nerve_triangle_tail() { // triangle plus a 2-edge loop through 3
  return Nerve::from_maximal(4, {{0, 1, 2}, {0, 3}, {1, 3}});
}
inline Nerve nerve_triangle_spur() { // triangle with a pendant chart
  return Nerve::from_maximal(4, {{0, 1, 2}, {0, 3}});
}

// ---- the study catalogue ---------------------------------------------------

struct CechInstance {
  std::string name;
  Nerve nerve;
  ExtensionSheaf sheaf;
};

inline std::vector<CechInstance> cech_catalogue() {
  std::vector<CechInstance> out;
  const FinExtension e42 = FinExtension::cyclic_mod(4, 2);
  const FinExtension e84 = FinExtension::cyclic_mod(8, 4);
  const FinExtension e82 = FinExtension::cyclic_mod(8, 2);
  const FinExtension s3 = ext_sign_s3();
  const FinExtension d4 = ext_d4_over_z2();
  const FinExtension q8 = ext_q8_over_v4();

  auto add = [&](std::string name, const Nerve& N, ExtensionSheaf X) {
    out.push_back({std::move(name), N, std::move(X)});
  };

  const Nerve full3 = Nerve::full(3);
  const Nerve full4 = Nerve::full(4);
  const Nerve cir3 = Nerve::circle(3);
  const Nerve cir4 = Nerve::circle(4);
  const Nerve twotri = nerve_two_triangles();
  const Nerve tail = nerve_triangle_tail();
  const Nerve spur = nerve_triangle_spur();

  // constant instances
  add("Z4/Z2 full3", full3, ExtensionSheaf::constant(full3, e42));
  add("Z4/Z2 full4", full4, ExtensionSheaf::constant(full4, e42));
  add("Z4/Z2 circle3", cir3, ExtensionSheaf::constant(cir3, e42));
  add("Z4/Z2 circle4", cir4, ExtensionSheaf::constant(cir4, e42));
  add("Z8/Z4 circle3", cir3, ExtensionSheaf::constant(cir3, e84));
  add("Z8/Z2 two-triangles", twotri, ExtensionSheaf::constant(twotri, e82));
  add("S3/Z2 full3", full3, ExtensionSheaf::constant(full3, s3));
  add("S3/Z2 circle3", cir3, ExtensionSheaf::constant(cir3, s3));
  add("S3/Z2 tail", tail, ExtensionSheaf::constant(tail, s3));
  add("D4/Z2 circle3", cir3, ExtensionSheaf::constant(cir3, d4));
  add("D4/Z2 full3", full3, ExtensionSheaf::constant(full3, d4));
  add("Q8/V4 circle3", cir3, ExtensionSheaf::constant(cir3, q8));
  add("Q8/V4 full3", full3, ExtensionSheaf::constant(full3, q8));
  add("Q8/V4 tail", tail, ExtensionSheaf::constant(tail, q8));

  // monodromy-twisted circles
  add("Z4/Z2 mobius circle3", cir3,
      mobius_sheaf(cir3, e42, 0, {0, 2}, auto_inversion(e42.Gp)));
  add("Z8/Z4 mobius circle3", cir3,
      mobius_sheaf(cir3, e84, 0, {0, 2}, auto_inversion(e84.Gp)));
  add("Z8/Z2 mobius circle4", cir4,
      mobius_sheaf(cir4, e82, 0, {0, 3}, auto_inversion(e82.Gp)));
  add("S3/Z2 inner-mobius circle3", cir3,
      mobius_sheaf(cir3, s3, 0, {0, 2}, auto_inner(s3.Gp, 1)));
  add("D4/Z2 inner-mobius circle3", cir3,
      mobius_sheaf(cir3, d4, 0, {0, 2}, auto_inner(d4.Gp, 4)));
  add("Q8/V4 inner-mobius circle3", cir3,
      mobius_sheaf(cir3, q8, 0, {0, 2}, auto_inner(q8.Gp, 2)));

  // chartwise inner twists on nerves with triples
  add("S3/Z2 chart-twist tail", tail,
      chart_twisted_sheaf(tail, s3,
                          {auto_inner(s3.Gp, 1), auto_identity(s3.Gp),
                           auto_inner(s3.Gp, 2), auto_identity(s3.Gp)}));
  add("Q8/V4 chart-twist full3", full3,
      chart_twisted_sheaf(full3, q8,
                          {auto_inner(q8.Gp, 2), auto_inner(q8.Gp, 4),
                           auto_identity(q8.Gp)}));
  add("D4/Z2 chart-twist two-triangles", twotri,
      chart_twisted_sheaf(twotri, d4,
                          {auto_inner(d4.Gp, 4), auto_identity(d4.Gp),
                           auto_inner(d4.Gp, 5), auto_identity(d4.Gp)}));

  // heterogeneous rank-jump sheaves (nonvanishing delta1 lives here)
  add("rank-jump full3", full3, rank_jump_sheaf(full3));
  add("rank-jump spur4", spur, rank_jump_sheaf(spur));
  add("rank-jump two-triangles", twotri, rank_jump_sheaf(twotri));
  add("rank-jump full4", full4, rank_jump_sheaf(full4));
  return out;
}

} // namespace nctk
