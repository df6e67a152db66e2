// Gluing weak data into strict structures: fibers, transitions, the cocycle
// condition, round trips and glued morphisms.

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace fact;
using oracle::LociKind;

namespace {

StrictStructure example(std::size_t k, std::size_t dim = 2, std::size_t N = 3) {
  return commutative_structure(Variety::numbered(k), dim, N);
}

}  // namespace

// ============================================================================
// Fibers and charts
// ============================================================================

TEST(Glue, FiberDimensionsFollowTheSupport) {
  for (std::size_t k = 1; k <= 3; ++k)
    for (std::size_t dim = 1; dim <= 3; ++dim) {
      auto Y = glue(weak_forget(example(k, dim), WeakLoci::diagonal(k, 3)));
      for (std::size_t n = 1; n <= 3; ++n)
        for (std::size_t c = 0; c < Y.space_size(n); ++c) {
          auto x = decode(c, n, k);
          EXPECT_EQ(Y.fiber(x).dim(), oracle::ipow(dim, oracle::support_size(x)));
        }
    }
}

TEST(Glue, HereditaryLocusOfDiagonalDataIsTheDiagonal) {
  auto Z = weak_forget(example(3), WeakLoci::diagonal(3, 3));
  auto H = hereditary_locus(Z);
  for (std::size_t n = 1; n <= 3; ++n) EXPECT_EQ(H[n - 1], n == 1 ? Locus::full(3, 1) : Locus::diagonal(3, n));
}

TEST(Glue, ChartSelection) {
  auto g = glue_with_atlas(weak_forget(example(3), oracle::loci(LociKind::Clique, 3, 3)));
  EXPECT_FALSE(g.atlas.chart_at(Tuple{0, 0, 0}).has_value());
  EXPECT_FALSE(g.atlas.chart_at(Tuple{0, 1, 0}).has_value());  // same clique
  ASSERT_TRUE(g.atlas.chart_at(Tuple{0, 2, 0}).has_value());
  EXPECT_EQ(*g.atlas.chart_at(Tuple{0, 2, 0}), Surjection({0, 1, 0}));
  auto charts = g.atlas.charts_at(Tuple{0, 2, 0});
  EXPECT_EQ(charts.size(), 1u);
}

TEST(Glue, TransitionsOfTheCommutativeExampleMatchLabels) {
  auto g = glue_with_atlas(weak_forget(example(3), WeakLoci::diagonal(3, 3)));
  const auto& Y = g.structure;
  for (std::size_t n = 2; n <= 3; ++n)
    for (std::size_t c = 0; c < Y.space_size(n); ++c) {
      auto x = decode(c, n, 3);
      for (const auto& a : enumerate_surjections(IndexSet(n), 2))
        for (const auto& b : enumerate_surjections(IndexSet(n), 2)) {
          if (!in_U(a, x) || !in_U(b, x)) continue;
          auto src = Y.block_tensor(a, x), tgt = Y.block_tensor(b, x);
          EXPECT_EQ(transition(Y, a, b, x).matrix(), oracle::label_matching(*src, *tgt))
              << a << " " << b << " at " << format_tuple(x, Y.variety);
        }
    }
}

TEST(Glue, TransitionsAreInverseAndTrivialOnTheDiagonalOfCharts) {
  std::mt19937_64 gen(oracle::seed());
  auto Z = weak_forget(oracle::twist(example(3), gen), oracle::loci(LociKind::Clique, 3, 3));
  auto g = glue_with_atlas(Z);
  for (std::size_t c = 0; c < 27; ++c) {
    auto x = decode(c, 3, 3);
    auto charts = g.atlas.charts_at(x);
    for (const auto& a : charts) {
      auto dim = a ? g.structure.block_tensor(*a, x)->dim() : Z.fiber(x).dim();
      EXPECT_EQ(transition(g, Z, a, a, x), Iso::identity(FiberTheory::RationalVector, dim));
      for (const auto& b : charts)
        EXPECT_EQ(transition(g, Z, b, a, x), invert_iso(transition(g, Z, a, b, x)));
    }
  }
  EXPECT_THROW(transition(g.structure, Surjection({0, 1, 1}), Surjection({0, 0, 1}), Tuple{0, 0, 0}), DomainError);
}

TEST(Glue, CocycleHoldsOnValidInput) {
  std::mt19937_64 gen(oracle::seed() + 7);
  for (auto kind : {LociKind::Full, LociKind::Diagonal, LociKind::Clique}) {
    auto Z = weak_forget(oracle::twist(example(3, 2, 4), gen), oracle::loci(kind, 3, 4));
    auto g = glue_with_atlas(Z);
    for (std::size_t n = 1; n <= 4; ++n) EXPECT_TRUE(verify_cocycle(g, Z, n).empty()) << oracle::name(kind);
  }
}

TEST(Glue, CorruptedWeakDataIsRejected) {
  auto Z = weak_forget(example(3), oracle::loci(LociKind::Clique, 3, 3));
  auto a = Surjection({0, 1});
  Tuple x{0, 1};
  Z.set_d(a, x, Iso(Z.d_at(a, x).matrix().scaled(3)));
  EXPECT_THROW(glue(Z), ValidationError);
}

// ============================================================================
// Round trips
// ============================================================================

TEST(Glue, GluedStructuresAreStrict) {
  std::mt19937_64 gen(oracle::seed() + 1);
  for (int t = 0; t < 6; ++t) {
    auto S = oracle::twist(example(2 + t % 2), gen);
    auto Y = glue(weak_forget(S, oracle::random_loci(S.k(), 3, gen)));
    EXPECT_TRUE(check_strict(Y).empty());
  }
}

TEST(Glue, WeakOfGlueIsTheInput) {
  std::mt19937_64 gen(oracle::seed() + 2);
  for (auto kind : {LociKind::Full, LociKind::Diagonal, LociKind::Clique}) {
    auto Z = weak_forget(oracle::twist(example(3), gen), oracle::loci(kind, 3, 3));
    EXPECT_EQ(weak_forget(glue(Z), Z.loci), Z) << oracle::name(kind);
  }
}

TEST(Glue, GlueOfWeakIsIsomorphic) {
  std::mt19937_64 gen(oracle::seed() + 3);
  auto S = std::make_shared<const StrictStructure>(oracle::twist(example(3), gen));
  for (auto kind : {LociKind::Full, LociKind::Diagonal, LociKind::Clique}) {
    auto m = canonical_comparison(S, oracle::loci(kind, 3, 3));
    EXPECT_TRUE(check_morphism(m).empty()) << oracle::name(kind);
  }
  // full loci: the comparison is the identity
  auto m = canonical_comparison(S);
  EXPECT_TRUE(check_morphism(m).empty());
  for (std::size_t c = 0; c < 27; ++c) EXPECT_EQ(*m.maps[2][c], Iso::identity(S->fibers[2][c]->theory(), S->fibers[2][c]->dim()));
}

TEST(Glue, ComparisonOfTheCommutativeExampleIsAReordering) {
  auto S = std::make_shared<const StrictStructure>(example(3));
  auto m = canonical_comparison(S, WeakLoci::diagonal(3, 3));
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t c = 0; c < S->space_size(n); ++c)
      EXPECT_EQ(m.maps[n - 1][c]->matrix(), oracle::label_matching(*m.source->fibers[n - 1][c], *S->fibers[n - 1][c]));
}

TEST(Glue, ChartPreferenceDoesNotChangeTheIsomorphismClass) {
  std::mt19937_64 gen(oracle::seed() + 4);
  auto Z = weak_forget(oracle::twist(example(3), gen), oracle::loci(LociKind::Clique, 3, 3));
  auto f = std::make_shared<const StrictStructure>(glue_with_atlas(Z, ChartPreference::PreferF).structure);
  auto u = std::make_shared<const StrictStructure>(glue_with_atlas(Z, ChartPreference::PreferU).structure);
  EXPECT_TRUE(check_strict(*u).empty());
  auto m = extend_from_points(f, u, [&](std::size_t i) { return Iso::identity(f->fiber(Tuple{i})); });
  EXPECT_TRUE(check_morphism(m).empty());
}

TEST(Glue, NuRoutesAreRecorded) {
  auto g = glue_with_atlas(weak_forget(example(2), WeakLoci::diagonal(2, 3)));
  std::size_t routed = 0, direct = 0;
  for (const auto& r : g.atlas.nu_routes) {
    if (r.kind == NuRoute::Kind::Routed) ++routed;
    if (r.kind == NuRoute::Kind::Direct) ++direct;
    if (is_constant(r.point) && !r.alpha.is_bijection()) EXPECT_EQ(r.kind, NuRoute::Kind::Direct);
  }
  EXPECT_GT(routed, 0u);
  EXPECT_GT(direct, 0u);
}

// ============================================================================
// Morphisms
// ============================================================================

TEST(Glue, ScalarMorphismExtendsBySupport) {
  auto S = example(3);
  auto Z = std::make_shared<const WeakStructure>(weak_forget(S, oracle::loci(LociKind::Clique, 3, 3)));
  WeakMorphism m{Z, Z, Z->loci.W, empty_maps(*Z)};
  for (std::size_t n = 1; n <= 3; ++n)
    for (const auto& x : Z->W(n).members()) {
      Rational s = static_cast<long>(oracle::ipow(2, oracle::support_size(x)));
      m.set(x, Iso(Matrix::identity(Z->fiber(x).dim()).scaled(s)));
    }
  ASSERT_TRUE(check_morphism(m).empty());
  auto g = glue_morphism(m);
  for (std::size_t n = 1; n <= 3; ++n)
    for (std::size_t c = 0; c < S.space_size(n); ++c) {
      auto x = decode(c, n, 3);
      Rational s = static_cast<long>(oracle::ipow(2, oracle::support_size(x)));
      EXPECT_EQ(g.maps[n - 1][c]->matrix(), Matrix::identity(S.fiber(x).dim()).scaled(s));
    }
}

TEST(Glue, InconsistentMorphismIsRejected) {
  auto Z = std::make_shared<const WeakStructure>(weak_forget(example(3), oracle::loci(LociKind::Clique, 3, 3)));
  auto m = identity_morphism(Z);
  Tuple x{0, 1};
  m.set(x, Iso(m.at(x)->matrix().scaled(3)));
  EXPECT_FALSE(check_morphism(m).empty());
  try {
    glue_morphism(m);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_TRUE(e.report().mentions(datum_key("map", nullptr, x, Z->variety)));
  }
}
