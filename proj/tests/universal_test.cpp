// Families over a catalog of varieties and the universality check.

#include <gtest/gtest.h>

#include "support/oracles.hpp"

using namespace fact;

TEST(Universal, CatalogCounts) {
  auto c = Catalog::all_maps(3);
  EXPECT_EQ(c.varieties.size(), 3u);
  std::size_t expected = 0;
  for (std::size_t s = 1; s <= 3; ++s)
    for (std::size_t t = 1; t <= 3; ++t) expected += oracle::ipow(t, s);
  EXPECT_EQ(c.maps.size(), expected);
  EXPECT_TRUE(c.map_index(EtaleMap::identity(Variety::numbered(2))).has_value());
  EXPECT_THROW(c.variety_index(Variety::numbered(4)), DomainError);
}

TEST(Universal, MapNames) {
  EtaleMap phi(Variety::numbered(2), Variety::numbered(1), {0, 0});
  EXPECT_EQ(map_name(phi), "x1,x2->x1:[x1,x1]");
  EXPECT_EQ(comparison_key(phi, Tuple{0, 1}), "Y<x1,x2->x1:[x1,x1]>@(x1,x2)");
}

TEST(Universal, CommutativeFibersHaveOracleDimension) {
  for (std::size_t dim = 1; dim <= 3; ++dim) {
    auto S = commutative_structure(Variety::numbered(3), dim, 3);
    for (std::size_t n = 1; n <= 3; ++n)
      for (std::size_t c = 0; c < S.space_size(n); ++c) {
        auto x = decode(c, n, 3);
        EXPECT_EQ(S.fiber(x).dim(), oracle::ipow(dim, oracle::support_size(x)));
      }
  }
}

TEST(Universal, CommutativeDIsALabelMatching) {
  auto S = commutative_structure(Variety::numbered(3), 2, 3);
  for (const auto& [a, t] : S.d)
    for (std::size_t c = 0; c < t.size(); ++c)
      if (t[c]) {
        auto x = decode(c, a.source_arity(), 3);
        EXPECT_EQ(t[c]->matrix(), oracle::label_matching(*S.block_tensor(a, x), S.fiber(x)));
      }
}

TEST(Universal, SinglePointCatalogPasses) {
  auto F = commutative_family(2, Catalog::all_maps(1), 3);
  EXPECT_TRUE(check_universal(F).empty());
  EXPECT_TRUE(check_universal(F, PullbackMode::Naive).empty());
}

TEST(Universal, SizeTwoCatalogPassesStrictAndFailsNaive) {
  auto F = commutative_family(2, Catalog::all_maps(2), 3);
  EXPECT_TRUE(check_universal(F).empty());
  auto r = check_universal(F, PullbackMode::Naive);
  std::set<std::string> failing;
  for (const auto& v : r.records()) failing.insert(v.context);
  std::set<std::string> non_injective;
  for (const auto& phi : F.catalog.maps)
    if (!phi.is_injective()) non_injective.insert(map_name(phi));
  for (const auto& name : non_injective) EXPECT_TRUE(failing.count(name)) << name;
}

TEST(Universal, ScaledComparisonIsDetected) {
  auto F = commutative_family(2, Catalog::all_maps(2), 2);
  EtaleMap phi(Variety::numbered(2), Variety::numbered(1), {0, 0});
  auto i = *F.catalog.map_index(phi);
  Tuple x{0, 1};
  auto& entry = F.comparisons[i][1][encode(x, 2)];
  entry = Iso(entry->matrix().scaled(2));
  auto r = check_universal(F);
  ASSERT_FALSE(r.empty());
  EXPECT_TRUE(r.mentions(comparison_key(phi, x)));
}

TEST(Universal, ScaledComparisonAtAConstantTupleIsNamed) {
  // only the nu square through (x1) sees this entry; the report must still
  // name the arity-2 datum rather than the base point
  auto F = commutative_family(2, Catalog::all_maps(2), 2);
  EtaleMap phi(Variety::numbered(2), Variety::numbered(2), {1, 1});
  auto i = *F.catalog.map_index(phi);
  Tuple x{0, 0};
  auto& entry = F.comparisons[i][1][encode(x, 2)];
  entry = Iso(entry->matrix().scaled(2));
  EXPECT_TRUE(check_universal(F).mentions(comparison_key(phi, x)));
}
