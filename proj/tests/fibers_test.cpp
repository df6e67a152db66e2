// Fibers, isomorphisms, tensor products and reorderings.

#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"

using namespace fact;

TEST(Fibers, RationalsParseAndPrint) {
  EXPECT_EQ(format_rational(parse_rational("6/4")), "3/2");
  EXPECT_EQ(format_rational(parse_rational("-2")), "-2/1");
  EXPECT_THROW(parse_rational("1/0"), DomainError);
  EXPECT_THROW(parse_rational("x"), DomainError);
}

TEST(Fibers, FiniteSetsCountTheirElements) {
  auto f = Fiber::finite_set({{"a"}, {"b"}, {"c"}});
  EXPECT_EQ(f.dim(), 3u);
  EXPECT_THROW(Fiber::finite_set({{"a"}, {"a"}}), DomainError);
  EXPECT_THROW(Fiber::vector_space(2, {{"a"}}), DomainError);
}

TEST(Fibers, KroneckerMatchesTheEntrywiseOracle) {
  std::mt19937_64 gen(oracle::seed());
  for (int t = 0; t < 10; ++t) {
    auto a = oracle::random_invertible(2, gen), b = oracle::random_invertible(3, gen);
    EXPECT_EQ(kronecker(a, b), oracle::kronecker(a, b));
    std::vector<Iso> parts{Iso(a), Iso(b)};
    EXPECT_EQ(tensor_iso(parts, FiberTheory::RationalVector).matrix(), oracle::kronecker(a, b));
  }
}

TEST(Fibers, InverseAndComposition) {
  std::mt19937_64 gen(oracle::seed() + 1);
  for (int t = 0; t < 10; ++t) {
    Iso f(oracle::random_invertible(3, gen));
    EXPECT_EQ(compose_iso(f, invert_iso(f)), Iso::identity(FiberTheory::RationalVector, 3));
  }
  Iso p(Bijection({2, 0, 1}));
  EXPECT_EQ(compose_iso(invert_iso(p), p), Iso::identity(FiberTheory::FiniteBijection, 3));
  EXPECT_THROW(compose_iso(p, Iso::identity(FiberTheory::RationalVector, 3)), DomainError);
}

TEST(Fibers, SingularMatricesAreNotIsomorphisms) {
  Matrix m(2, 2);
  m(0, 0) = 1;
  m(0, 1) = 2;
  m(1, 0) = 2;
  m(1, 1) = 4;
  EXPECT_THROW(Iso{m}, DomainError);
  EXPECT_THROW(Iso{Matrix(2, 3)}, DomainError);
  EXPECT_THROW(Bijection({0, 0}), DomainError);
}

TEST(Fibers, TensorConcatenatesLabels) {
  auto a = Fiber::vector_space(2, {{"a1"}, {"a2"}});
  auto b = Fiber::vector_space(2, {{"b1"}, {"b2"}});
  std::vector<Fiber> parts{a, b};
  auto t = tensor(parts, FiberTheory::RationalVector);
  EXPECT_EQ(t.dim(), 4u);
  EXPECT_EQ(t.elements()[1], (Element{"a1", "b2"}));
  EXPECT_EQ(tensor(std::span<const Fiber>{}, FiberTheory::RationalVector).dim(), 1u);
}

TEST(Fibers, ReorderMatchesLabels) {
  // source a (x) b (x) c, target c (x) a (x) b
  auto a = Fiber::vector_space(2, {{"a1"}, {"a2"}});
  auto b = Fiber::vector_space(3, {{"b1"}, {"b2"}, {"b3"}});
  auto c = Fiber::vector_space(2, {{"c1"}, {"c2"}});
  std::vector<Fiber> src{a, b, c}, tgt{c, a, b};
  std::vector<std::size_t> order{2, 0, 1};
  auto r = reorder_iso(FiberTheory::RationalVector, std::span<const Fiber>(src), order);
  auto S = tensor(src, FiberTheory::RationalVector), T = tensor(tgt, FiberTheory::RationalVector);
  EXPECT_EQ(r.matrix(), oracle::label_matching(S, T));
  std::vector<std::size_t> bad{0, 0, 1};
  EXPECT_THROW(reorder_iso(FiberTheory::RationalVector, std::span<const Fiber>(src), bad), DomainError);
}

TEST(Fibers, ReorderOfFiniteSetsIsABijection) {
  std::vector<std::size_t> dims{2, 3}, swap{1, 0};
  auto r = reorder_iso(FiberTheory::FiniteBijection, std::span<const std::size_t>(dims), swap);
  ASSERT_TRUE(r.is_bijection());
  // (i, j) -> (j, i)
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.bijection()(i * 3 + j), j * 2 + i);
}
