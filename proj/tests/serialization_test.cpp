// Structure files: canonical output, exact re-reading and rejection of bad
// input.

#include <gtest/gtest.h>

#include <random>

#include "fact/serialization.hpp"
#include "support/oracles.hpp"

using namespace fact;

namespace {

StrictStructure example(std::size_t k, FiberTheory t = FiberTheory::RationalVector) {
  return commutative_structure(Variety::numbered(k), 2, 3, t);
}

template <class T>
T reread(const std::string& text) {
  auto doc = parse_document(text);
  EXPECT_TRUE(std::holds_alternative<T>(doc));
  return std::get<T>(std::move(doc));
}

std::string example_text() { return to_json(commutative_structure(Variety::numbered(2), 2, 2)); }

}  // namespace

TEST(Serialization, StrictRoundTripIsExactAndByteStable) {
  std::mt19937_64 gen(oracle::seed());
  for (auto t : {FiberTheory::RationalVector, FiberTheory::FiniteBijection}) {
    auto S = example(2, t);
    auto text = to_json(S);
    auto back = reread<StrictStructure>(text);
    EXPECT_EQ(back, S);
    EXPECT_EQ(to_json(back), text);
  }
  auto T = oracle::twist(example(2), gen);
  EXPECT_EQ(reread<StrictStructure>(to_json(T)), T);
}

TEST(Serialization, WeakRoundTrip) {
  std::mt19937_64 gen(oracle::seed() + 1);
  auto Z = weak_forget(oracle::twist(example(3), gen), oracle::random_loci(3, 3, gen));
  auto text = to_json(Z);
  auto back = reread<WeakStructure>(text);
  EXPECT_EQ(back, Z);
  EXPECT_EQ(to_json(back), text);
}

TEST(Serialization, MapAndFamilyRoundTrip) {
  EtaleMap phi(Variety::numbered(2), Variety({"p"}), {0, 0});
  EXPECT_EQ(reread<EtaleMap>(to_json(phi)), phi);

  for (auto t : {FiberTheory::RationalVector, FiberTheory::FiniteBijection}) {
    auto F = commutative_family(2, Catalog::all_maps(2), 2, t);
    auto text = to_json(F);
    auto back = reread<UniversalFamily>(text);
    EXPECT_EQ(back.catalog.maps, F.catalog.maps);
    EXPECT_EQ(back.comparisons, F.comparisons);
    for (std::size_t i = 0; i < F.structures.size(); ++i) EXPECT_EQ(*back.structures[i], *F.structures[i]);
    EXPECT_EQ(to_json(back), text);
  }
}

TEST(Serialization, UnknownKeysAreRejected) {
  auto j = Json::parse(example_text());
  j["extra"] = 1;
  EXPECT_THROW(parse_document(j.dump()), ParseError);
  j = Json::parse(example_text());
  j["d"][0]["note"] = "x";
  try {
    parse_document(j.dump());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.path(), "/d/0");
  }
}

TEST(Serialization, SingularMatrixIsAParseError) {
  auto j = Json::parse(example_text());
  for (auto& e : j["nu"]) {
    if (e["matrix"].size() != 2) continue;
    e["matrix"] = Json::array({Json::array({"1", "2"}), Json::array({"2", "4"})});
    break;
  }
  try {
    parse_document(j.dump());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("singular"), std::string::npos) << e.what();
  }
}

TEST(Serialization, SyntaxErrorsCarryLineAndColumn) {
  std::string text = "{\n  \"header\": {\n    \"kind\": strict\n  }\n}\n";
  try {
    parse_document(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 13u);
  }
}

TEST(Serialization, StructuralErrorsAreParseErrors) {
  auto j = Json::parse(example_text());
  j["header"]["format_version"] = 99;
  EXPECT_THROW(parse_document(j.dump()), ParseError);
  j = Json::parse(example_text());
  j["d"][0]["surjection"] = Json::array({2, 1});
  EXPECT_THROW(parse_document(j.dump()), ParseError);
  j = Json::parse(example_text());
  j["fibers"].push_back(j["fibers"][0]);
  EXPECT_THROW(parse_document(j.dump()), ParseError);
  j = Json::parse(example_text());
  j["header"]["variety"] = Json::array({"a", "a"});
  EXPECT_THROW(parse_document(j.dump()), ParseError);
}

TEST(Serialization, ReportRecordsMirrorViolations) {
  auto S = example(2);
  auto a = Surjection({0, 1});
  S.set_d(a, Tuple{0, 1}, Iso::identity(FiberTheory::RationalVector, 3));
  auto r = check_strict(S);
  auto j = report_json(r);
  EXPECT_FALSE(j["ok"].get<bool>());
  ASSERT_EQ(j["violations"].size(), r.size());
  EXPECT_EQ(j["violations"][0]["law"], "shape_d");
  EXPECT_EQ(j["violations"][0]["surjections"][0], Json::array({1, 2}));
  EXPECT_EQ(j["violations"][0]["point"], Json::array({"x1", "x2"}));
}
