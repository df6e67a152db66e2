/*
Acceptance run: one PASS/FAIL line per criterion, with timing.
Exit status is the number of failed criteria.
*/
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "support/oracles.hpp"

using namespace fact;
using oracle::LociKind;

namespace {

struct Outcome {
  bool ok = true;
  std::string summary;
  std::vector<std::string> notes;
};

#define REQUIRE(cond, msg)   \
  do {                       \
    if (!(cond)) {           \
      out.ok = false;        \
      out.notes.push_back(msg); \
    }                        \
  } while (0)

constexpr LociKind kAllKinds[] = {LociKind::Full, LociKind::Diagonal, LociKind::Clique};

StrictStructure example(std::size_t k, std::size_t dim, std::size_t N) {
  return commutative_structure(Variety::numbered(k), dim, N);
}

std::string where(std::size_t k, std::size_t dim, LociKind kind) {
  std::ostringstream os;
  os << "|X|=" << k << " dim=" << dim << " loci=" << oracle::name(kind);
  return os.str();
}

Iso doubled(const Iso& f) { return Iso(f.matrix().scaled(2)); }

// ---------------------------------------------------------------------------

Outcome fiber_dimensions() {
  Outcome out;
  std::size_t points = 0;
  for (std::size_t k = 1; k <= 3; ++k)
    for (std::size_t dim = 1; dim <= 3; ++dim)
      for (auto kind : {LociKind::Diagonal, LociKind::Clique}) {
        auto Y = glue(weak_forget(example(k, dim, 3), oracle::loci(kind, k, 3)));
        for (std::size_t n = 1; n <= 3; ++n)
          for (std::size_t c = 0; c < Y.space_size(n); ++c, ++points) {
            auto x = decode(c, n, k);
            auto want = oracle::ipow(dim, oracle::support_size(x));
            REQUIRE(Y.fiber(x).dim() == want, where(k, dim, kind) + " at " + format_tuple(x, Y.variety));
          }
      }
  out.summary = std::to_string(points) + " glued fibers against the support oracle";
  return out;
}

Outcome weak_of_glue() {
  Outcome out;
  std::mt19937_64 gen(oracle::seed());
  std::size_t runs = 0;
  for (std::size_t k = 1; k <= 3; ++k)
    for (auto kind : kAllKinds) {
      auto Z = weak_forget(example(k, 2, 3), oracle::loci(kind, k, 3));
      REQUIRE(weak_forget(glue(Z), Z.loci) == Z, "commutative " + where(k, 2, kind));
      ++runs;
    }
  std::uniform_int_distribution<std::size_t> size(1, 3), dim(1, 2), kind(0, 2);
  for (int t = 0; t < 120; ++t, ++runs) {
    auto k = size(gen), d = dim(gen);
    auto lk = kAllKinds[kind(gen)];
    auto Z = weak_forget(oracle::twist(example(k, d, 3), gen), oracle::loci(lk, k, 3));
    REQUIRE(weak_forget(glue(Z), Z.loci) == Z, "twisted #" + std::to_string(t) + " " + where(k, d, lk));
  }
  out.summary = std::to_string(runs) + " weak structures (120 twisted) reproduced exactly";
  return out;
}

Outcome glue_of_weak() {
  Outcome out;
  std::mt19937_64 gen(oracle::seed() + 1);
  std::size_t runs = 0;
  auto check = [&](const std::shared_ptr<const StrictStructure>& S, const WeakLoci& L, const std::string& label) {
    auto m = canonical_comparison(S, L);
    bool total = true;
    for (const auto& t : m.maps)
      for (const auto& f : t) total = total && f.has_value();
    REQUIRE(total, label + ": comparison not defined everywhere");
    auto r = check_morphism(m);
    REQUIRE(r.empty(), label + ": " + std::to_string(r.size()) + " violations");
    ++runs;
  };
  for (std::size_t k = 1; k <= 3; ++k)
    for (std::size_t d = 1; d <= 2; ++d) {
      auto plain = std::make_shared<const StrictStructure>(example(k, d, 3));
      auto twisted = std::make_shared<const StrictStructure>(oracle::twist(*plain, gen));
      for (auto kind : kAllKinds) {
        check(plain, oracle::loci(kind, k, 3), "commutative " + where(k, d, kind));
        check(twisted, oracle::loci(kind, k, 3), "twisted " + where(k, d, kind));
      }
      check(twisted, oracle::random_loci(k, 3, gen), "twisted random loci |X|=" + std::to_string(k));
    }
  out.summary = std::to_string(runs) + " comparisons are morphisms, invertible pointwise";
  return out;
}

Outcome cocycle() {
  Outcome out;
  std::mt19937_64 gen(oracle::seed() + 2);
  std::size_t points = 0;
  for (std::size_t k = 1; k <= 3; ++k)
    for (auto kind : kAllKinds) {
      auto Z = weak_forget(oracle::twist(example(k, 2, 4), gen), oracle::loci(kind, k, 4));
      try {
        auto g = glue_with_atlas(Z);
        for (std::size_t n = 1; n <= 4; ++n) {
          auto r = verify_cocycle(g, Z, n);
          REQUIRE(r.empty(), where(k, 2, kind) + " arity " + std::to_string(n));
          points += Z.space_size(n);
        }
      } catch (const std::exception& e) {
        REQUIRE(false, where(k, 2, kind) + ": " + e.what());
      }
    }
  out.summary = std::to_string(points) + " points, every ordered triple of charts, arities <= 4";
  return out;
}

Outcome collapse_scenario() {
  Outcome out;
  EtaleMap phi(Variety::numbered(2), Variety::numbered(1), {0, 0});
  auto naive = naive_pullback(phi, example(1, 2, 2));
  std::set<std::vector<std::string>> points;
  for (const auto& v : naive.report.records()) {
    REQUIRE(v.law == "factorization_shape", "unexpected law " + v.law);
    REQUIRE(v.detail == "required dim 4 vs provided dim 2", "detail '" + v.detail + "'");
    points.insert(v.point);
  }
  std::set<std::vector<std::string>> want;
  for (const auto& z : Z_phi(phi).members()) want.insert(labels_of(z, phi.source()));
  REQUIRE(naive.report.size() == 2 && points == want, "naive report does not name exactly Z_phi");
  for (std::size_t N = 2; N <= 3; ++N) {
    auto P = pullback_strict(phi, example(1, 2, N));
    REQUIRE(check_strict(P).empty(), "strict pullback invalid at N=" + std::to_string(N));
    for (const auto& z : Z_phi(phi).members()) REQUIRE(P.fiber(z).dim() == 4, "repaired fiber is not dim 4");
  }
  out.summary = "naive fails at (x1,x2),(x2,x1) with dim 4 vs 2; strict pullback valid with dim-4 fibers";
  return out;
}

Outcome injectivity_boundary() {
  Outcome out;
  auto cat = Catalog::all_maps(3);
  std::vector<StrictStructure> S;
  for (const auto& X : cat.varieties) S.push_back(example(X.size(), 2, 3));
  std::size_t injective = 0;
  for (const auto& phi : cat.maps) {
    bool empty_report = naive_pullback(phi, S[phi.target().size() - 1]).report.empty();
    bool inj = phi.is_injective();
    bool no_z = Z_phi(phi).size() == 0;
    REQUIRE(empty_report == inj && inj == no_z, map_name(phi));
    injective += inj;
  }
  out.summary = std::to_string(cat.maps.size()) + " maps, " + std::to_string(injective) + " injective";
  return out;
}

Outcome functoriality() {
  Outcome out;
  std::mt19937_64 gen(oracle::seed() + 3);
  auto P = Variety::numbered(1);
  auto S = oracle::twist(example(1, 2, 3), gen);
  EtaleMap psi(Variety::numbered(2), P, {0, 0});
  std::size_t chains = 0;
  for (const auto& phi : Catalog::all_maps(3).maps) {
    if (phi.source().size() != 3 || phi.target().size() != 2) continue;
    auto r = pullback_compose_check(phi, psi, S).report;
    REQUIRE(r.empty(), map_name(phi) + " then " + map_name(psi));
    ++chains;
  }
  out.summary = std::to_string(chains) + " chains 3->2->1 at N=3";
  return out;
}

Outcome universality() {
  Outcome out;
  auto F = commutative_family(2, Catalog::all_maps(3), 3);
  auto strict = check_universal(F);
  REQUIRE(strict.empty(), std::to_string(strict.size()) + " violations with the strict pullback");
  auto naive = check_universal(F, PullbackMode::Naive);
  std::set<std::string> failing, non_injective;
  for (const auto& v : naive.records()) failing.insert(v.context);
  for (const auto& phi : F.catalog.maps)
    if (!phi.is_injective()) non_injective.insert(map_name(phi));
  REQUIRE(failing == non_injective, "naive failures do not match the non-injective maps");
  out.summary = std::to_string(F.catalog.maps.size()) + " maps: strict clean, naive fails on all " +
                std::to_string(non_injective.size()) + " non-injective maps and no others";
  return out;
}

// Mutation run. Each mutant doubles one datum; detectors run in order and
// the first whose report names the datum is credited.
Outcome mutations() {
  Outcome out;
  std::mt19937_64 gen(oracle::seed() + 4);
  std::map<std::string, std::size_t> credited;

  auto base = oracle::twist(example(3, 2, 3), gen);
  auto ref = std::make_shared<const WeakStructure>(weak_forget(base, oracle::loci(LociKind::Clique, 3, 3)));
  struct Entry {
    bool nu;
    Surjection a;
    Tuple x;
  };
  std::vector<Entry> entries;
  for (const auto* m : {&ref->nu, &ref->d})
    for (const auto& [a, t] : *m)
      for (std::size_t c = 0; c < t.size(); ++c)
        if (t[c]) entries.push_back({m == &ref->nu, a, decode(c, m == &ref->nu ? a.target_arity() : a.source_arity(), 3)});

  auto detect_weak = [&](const WeakStructure& Z, const std::string& key) -> std::string {
    if (check_weak(Z).mentions(key)) return "check_weak";
    try {
      auto g = glue_with_atlas(Z);
      if (check_strict(g.structure).mentions(key)) return "check_strict";
    } catch (const ValidationError& e) {
      if (e.report().mentions(key)) return "verify_cocycle";
    } catch (const std::exception&) {
    }
    auto mutant = std::make_shared<const WeakStructure>(Z);
    WeakMorphism id{ref, mutant, ref->loci.W, identity_morphism(ref).maps};
    if (check_morphism(id).mentions(key)) return "check_morphism";
    return {};
  };

  std::uniform_int_distribution<std::size_t> pick(0, entries.size() - 1);
  std::size_t detected = 0;
  const int weak_mutants = 40;
  for (int i = 0; i < weak_mutants; ++i) {
    const auto& e = entries[pick(gen)];
    WeakStructure Z = *ref;
    std::string key = datum_key(e.nu ? "nu" : "d", &e.a, e.x, Z.variety);
    if (e.nu) Z.set_nu(e.a, e.x, doubled(Z.nu_at(e.a, e.x)));
    else Z.set_d(e.a, e.x, doubled(Z.d_at(e.a, e.x)));
    auto by = detect_weak(Z, key);
    REQUIRE(!by.empty(), "undetected: " + key);
    if (!by.empty()) {
      ++detected;
      ++credited[by];
    }
  }

  auto family = commutative_family(2, Catalog::all_maps(2), 2);
  std::uniform_int_distribution<std::size_t> which(0, family.catalog.maps.size() - 1);
  for (int i = 0; i < 50 - weak_mutants; ++i) {
    auto F = family;
    auto m = which(gen);
    const auto& phi = F.catalog.maps[m];
    auto k = phi.source().size();
    std::uniform_int_distribution<std::size_t> arity(1, 2);
    auto n = arity(gen);
    std::uniform_int_distribution<std::size_t> point(0, power(k, n) - 1);
    auto c = point(gen);
    auto& slot = F.comparisons[m][n - 1][c];
    slot = doubled(*slot);
    auto key = comparison_key(phi, decode(c, n, k));
    bool hit = check_universal(F).mentions(key);
    REQUIRE(hit, "undetected: " + key);
    if (hit) {
      ++detected;
      ++credited["check_universal"];
    }
  }

  std::ostringstream os;
  os << detected << "/50 mutants named (";
  bool first = true;
  for (const auto& [name, n] : credited) {
    os << (first ? "" : ", ") << name << " " << n;
    first = false;
  }
  os << ")";
  out.summary = os.str();
  return out;
}

}  // namespace

int main() {
  std::printf("acceptance seed %llu\n", static_cast<unsigned long long>(oracle::seed()));
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"fiber dimensions match the support oracle", fiber_dimensions},
      {"weak(glue(Z)) = Z", weak_of_glue},
      {"glue(weak(S)) is isomorphic to S", glue_of_weak},
      {"cocycle condition", cocycle},
      {"2->1 collapse: naive fails, strict repairs", collapse_scenario},
      {"naive pullback clean iff injective iff Z_phi empty", injectivity_boundary},
      {"pullback composes", functoriality},
      {"universality over the size-3 catalog", universality},
      {"mutations are detected", mutations},
  };
  int failed = 0;
  double total = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.summary = std::string("threw: ") + e.what();
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += s;
    std::printf("criterion %zu: %s  %s: %s (%.2fs)\n", i + 1, o.ok ? "PASS" : "FAIL", criteria[i].first,
                o.summary.c_str(), s);
    for (std::size_t j = 0; j < o.notes.size() && j < 10; ++j) std::printf("    %s\n", o.notes[j].c_str());
    if (o.notes.size() > 10) std::printf("    ... %zu more\n", o.notes.size() - 10);
    failed += !o.ok;
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed (%.2fs total)\n", failed, criteria.size(), total);
  return failed;
}
