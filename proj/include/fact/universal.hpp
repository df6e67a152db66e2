#pragma once

#include <algorithm>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fact/pullback.hpp"

namespace fact {

/// V^{support(x)} at every point, nu the identity, d the factor reordering.
inline StrictStructure commutative_structure(const Variety& X, std::size_t dim, std::size_t max_arity,
                                             FiberTheory theory = FiberTheory::RationalVector) {
  StrictStructure S(X, theory, max_arity);
  const auto k = X.size();
  auto copy_at = [&](std::size_t point) {
    std::vector<Element> el;
    for (std::size_t i = 0; i < dim; ++i) el.push_back({X.label(point) + "." + std::to_string(i + 1)});
    return theory == FiberTheory::FiniteBijection ? Fiber::finite_set(el) : Fiber::vector_space(dim, el);
  };
  auto fiber_at = [&](const Tuple& x) {
    std::vector<Fiber> parts;
    for (auto s : support(x)) parts.push_back(copy_at(s));
    return tensor(parts, theory);
  };
  for (std::size_t n = 1; n <= max_arity; ++n) {
    for (std::size_t c = 0; c < S.space_size(n); ++c) S.set_fiber(decode(c, n, k), fiber_at(decode(c, n, k)));
    for (const auto& a : surjections_from(n)) {
      for (std::size_t c = 0; c < S.space_size(a.target_arity()); ++c) {
        auto p = decode(c, a.target_arity(), k);
        S.set_nu(a, p, Iso::identity(S.fiber(p)));
      }
      for (std::size_t c = 0; c < S.space_size(n); ++c) {
        auto x = decode(c, n, k);
        if (!in_U(a, x)) continue;
        std::vector<std::size_t> concat;
        for (const auto& b : blocks(a)) {
          auto s = support(restrict_tuple(x, b));
          concat.insert(concat.end(), s.begin(), s.end());
        }
        std::vector<std::size_t> order;
        for (auto s : support(x))
          order.push_back(static_cast<std::size_t>(std::find(concat.begin(), concat.end(), s) - concat.begin()));
        std::vector<std::size_t> dims(concat.size(), dim);
        S.set_d(a, x, reorder_iso(theory, std::span<const std::size_t>(dims), order));
      }
    }
  }
  return S;
}

/// Varieties and the maps between them that the universality check visits.
struct Catalog {
  std::vector<Variety> varieties;
  std::vector<EtaleMap> maps;

  /// One variety x1..xs for each size s <= max_size, every map between them.
  static Catalog all_maps(std::size_t max_size) {
    Catalog c;
    for (std::size_t s = 1; s <= max_size; ++s) c.varieties.push_back(Variety::numbered(s));
    for (const auto& X : c.varieties)
      for (const auto& Y : c.varieties) {
        const auto total = power(Y.size(), X.size());
        for (std::size_t code = 0; code < total; ++code) {
          auto image = decode(code, X.size(), Y.size());
          c.maps.emplace_back(X, Y, std::vector<std::size_t>(image.begin(), image.end()));
        }
      }
    return c;
  }

  std::size_t variety_index(const Variety& X) const {
    auto it = std::find(varieties.begin(), varieties.end(), X);
    if (it == varieties.end()) throw DomainError("variety not in the catalog");
    return static_cast<std::size_t>(it - varieties.begin());
  }

  std::optional<std::size_t> map_index(const EtaleMap& phi) const {
    auto it = std::find(maps.begin(), maps.end(), phi);
    if (it == maps.end()) return std::nullopt;
    return static_cast<std::size_t>(it - maps.begin());
  }
};

/// e.g. "x1,x2->x1:[x1,x1]".
inline std::string map_name(const EtaleMap& phi) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  std::vector<std::string> image;
  for (auto v : phi.map()) image.push_back(phi.target().label(v));
  return join(phi.source().labels()) + "->" + join(phi.target().labels()) + ":[" + join(image) + "]";
}

/// Key of the comparison Y(phi) at a point of its source.
inline std::string comparison_key(const EtaleMap& phi, const Tuple& x) {
  return "Y<" + map_name(phi) + ">@" + format_tuple(x, phi.source());
}

struct UniversalFamily {
  Catalog catalog;
  FiberTheory theory = FiberTheory::RationalVector;
  std::size_t max_arity = 1;
  std::vector<std::shared_ptr<const StrictStructure>> structures;  // per variety
  std::vector<std::vector<IsoTable>> comparisons;                  // per map: Y(phi)[n-1][code]

  const StrictStructure& over(const Variety& X) const { return *structures.at(catalog.variety_index(X)); }
};

/// Y(phi) for the commutative family: identity on points, extended through
/// the structure maps.
inline UniversalFamily commutative_family(std::size_t dim, Catalog catalog, std::size_t max_arity,
                                          FiberTheory theory = FiberTheory::RationalVector) {
  UniversalFamily F{std::move(catalog), theory, max_arity, {}, {}};
  for (const auto& X : F.catalog.varieties)
    F.structures.push_back(std::make_shared<const StrictStructure>(commutative_structure(X, dim, max_arity, theory)));
  for (const auto& phi : F.catalog.maps) {
    auto source = F.structures[F.catalog.variety_index(phi.source())];
    auto target = std::make_shared<const StrictStructure>(pullback_strict(phi, F.over(phi.target())));
    auto Y = extend_from_points(source, target, [&](std::size_t i) { return Iso::identity(source->fiber(Tuple{i})); });
    F.comparisons.push_back(std::move(Y.maps));
  }
  return F;
}

enum class PullbackMode { Strict, Naive };

namespace detail {

struct PulledBack {
  std::shared_ptr<const StrictStructure> structure;
  Provenance provenance;
  std::function<bool(const Tuple&)> copied;  // fiber is a copy of the pulled-back one
  ValidationReport failure;                  // naive mode: why this is not a structure
};

inline PulledBack pull_back(const EtaleMap& phi, const StrictStructure& S, PullbackMode mode) {
  if (mode == PullbackMode::Naive) {
    auto r = naive_pullback(phi, S);
    return {std::make_shared<const StrictStructure>(std::move(r.candidate)), std::move(r.provenance),
            [](const Tuple&) { return true; }, std::move(r.report)};
  }
  auto r = pullback_strict_traced(phi, S);
  auto atlas = std::make_shared<const Atlas>(std::move(r.atlas));
  return {std::make_shared<const StrictStructure>(std::move(r.structure)), std::move(r.provenance),
          [atlas](const Tuple& x) { return !atlas->chart_at(x); }, {}};
}

/// Rewrites "map@x" keys of a morphism check into comparison keys of phi.
inline void retag(ValidationReport& r, const EtaleMap& phi, const std::string& context, ValidationReport& into) {
  const std::string prefix = "map@(";
  for (auto v : r.records()) {
    for (auto& key : v.involves)
      if (key.rfind(prefix, 0) == 0 && key.back() == ')') {
        Tuple x;
        std::istringstream labels(key.substr(prefix.size(), key.size() - prefix.size() - 1));
        for (std::string l; std::getline(labels, l, ',');) x.push_back(phi.source().index_of(l));
        key = comparison_key(phi, x);
      }
    if (v.context.empty()) v.context = context;
    into.add(std::move(v));
  }
}

}  // namespace detail

/// Every Y(phi) is a morphism onto the pullback, and for composable phi, psi:
/// c . Y(psi phi) = phi^*Y(psi) . Y(phi), c the comparison of iterated and
/// direct pullbacks. In naive mode the naive pullback replaces the strict one.
inline ValidationReport check_universal(const UniversalFamily& F, PullbackMode mode = PullbackMode::Strict) {
  ValidationReport report;
  const auto& cat = F.catalog;
  std::vector<detail::PulledBack> pulled;
  std::vector<std::optional<StrictMorphism>> Y(cat.maps.size());
  for (std::size_t i = 0; i < cat.maps.size(); ++i) {
    const auto& phi = cat.maps[i];
    const auto name = map_name(phi);
    pulled.push_back(detail::pull_back(phi, F.over(phi.target()), mode));
    if (!pulled[i].failure.empty()) {
      report.merge(pulled[i].failure, name);
      continue;
    }
    auto source = F.structures[cat.variety_index(phi.source())];
    StrictMorphism m{source, pulled[i].structure, F.comparisons.at(i)};
    auto r = check_morphism(m);
    detail::retag(r, phi, name, report);
    if (r.empty()) Y[i] = std::move(m);
  }

  for (std::size_t i = 0; i < cat.maps.size(); ++i)
    for (std::size_t j = 0; j < cat.maps.size(); ++j) {
      const auto& phi = cat.maps[i];
      const auto& psi = cat.maps[j];
      if (!(phi.target() == psi.source())) continue;
      auto l = cat.map_index(then(phi, psi));
      const auto context = map_name(psi) + " . " + map_name(phi);
      if (!l) {
        report.add({"catalog", {}, {}, "composite missing from the catalog", context, {}});
        continue;
      }
      if (!Y[i] || !Y[j] || !Y[*l]) continue;  // already reported

      auto outer = detail::pull_back(phi, *pulled[j].structure, mode);
      if (!outer.failure.empty()) {
        report.merge(outer.failure, context);
        continue;
      }
      auto c = compare_by_provenance(pulled[*l].structure, pulled[*l].provenance, outer.structure,
                                     outer.provenance, pulled[j].provenance);
      if (!c.report.empty()) {
        report.merge(c.report, context);
        continue;
      }

      const auto& Yj = *Y[j];
      std::optional<StrictMorphism> pulled_Yj;
      try {
        pulled_Yj = glue_morphism(
            [&](const Tuple& x) -> const Iso* {
              for (std::size_t a = 0; a < x.size(); ++a)
                for (std::size_t b = a + 1; b < x.size(); ++b)
                  if (x[a] != x[b] && phi(x[a]) == phi(x[b])) return nullptr;
              return Yj.at(phi.apply(x));
            },
            pulled[i].structure, outer.structure,
            [&](const Tuple& x) { return pulled[i].copied(x) && outer.copied(x); });
      } catch (const ValidationError& e) {
        for (auto v : e.report().records()) {
          Tuple x;
          for (const auto& lab : v.point) x.push_back(phi.source().index_of(lab));
          v.involves = {comparison_key(psi, phi.apply(x))};
          v.context = context;
          report.add(std::move(v));
        }
        continue;
      }

      const auto& X = phi.source();
      for (std::size_t n = 1; n <= F.max_arity; ++n)
        for (std::size_t code = 0; code < power(X.size(), n); ++code) {
          auto x = decode(code, n, X.size());
          auto lhs = detail::try_compose(*c.comparison.at(x), *Y[*l]->at(x));
          auto rhs = detail::try_compose(*pulled_Yj->at(x), *Y[i]->at(x));
          if (lhs && rhs && *lhs == *rhs) continue;
          report.add({"composition", {}, labels_of(x, X), "Y(psi phi) differs from phi^*Y(psi) . Y(phi)", context,
                      {comparison_key(then(phi, psi), x), comparison_key(phi, x), comparison_key(psi, phi.apply(x))}});
        }
    }
  report.sort();
  return report;
}

}  // namespace fact
