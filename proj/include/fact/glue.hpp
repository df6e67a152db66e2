#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fact/laws.hpp"

namespace fact {

/// A chart of X^n: nullopt is the F-chart, otherwise the U-chart of a
/// canonical surjection with at least two blocks.
using Chart = std::optional<Surjection>;

inline std::string chart_name(const Chart& c) { return c ? "U" + c->to_string() : "F"; }

enum class ChartPreference { PreferF, PreferU };

/// How a glued nu_alpha(p) was obtained.
struct NuRoute {
  enum class Kind { Identity, Direct, Routed };
  Surjection alpha;
  Tuple point;
  Kind kind;
  Chart source_chart;  // selected chart at p
  Chart target_chart;  // selected chart at D(alpha) p
};

struct Atlas {
  ChartPreference preference = ChartPreference::PreferF;
  std::vector<Locus> hereditary;             // F*(n), where the F-chart lives
  std::vector<std::vector<Chart>> selected;  // [n-1][code]
  std::vector<NuRoute> nu_routes;

  bool in_f_chart(const Tuple& x) const { return hereditary.at(x.size() - 1).contains(x); }

  const Chart& chart_at(const Tuple& x) const {
    return selected.at(x.size() - 1).at(encode(x, hereditary.front().variety_size()));
  }

  bool contains(const Chart& c, const Tuple& x) const {
    return c ? c->source_arity() == x.size() && c->target_arity() >= 2 && in_U(*c, x) : in_f_chart(x);
  }

  /// Every chart containing x, F-chart first.
  std::vector<Chart> charts_at(const Tuple& x) const {
    std::vector<Chart> out;
    if (in_f_chart(x)) out.emplace_back(std::nullopt);
    if (x.size() >= 2)
      for (const auto& a : enumerate_surjections(IndexSet(x.size()), 2))
        if (in_U(a, x)) out.emplace_back(a);
    return out;
  }
};

struct GlueResult {
  StrictStructure structure;
  Atlas atlas;
};

/// F*(n): points of F(n) = cap_alpha F(alpha) whose restrictions to the blocks
/// of every chart containing them lie in F* again. On F* the glued fibers are
/// the given ones.
inline std::vector<Locus> hereditary_locus(const WeakStructure& Z) {
  std::vector<Locus> out;
  const auto k = Z.k();
  for (std::size_t n = 1; n <= Z.max_arity; ++n) {
    Locus F = Z.W(n);
    for (const auto& a : surjections_from(n)) F = F.intersect(Z.F(a));
    out.push_back(Locus::where(k, n, [&](const Tuple& x) {
      if (!F.contains(x)) return false;
      if (n == 1) return true;
      for (const auto& a : enumerate_surjections(IndexSet(n), 2)) {
        if (!in_U(a, x)) continue;
        for (const auto& b : blocks(a)) {
          auto y = restrict_tuple(x, b);
          if (!out[y.size() - 1].contains(y)) return false;
        }
      }
      return true;
    }));
  }
  return out;
}

namespace detail {

/// From the tensor of Y(x|I_j cap I'_k), factors in lexicographic (j, k)
/// order, to the chart of `outer` (blocks I_j).
inline Iso collapse_to(const StructureData& Y, const Surjection& outer, const Surjection& inner, const Tuple& x) {
  std::vector<Iso> parts;
  for (const auto& b : blocks(outer)) {
    auto y = restrict_tuple(x, b);
    auto f = d_any(Y, restrict(inner, b), y);
    if (!f) throw DomainError("transition: no glued d at " + format_tuple(y, Y.variety));
    parts.push_back(std::move(*f));
  }
  return tensor_iso(parts, Y.theory);
}

inline std::vector<std::string> collapse_keys(const StructureData& Y, const Surjection& outer,
                                              const Surjection& inner, const Tuple& x) {
  std::vector<std::string> keys;
  for (const auto& b : blocks(outer)) {
    auto r = restrict(inner, b);
    if (r.target_arity() < 2) continue;
    auto c = canonicalize(r).surjection;
    keys.push_back(datum_key("d", &c, restrict_tuple(x, b), Y.variety));
  }
  return keys;
}

}  // namespace detail

/// phi_{alpha,beta}(x) between U-charts, built from the glued lower-arity d:
/// (prod_k d_{alpha_k}(x|I_k)) . reorder . (prod_j d_{beta_j}(x|I_j))^-1.
inline Iso transition(const StructureData& Y, const Surjection& alpha, const Surjection& beta, const Tuple& x) {
  if (!in_U(alpha, x) || !in_U(beta, x))
    throw DomainError("transition: " + format_tuple(x, Y.variety) + " lies outside U" + alpha.to_string() +
                      " cap U" + beta.to_string());
  auto st = star(alpha, beta);
  std::vector<Fiber> pieces;
  for (const auto& b : blocks(st.star_map)) pieces.push_back(Y.fiber(restrict_tuple(x, b)));
  if (alpha == beta) return Iso::identity(tensor(pieces, Y.theory));
  std::vector<std::size_t> order(st.pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::pair{st.pairs[a].second, st.pairs[a].first} < std::pair{st.pairs[b].second, st.pairs[b].first};
  });
  auto swap = reorder_iso(Y.theory, std::span<const Fiber>(pieces), order);
  auto to_alpha = detail::collapse_to(Y, alpha, beta, x);
  auto to_beta = detail::collapse_to(Y, beta, alpha, x);
  return compose_iso(to_beta, compose_iso(swap, invert_iso(to_alpha)));
}

/// phi_{alpha,0}(x) = d~_alpha(x).
inline Iso transition_to_f(const WeakStructure& Z, const Surjection& alpha, const Tuple& x) {
  if (!in_U(alpha, x) || !Z.F(alpha).contains(x))
    throw DomainError("transition_to_f: " + format_tuple(x, Z.variety) + " outside F cap U" + alpha.to_string());
  return Z.d_at(alpha, x);
}

/// Transition between any two charts containing x. Needs the glued structure
/// below arity |x|.
inline Iso transition(const GlueResult& g, const WeakStructure& Z, const Chart& a, const Chart& b, const Tuple& x) {
  if (!g.atlas.contains(a, x) || !g.atlas.contains(b, x))
    throw DomainError("transition: " + format_tuple(x, Z.variety) + " not in " + chart_name(a) + " cap " + chart_name(b));
  if (!a && !b) return Iso::identity(Z.fiber(x));
  if (!a) return invert_iso(transition_to_f(Z, *b, x));
  if (!b) return transition_to_f(Z, *a, x);
  return transition(g.structure, *a, *b, x);
}

inline std::vector<std::string> transition_keys(const GlueResult& g, const Chart& a, const Chart& b, const Tuple& x) {
  const auto& X = g.structure.variety;
  if (!a && !b) return {};
  if (!a) return {datum_key("d", &*b, x, X)};
  if (!b) return {datum_key("d", &*a, x, X)};
  if (*a == *b) return {};
  auto keys = detail::collapse_keys(g.structure, *a, *b, x);
  auto more = detail::collapse_keys(g.structure, *b, *a, x);
  keys.insert(keys.end(), more.begin(), more.end());
  return keys;
}

/// phi_{b,c} . phi_{a,b} = phi_{a,c} for every ordered triple of charts at
/// every point of X^n.
inline ValidationReport verify_cocycle(const GlueResult& g, const WeakStructure& Z, std::size_t n) {
  ValidationReport report;
  const auto k = Z.k();
  for (std::size_t c = 0; c < Z.space_size(n); ++c) {
    auto x = decode(c, n, k);
    auto charts = g.atlas.charts_at(x);
    const auto m = charts.size();
    if (m < 2) continue;
    std::vector<std::vector<std::optional<Iso>>> phi(m, std::vector<std::optional<Iso>>(m));
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) phi[a][b] = transition(g, Z, charts[a], charts[b], x);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t e = 0; e < m; ++e) {
          if (a == b || b == e) continue;  // phi_{a,a} = id
          auto lhs = detail::try_compose(*phi[b][e], *phi[a][b]);
          if (lhs && *lhs == *phi[a][e]) continue;
          std::vector<Surjection> names;
          for (auto i : {a, b, e})
            if (charts[i]) names.push_back(*charts[i]);
          std::vector<std::string> keys;
          for (auto [p, q] : {std::pair{a, b}, std::pair{b, e}, std::pair{a, e}}) {
            auto more = transition_keys(g, charts[p], charts[q], x);
            keys.insert(keys.end(), more.begin(), more.end());
          }
          std::sort(keys.begin(), keys.end());
          keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
          report.add({"cocycle", std::move(names), labels_of(x, Z.variety),
                      chart_name(charts[a]) + " -> " + chart_name(charts[b]) + " -> " + chart_name(charts[e]) +
                          " differs from the direct transition",
                      {}, std::move(keys)});
        }
  }
  report.sort();
  return report;
}

namespace detail {

inline Chart select_chart(const Atlas& atlas, const Tuple& x) {
  if (is_constant(x)) return std::nullopt;
  if (atlas.preference == ChartPreference::PreferF && atlas.in_f_chart(x)) return std::nullopt;
  return kernel_partition(x);
}

inline Iso glued_nu(GlueResult& g, const WeakStructure& Z, const Surjection& alpha, const Tuple& p) {
  const auto& Y = g.structure;
  auto x = diagonal_embed(alpha, p);
  const auto& ps = g.atlas.chart_at(p);
  const auto& xs = g.atlas.chart_at(x);
  auto record = [&](NuRoute::Kind kind) { g.atlas.nu_routes.push_back({alpha, p, kind, ps, xs}); };
  if (alpha.is_bijection()) {
    record(NuRoute::Kind::Identity);
    return Iso::identity(Y.fiber(p));
  }
  if (is_constant(p) || (!ps && !xs && Z.R(alpha).contains(p))) {
    record(NuRoute::Kind::Direct);
    return Z.nu_at(alpha, p);
  }
  // Through the kernel charts: Y(p) -> prod_B Y(c_B) -> prod_B Y(x|alpha^-1 B) -> Y(x).
  auto kappa = kernel_partition(p);
  auto kappa_x = compose(alpha, kappa);
  auto outer = blocks(kappa);
  auto inner = blocks(kappa_x);
  std::vector<Iso> parts;
  for (std::size_t b = 0; b < outer.size(); ++b)
    parts.push_back(Y.nu_at(restrict(alpha, inner[b]), restrict_tuple(p, outer[b])));
  auto into = transition(g, Z, ps, kappa, p);
  auto out = transition(g, Z, kappa_x, xs, x);
  record(NuRoute::Kind::Routed);
  return compose_iso(out, compose_iso(tensor_iso(parts, Y.theory), into));
}

}  // namespace detail

/// Strict structure from weak data, by ascending arity. Throws ValidationError
/// if the input is invalid or a cocycle check fails.
inline GlueResult glue_with_atlas(const WeakStructure& Z, ChartPreference preference = ChartPreference::PreferF) {
  if (auto r = check_weak(Z); !r.empty()) throw ValidationError("glue: invalid weak structure", r);
  GlueResult g{StrictStructure(Z.variety, Z.theory, Z.max_arity), Atlas{preference, hereditary_locus(Z), {}, {}}};
  auto& Y = g.structure;
  const auto k = Z.k();
  for (std::size_t n = 1; n <= Z.max_arity; ++n) {
    if (auto cover = cover_check(g.atlas.hereditary[n - 1], n); !cover.covered)
      throw DomainError("glue: charts do not cover X^" + std::to_string(n));
    if (auto r = verify_cocycle(g, Z, n); !r.empty()) throw ValidationError("glue: cocycle failure", r);

    auto& sel = g.atlas.selected.emplace_back(Y.space_size(n));
    for (std::size_t c = 0; c < sel.size(); ++c) {
      auto x = decode(c, n, k);
      sel[c] = detail::select_chart(g.atlas, x);
      if (!sel[c]) {
        Y.fibers[n - 1][c] = Z.fiber(x);
      } else {
        std::vector<Fiber> parts;
        for (const auto& b : blocks(*sel[c])) parts.push_back(Y.fiber(restrict_tuple(x, b)));
        Y.fibers[n - 1][c] = tensor(parts, Y.theory);
      }
    }

    for (const auto& a : surjections_from(n)) {
      for (std::size_t c = 0; c < Y.space_size(n); ++c) {
        auto x = decode(c, n, k);
        if (!in_U(a, x)) continue;
        if (a.target_arity() == 1) Y.set_d(a, x, Iso::identity(Y.fiber(x)));
        else Y.set_d(a, x, transition(g, Z, a, sel[c], x));
      }
      for (std::size_t c = 0; c < Y.space_size(a.target_arity()); ++c) {
        auto p = decode(c, a.target_arity(), k);
        Y.set_nu(a, p, detail::glued_nu(g, Z, a, p));
      }
    }
  }
  return g;
}

inline StrictStructure glue(const WeakStructure& Z) { return glue_with_atlas(Z).structure; }

/// The morphism S1 -> S2 determined by its arity-1 maps: on constant tuples
/// conjugate by nu of the collapse, elsewhere by d of the kernel partition.
inline StrictMorphism extend_from_points(std::shared_ptr<const StrictStructure> S1,
                                         std::shared_ptr<const StrictStructure> S2,
                                         const std::function<Iso(std::size_t)>& at_point) {
  if (!(S1->variety == S2->variety) || S1->theory != S2->theory || S1->max_arity != S2->max_arity)
    throw DomainError("extend_from_points: structures over different bases");
  StrictMorphism m{S1, S2, empty_maps(*S1)};
  const auto k = S1->k();
  for (std::size_t n = 1; n <= S1->max_arity; ++n)
    for (std::size_t c = 0; c < S1->space_size(n); ++c) {
      auto x = decode(c, n, k);
      if (n == 1) {
        m.set(x, at_point(x[0]));
      } else if (is_constant(x)) {
        auto col = Surjection::collapse(n);
        Tuple pt{x[0]};
        m.set(x, compose_iso(S2->nu_at(col, pt), compose_iso(*m.at(pt), invert_iso(S1->nu_at(col, pt)))));
      } else {
        auto kappa = kernel_partition(x);
        std::vector<Iso> parts;
        for (const auto& b : blocks(kappa)) parts.push_back(*m.at(restrict_tuple(x, b)));
        m.set(x, compose_iso(S2->d_at(kappa, x),
                             compose_iso(tensor_iso(parts, S1->theory), invert_iso(S1->d_at(kappa, x)))));
      }
    }
  return m;
}

/// Glue(Weak(S)) -> S, identity at arity 1.
inline StrictMorphism canonical_comparison(std::shared_ptr<const StrictStructure> S,
                                           std::optional<WeakLoci> loci = std::nullopt) {
  auto G = std::make_shared<const StrictStructure>(glue(weak_forget(*S, std::move(loci))));
  return extend_from_points(G, S, [&](std::size_t i) { return Iso::identity(S->fiber(Tuple{i})); });
}

/// Morphism between glued structures built from the arity-1 values of
/// `given`. Wherever `compare_at(x)` holds and `given` has a value, the two
/// must agree; the result must pass check_morphism. Throws ValidationError
/// otherwise.
inline StrictMorphism glue_morphism(const std::function<const Iso*(const Tuple&)>& given,
                                    std::shared_ptr<const StrictStructure> S1, std::shared_ptr<const StrictStructure> S2,
                                    const std::function<bool(const Tuple&)>& compare_at) {
  auto out = extend_from_points(S1, S2, [&](std::size_t i) {
    auto f = given(Tuple{i});
    if (!f) throw DomainError("glue_morphism: no map at arity 1");
    return *f;
  });
  ValidationReport report;
  const auto k = S1->k();
  for (std::size_t n = 2; n <= S1->max_arity; ++n)
    for (std::size_t c = 0; c < S1->space_size(n); ++c) {
      auto x = decode(c, n, k);
      auto f = given(x);
      if (!f || !compare_at(x)) continue;
      if (!(*f == *out.at(x)))
        report.add({"morphism_extension", {kernel_partition(x)}, labels_of(x, S1->variety),
                    "given map differs from its extension through the charts", {},
                    {datum_key("map", nullptr, x, S1->variety)}});
    }
  if (!report.empty()) throw ValidationError("glue_morphism: inconsistent extension", report);
  if (auto r = check_morphism(out); !r.empty()) throw ValidationError("glue_morphism: not a morphism", r);
  return out;
}

/// Glue(m) for a weak morphism, compared with m wherever both glued fibers
/// are the given ones.
inline StrictMorphism glue_morphism(const WeakMorphism& m) {
  auto G1 = glue_with_atlas(*m.source);
  auto G2 = glue_with_atlas(*m.target);
  auto S1 = std::make_shared<const StrictStructure>(std::move(G1.structure));
  auto S2 = std::make_shared<const StrictStructure>(std::move(G2.structure));
  return glue_morphism([&](const Tuple& x) { return m.at(x); }, S1, S2,
                       [&](const Tuple& x) { return !G1.atlas.chart_at(x) && !G2.atlas.chart_at(x); });
}

}  // namespace fact
