#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fact/structure.hpp"

namespace fact {

namespace detail {

inline std::optional<Iso> try_compose(const Iso& f, const Iso& g) {
  if (f.theory() != g.theory() || f.dim() != g.dim()) return std::nullopt;
  return compose_iso(f, g);
}

/// Data of a composable pair beta: I ->> K, gamma: K ->> J shared by the
/// three composition laws.
struct ComposablePair {
  Surjection beta;
  Surjection gamma;
  Surjection alpha;                    // gamma . beta
  std::vector<Block> outer_blocks;     // I_j, blocks of alpha
  std::vector<Block> middle_blocks;    // K_j, blocks of gamma
  std::vector<Block> inner_blocks;     // I_k, blocks of beta
  std::vector<Surjection> restricted;  // beta_j : I_j ->> K_j
  std::vector<std::size_t> regroup;    // K order -> (j, k in K_j) order
};

inline std::vector<ComposablePair> composable_pairs(std::size_t N) {
  std::vector<ComposablePair> out;
  for (std::size_t n = 1; n <= N; ++n)
    for (const auto& beta : surjections_from(n))
      for (const auto& gamma : surjections_from(beta.target_arity())) {
        ComposablePair p{beta, gamma, compose(beta, gamma), {}, {}, {}, {}, {}};
        p.outer_blocks = blocks(p.alpha);
        p.middle_blocks = blocks(gamma);
        p.inner_blocks = blocks(beta);
        for (const auto& b : p.outer_blocks) p.restricted.push_back(restrict(beta, b));
        for (const auto& kb : p.middle_blocks)
          for (auto k : kb) p.regroup.push_back(k);
        out.push_back(std::move(p));
      }
  return out;
}

inline std::vector<std::string> keys_for(const std::string& kind, const std::vector<Surjection>& ss,
                                         const std::vector<Tuple>& xs, const Variety& X) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ss.size(); ++i) out.push_back(datum_key(kind, &ss[i], xs[i], X));
  return out;
}

/// nu_{gamma.beta}(q) = nu_beta(D(gamma) q) . nu_gamma(q).
inline void check_nu_associativity(const StructureData& S, const std::vector<ComposablePair>& pairs,
                                   ValidationReport& report) {
  const auto k = S.k();
  for (const auto& P : pairs) {
    const auto m = P.alpha.target_arity();
    for (std::size_t c = 0; c < S.space_size(m); ++c) {
      auto q = decode(c, m, k);
      auto mid = diagonal_embed(P.gamma, q);
      auto A = S.nu_ptr(P.alpha, q);
      auto B = S.nu_ptr(P.beta, mid);
      auto C = S.nu_ptr(P.gamma, q);
      if (!A || !B || !C) continue;
      auto rhs = try_compose(*B, *C);
      if (!rhs || !(*rhs == *A)) {
        report.add({"nu_associativity", {P.beta, P.gamma}, labels_of(q, S.variety),
                    rhs ? "nu of the composite differs from the composite of nu" : "shapes do not compose",
                    {},
                    {datum_key("nu", &P.alpha, q, S.variety), datum_key("nu", &P.beta, mid, S.variety),
                     datum_key("nu", &P.gamma, q, S.variety)}});
      }
    }
  }
}

/// d_beta = d_alpha . prod_j d_{beta_j} (after regrouping factors) on U(beta).
inline void check_d_composition(const StructureData& S, const std::vector<ComposablePair>& pairs,
                                ValidationReport& report) {
  const auto k = S.k();
  for (const auto& P : pairs) {
    const auto n = P.beta.source_arity();
    for (std::size_t c = 0; c < S.space_size(n); ++c) {
      auto x = decode(c, n, k);
      if (!in_U(P.beta, x)) continue;
      auto lhs = S.d_ptr(P.beta, x);
      auto outer = S.d_ptr(P.alpha, x);
      if (!lhs || !outer) continue;
      std::vector<Iso> parts;
      std::vector<std::string> involves{datum_key("d", &P.beta, x, S.variety), datum_key("d", &P.alpha, x, S.variety)};
      bool ok = true;
      for (std::size_t j = 0; j < P.outer_blocks.size() && ok; ++j) {
        auto xj = restrict_tuple(x, P.outer_blocks[j]);
        auto f = S.d_ptr(P.restricted[j], xj);
        if (!f) ok = false;
        else {
          parts.push_back(*f);
          involves.push_back(datum_key("d", &P.restricted[j], xj, S.variety));
        }
      }
      std::vector<Fiber> factors;
      for (const auto& b : P.inner_blocks) {
        auto f = S.fiber_ptr(restrict_tuple(x, b));
        if (!f) ok = false;
        else factors.push_back(*f);
      }
      if (!ok) continue;
      auto regroup = reorder_iso(S.theory, std::span<const Fiber>(factors), P.regroup);
      auto inner = try_compose(tensor_iso(parts, S.theory), regroup);
      auto rhs = inner ? try_compose(*outer, *inner) : std::nullopt;
      if (!rhs || !(*rhs == *lhs)) {
        report.add({"d_composition", {P.beta, P.gamma}, labels_of(x, S.variety),
                    rhs ? "d_beta differs from d_alpha . prod d_beta_j" : "shapes do not compose", {},
                    std::move(involves)});
      }
    }
  }
}

/// d_{gamma.beta}(D(beta) x) . prod_j nu_{beta_j}(x|K_j) = nu_beta(x) . d_gamma(x)
/// for x in U(gamma).
inline void check_mixed_square(const StructureData& S, const std::vector<ComposablePair>& pairs,
                               ValidationReport& report) {
  const auto k = S.k();
  for (const auto& P : pairs) {
    const auto kk = P.gamma.source_arity();
    if (P.gamma.target_arity() == 1 && P.beta.is_bijection()) continue;  // both sides are nu_id . d_collapse
    for (std::size_t c = 0; c < S.space_size(kk); ++c) {
      auto x = decode(c, kk, k);
      if (!in_U(P.gamma, x)) continue;
      auto y = diagonal_embed(P.beta, x);
      auto dy = S.d_ptr(P.alpha, y);
      auto nx = S.nu_ptr(P.beta, x);
      auto dx = S.d_ptr(P.gamma, x);
      if (!dy || !nx || !dx) continue;
      std::vector<std::string> involves{datum_key("d", &P.alpha, y, S.variety), datum_key("nu", &P.beta, x, S.variety),
                                        datum_key("d", &P.gamma, x, S.variety)};
      std::vector<Iso> parts;
      bool ok = true;
      for (std::size_t j = 0; j < P.middle_blocks.size() && ok; ++j) {
        auto xj = restrict_tuple(x, P.middle_blocks[j]);
        auto f = S.nu_ptr(P.restricted[j], xj);
        if (!f) ok = false;
        else {
          parts.push_back(*f);
          involves.push_back(datum_key("nu", &P.restricted[j], xj, S.variety));
        }
      }
      if (!ok) continue;
      auto lhs = try_compose(*dy, tensor_iso(parts, S.theory));
      auto rhs = try_compose(*nx, *dx);
      if (!lhs || !rhs || !(*lhs == *rhs)) {
        report.add({"mixed_square", {P.beta, P.gamma}, labels_of(x, S.variety),
                    lhs && rhs ? "factorization and Ran isomorphisms do not commute" : "shapes do not compose",
                    {}, std::move(involves)});
      }
    }
  }
}

inline void check_laws(const StructureData& S, ValidationReport& report) {
  auto pairs = composable_pairs(S.max_arity);
  check_nu_associativity(S, pairs, report);
  check_d_composition(S, pairs, report);
  check_mixed_square(S, pairs, report);
}

/// Flags data stored under surjections the structure cannot carry.
inline void check_keys(const StructureData& S, ValidationReport& report) {
  for (const auto* m : {&S.nu, &S.d})
    for (const auto& [a, t] : *m) {
      const auto arity = (m == &S.nu) ? a.target_arity() : a.source_arity();
      if (!a.is_canonical() || a.source_arity() > S.max_arity || t.size() != S.space_size(arity))
        report.add({"bad_key", {a}, {}, "data keyed by a non-canonical or out-of-range surjection", {}, {}});
    }
}

/// Shape of nu_alpha(p) and d_alpha(x) against the fibers they connect.
/// `require` decides where an entry must be present.
inline void check_shapes(const StructureData& S, ValidationReport& report,
                         const std::function<bool(const Surjection&, const Tuple&)>& nu_required,
                         const std::function<bool(const Surjection&, const Tuple&)>& d_required) {
  const auto k = S.k();
  for (std::size_t n = 1; n <= S.max_arity; ++n)
    for (const auto& a : surjections_from(n)) {
      const auto m = a.target_arity();
      for (std::size_t c = 0; c < S.space_size(m); ++c) {
        auto p = decode(c, m, k);
        auto f = S.nu_ptr(a, p);
        auto key = datum_key("nu", &a, p, S.variety);
        bool req = nu_required(a, p);
        if (!f) {
          if (req) report.add({"missing_nu", {a}, labels_of(p, S.variety), "no Ran isomorphism", {}, {key}});
          continue;
        }
        if (!req) {
          report.add({"unexpected_nu", {a}, labels_of(p, S.variety), "Ran isomorphism outside its locus", {}, {key}});
          continue;
        }
        auto src = S.fiber_ptr(p);
        auto tgt = S.fiber_ptr(diagonal_embed(a, p));
        if (!src || !tgt || !fits(*f, *src, *tgt))
          report.add({"shape_nu", {a}, labels_of(p, S.variety), "Ran isomorphism does not fit its fibers", {}, {key}});
      }
      for (std::size_t c = 0; c < S.space_size(n); ++c) {
        auto x = decode(c, n, k);
        auto f = S.d_ptr(a, x);
        auto key = datum_key("d", &a, x, S.variety);
        bool req = d_required(a, x);
        if (!f) {
          if (req) report.add({"missing_d", {a}, labels_of(x, S.variety), "no factorization isomorphism", {}, {key}});
          continue;
        }
        if (!req) {
          report.add({"unexpected_d", {a}, labels_of(x, S.variety), "factorization isomorphism outside its locus", {}, {key}});
          continue;
        }
        auto src = S.block_tensor(a, x);
        auto tgt = S.fiber_ptr(x);
        if (!src || !tgt || !fits(*f, *src, *tgt)) {
          std::string detail = "factorization isomorphism does not fit its fibers";
          if (src && tgt)
            detail += ": required dim " + std::to_string(src->dim()) + " vs provided " + std::to_string(tgt->dim());
          report.add({"shape_d", {a}, labels_of(x, S.variety), detail, {}, {key}});
        }
      }
    }
}

inline void check_fiber_theory(const StructureData& S, ValidationReport& report,
                               const std::function<bool(const Tuple&)>& required) {
  for (std::size_t n = 1; n <= S.max_arity; ++n)
    for (std::size_t c = 0; c < S.space_size(n); ++c) {
      auto x = S.point(n, c);
      const auto& f = S.fibers[n - 1][c];
      auto key = datum_key("fiber", nullptr, x, S.variety);
      if (!f) {
        if (required(x)) report.add({"missing_fiber", {}, labels_of(x, S.variety), "no fiber", {}, {key}});
      } else if (!required(x)) {
        report.add({"unexpected_fiber", {}, labels_of(x, S.variety), "fiber outside W(n)", {}, {key}});
      } else if (f->theory() != S.theory) {
        report.add({"theory_mismatch", {}, labels_of(x, S.variety), "fiber from another theory", {}, {key}});
      }
    }
}

}  // namespace detail

/// Every Ran/factorization axiom of a strict structure, pointwise. The report
/// is empty iff the structure is valid.
inline ValidationReport check_strict(const StrictStructure& S) {
  ValidationReport report;
  detail::check_keys(S, report);
  detail::check_fiber_theory(S, report, [](const Tuple&) { return true; });
  detail::check_shapes(
      S, report, [](const Surjection&, const Tuple&) { return true; },
      [](const Surjection& a, const Tuple& x) { return in_U(a, x); });
  if (report.empty()) detail::check_laws(S, report);
  report.sort();
  return report;
}

/// Locus conditions plus every law instance whose data all lie in the loci.
inline ValidationReport check_weak(const WeakStructure& Z) {
  ValidationReport report = check_loci(Z.loci, Z.k(), Z.max_arity);
  if (!report.empty()) {
    report.sort();
    return report;
  }
  detail::check_keys(Z, report);
  detail::check_fiber_theory(Z, report, [&](const Tuple& x) { return Z.W(x.size()).contains(x); });
  detail::check_shapes(
      Z, report, [&](const Surjection& a, const Tuple& p) { return Z.R(a).contains(p); },
      [&](const Surjection& a, const Tuple& x) { return Z.F(a).contains(x) && in_U(a, x); });
  if (report.empty()) detail::check_laws(Z, report);
  report.sort();
  return report;
}

namespace detail {

using MapAt = std::function<const Iso*(const Tuple&)>;

inline void check_morphism_laws(const StructureData& S, const StructureData& T, const MapAt& map_at,
                                ValidationReport& report) {
  const auto k = S.k();
  for (std::size_t n = 1; n <= S.max_arity; ++n)
    for (const auto& a : surjections_from(n)) {
      const auto m = a.target_arity();
      for (std::size_t c = 0; c < S.space_size(m); ++c) {
        auto p = decode(c, m, k);
        auto x = diagonal_embed(a, p);
        auto fs = S.nu_ptr(a, p);
        auto ft = T.nu_ptr(a, p);
        auto mp = map_at(p);
        auto mx = map_at(x);
        if (!fs || !ft || !mp || !mx) continue;
        auto lhs = try_compose(*mx, *fs);
        auto rhs = try_compose(*ft, *mp);
        if (!lhs || !rhs || !(*lhs == *rhs))
          report.add({"morphism_nu", {a}, labels_of(p, S.variety), "morphism does not commute with nu", {},
                      {datum_key("map", nullptr, p, S.variety), datum_key("map", nullptr, x, S.variety),
                       datum_key("nu", &a, p, S.variety)}});
      }
      if (m == 1) continue;  // d of a one-block surjection is the identity on both sides
      const auto bl = blocks(a);
      for (std::size_t c = 0; c < S.space_size(n); ++c) {
        auto x = decode(c, n, k);
        if (!in_U(a, x)) continue;
        auto ds = S.d_ptr(a, x);
        auto dt = T.d_ptr(a, x);
        auto mx = map_at(x);
        if (!ds || !dt || !mx) continue;
        std::vector<Iso> parts;
        std::vector<std::string> involves{datum_key("map", nullptr, x, S.variety), datum_key("d", &a, x, S.variety)};
        bool ok = true;
        for (const auto& b : bl) {
          auto xj = restrict_tuple(x, b);
          auto mj = map_at(xj);
          if (!mj) {
            ok = false;
            break;
          }
          parts.push_back(*mj);
          involves.push_back(datum_key("map", nullptr, xj, S.variety));
        }
        if (!ok) continue;
        auto lhs = try_compose(*mx, *ds);
        auto rhs = try_compose(*dt, tensor_iso(parts, S.theory));
        if (!lhs || !rhs || !(*lhs == *rhs))
          report.add({"morphism_d", {a}, labels_of(x, S.variety), "morphism does not commute with d", {},
                      std::move(involves)});
      }
    }
}

inline bool same_base(const StructureData& S, const StructureData& T, ValidationReport& report) {
  if (S.variety == T.variety && S.theory == T.theory && S.max_arity == T.max_arity) return true;
  report.add({"morphism_base", {}, {}, "source and target differ in variety, theory or max arity", {}, {}});
  return false;
}

}  // namespace detail

/// Shapes of every F_n(x) and commutation with nu and d on all of X^n.
inline ValidationReport check_morphism(const StrictMorphism& m) {
  ValidationReport report;
  const auto& S = *m.source;
  const auto& T = *m.target;
  if (!detail::same_base(S, T, report)) return report;
  bool shapes_ok = m.maps.size() == S.max_arity;
  for (std::size_t n = 1; n <= S.max_arity && shapes_ok; ++n) {
    if (m.maps[n - 1].size() != S.space_size(n)) {
      shapes_ok = false;
      break;
    }
    for (std::size_t c = 0; c < S.space_size(n); ++c) {
      auto x = S.point(n, c);
      const auto& f = m.maps[n - 1][c];
      auto fs = S.fiber_ptr(x);
      auto ft = T.fiber_ptr(x);
      if (!f || !fs || !ft || !fits(*f, *fs, *ft)) {
        std::string detail = f ? "map does not fit the fibers" : "map missing";
        if (f && fs && ft)
          detail += ": source dim " + std::to_string(fs->dim()) + ", target dim " + std::to_string(ft->dim());
        report.add({"morphism_shape", {}, labels_of(x, S.variety), detail, {},
                    {datum_key("map", nullptr, x, S.variety)}});
      }
    }
  }
  if (!shapes_ok) report.add({"morphism_shape", {}, {}, "map tables have the wrong size", {}, {}});
  if (report.empty()) detail::check_morphism_laws(S, T, [&](const Tuple& x) { return m.at(x); }, report);
  report.sort();
  return report;
}

/// Weak version: V(n) must contain the diagonal and lie in W(n) cap W'(n);
/// commutation is checked wherever every participating datum exists.
inline ValidationReport check_morphism(const WeakMorphism& m) {
  ValidationReport report;
  const auto& S = *m.source;
  const auto& T = *m.target;
  if (!detail::same_base(S, T, report)) return report;
  if (m.domain.size() != S.max_arity || m.maps.size() != S.max_arity) {
    report.add({"morphism_domain", {}, {}, "V(n) or maps missing for some arity", {}, {}});
    return report;
  }
  for (std::size_t n = 1; n <= S.max_arity; ++n) {
    const auto& V = m.domain[n - 1];
    if (V.arity() != n || V.variety_size() != S.k() || m.maps[n - 1].size() != S.space_size(n)) {
      report.add({"morphism_domain", {}, {}, "V(" + std::to_string(n) + ") lives in the wrong space", {}, {}});
      return report;
    }
    if (!V.contains_diagonal())
      report.add({"morphism_domain", {}, {}, "V(" + std::to_string(n) + ") misses a diagonal point", {}, {}});
    if (!V.subset_of(S.W(n).intersect(T.W(n))))
      report.add({"morphism_domain", {}, {}, "V(" + std::to_string(n) + ") not inside W(n) cap W'(n)", {}, {}});
    for (std::size_t c = 0; c < S.space_size(n); ++c) {
      auto x = S.point(n, c);
      const auto& f = m.maps[n - 1][c];
      if (!V.contains_code(c)) {
        if (f)
          report.add({"morphism_domain", {}, labels_of(x, S.variety), "map outside V(n)", {},
                      {datum_key("map", nullptr, x, S.variety)}});
        continue;
      }
      auto fs = S.fiber_ptr(x);
      auto ft = T.fiber_ptr(x);
      if (!f || !fs || !ft || !fits(*f, *fs, *ft))
        report.add({"morphism_shape", {}, labels_of(x, S.variety), f ? "map does not fit the fibers" : "map missing",
                    {}, {datum_key("map", nullptr, x, S.variety)}});
    }
  }
  if (report.empty()) detail::check_morphism_laws(S, T, [&](const Tuple& x) { return m.at(x); }, report);
  report.sort();
  return report;
}

/// Two weak morphisms with the same endpoints agree on V(n) cap V'(n).
inline bool agree_on_common_locus(const WeakMorphism& a, const WeakMorphism& b) {
  if (a.maps.size() != b.maps.size()) return false;
  for (std::size_t n = 1; n <= a.maps.size(); ++n) {
    auto common = a.domain[n - 1].intersect(b.domain[n - 1]);
    for (std::size_t c = 0; c < common.space_size(); ++c)
      if (common.contains_code(c) && !(*a.maps[n - 1][c] == *b.maps[n - 1][c])) return false;
  }
  return true;
}

}  // namespace fact
