#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fact/glue.hpp"

namespace fact {

/// Datum key in the pulled-back structure -> datum key it was copied from.
struct Provenance {
  std::map<std::string, std::string> source_of;

  const std::string* find(const std::string& key) const {
    auto it = source_of.find(key);
    return it == source_of.end() ? nullptr : &it->second;
  }
};

struct PullbackResult {
  WeakStructure structure;
  Provenance provenance;
};

struct StrictPullback {
  StrictStructure structure;
  Atlas atlas;
  Provenance provenance;  // fibers only; present where the glued fiber is a copy
};

struct NaivePullback {
  StrictStructure candidate;
  ValidationReport report;
  Provenance provenance;  // fibers
};

/// Pulled-back loci: W' = phi^-1 W cap V_phi, R' = W'(J) cap D(alpha)^-1 W'(I)
/// cap phi^-1 R, F' = W'(I) cap prod_j W'(I_j) cap phi^-1 F.
inline WeakLoci pullback_loci(const EtaleMap& phi, const WeakLoci& loci) {
  WeakLoci out;
  const auto k = phi.source().size();
  const auto N = loci.W.size();
  for (std::size_t n = 1; n <= N; ++n)
    out.W.push_back(preimage(phi, loci.W[n - 1]).intersect(V_I_phi(phi, IndexSet(n))));
  for (std::size_t n = 1; n <= N; ++n)
    for (const auto& a : surjections_from(n)) {
      const auto& R = loci.R.at(a);
      const auto& F = loci.F.at(a);
      out.R.emplace(a, Locus::where(k, a.target_arity(), [&](const Tuple& p) {
                      return out.W[p.size() - 1].contains(p) && out.W[n - 1].contains(diagonal_embed(a, p)) &&
                             R.contains(phi.apply(p));
                    }));
      out.F.emplace(a, Locus::where(k, n, [&](const Tuple& x) {
                      if (!out.W[n - 1].contains(x) || !F.contains(phi.apply(x))) return false;
                      for (const auto& b : blocks(a)) {
                        auto y = restrict_tuple(x, b);
                        if (!out.W[y.size() - 1].contains(y)) return false;
                      }
                      return true;
                    }));
    }
  return out;
}

namespace detail {

inline PullbackResult pullback_weak_unchecked(const EtaleMap& phi, const WeakStructure& Z) {
  if (!(phi.target() == Z.variety)) throw DomainError("pullback: map target is not the structure's variety");
  PullbackResult out{WeakStructure(phi.source(), Z.theory, Z.max_arity, pullback_loci(phi, Z.loci)), {}};
  auto& P = out.structure;
  auto& prov = out.provenance.source_of;
  const auto& X = P.variety;
  for (std::size_t n = 1; n <= P.max_arity; ++n) {
    for (const auto& x : P.W(n).members()) {
      auto y = phi.apply(x);
      P.set_fiber(x, Z.fiber(y));
      prov[datum_key("fiber", nullptr, x, X)] = datum_key("fiber", nullptr, y, Z.variety);
    }
    for (const auto& a : surjections_from(n)) {
      for (const auto& p : P.R(a).members()) {
        auto q = phi.apply(p);
        P.set_nu(a, p, Z.nu_at(a, q));
        prov[datum_key("nu", &a, p, X)] = datum_key("nu", &a, q, Z.variety);
      }
      for (const auto& x : P.F(a).members()) {
        if (!in_U(a, x)) continue;
        auto y = phi.apply(x);
        P.set_d(a, x, Z.d_at(a, y));
        prov[datum_key("d", &a, x, X)] = datum_key("d", &a, y, Z.variety);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Weak pullback: data copied from phi(x) on the pulled-back loci.
inline PullbackResult pullback_weak(const EtaleMap& phi, const WeakStructure& Z) {
  if (auto r = check_weak(Z); !r.empty()) throw ValidationError("pullback_weak: invalid weak structure", r);
  return detail::pullback_weak_unchecked(phi, Z);
}

/// glue(pullback_weak(phi, weak_forget(S))) with the fiber provenance of the
/// glued structure. The input is not re-validated here; glue validates the
/// pulled-back data.
inline StrictPullback pullback_strict_traced(const EtaleMap& phi, const StrictStructure& S) {
  auto weak = detail::pullback_weak_unchecked(phi, weak_forget(S));
  auto g = glue_with_atlas(weak.structure);
  StrictPullback out{std::move(g.structure), std::move(g.atlas), {}};
  const auto& X = out.structure.variety;
  for (std::size_t n = 1; n <= out.structure.max_arity; ++n)
    for (std::size_t c = 0; c < out.structure.space_size(n); ++c) {
      if (out.atlas.selected[n - 1][c]) continue;
      auto key = datum_key("fiber", nullptr, decode(c, n, X.size()), X);
      if (auto src = weak.provenance.find(key)) out.provenance.source_of[key] = *src;
    }
  return out;
}

inline StrictStructure pullback_strict(const EtaleMap& phi, const StrictStructure& S) {
  return pullback_strict_traced(phi, S).structure;
}

/// Fibers S(phi x), nu copied, d copied where phi x stays in U(alpha). Where it
/// does not, the basis identity is used if the dimensions agree and a
/// factorization_shape failure is reported otherwise. The laws are checked
/// only once every shape matches.
inline NaivePullback naive_pullback(const EtaleMap& phi, const StrictStructure& S) {
  if (!(phi.target() == S.variety)) throw DomainError("naive_pullback: map target is not the structure's variety");
  NaivePullback out{StrictStructure(phi.source(), S.theory, S.max_arity), {}, {}};
  auto& C = out.candidate;
  const auto k = C.k();
  for (std::size_t n = 1; n <= C.max_arity; ++n) {
    for (std::size_t c = 0; c < C.space_size(n); ++c) {
      auto x = decode(c, n, k);
      C.set_fiber(x, S.fiber(phi.apply(x)));
      out.provenance.source_of[datum_key("fiber", nullptr, x, C.variety)] =
          datum_key("fiber", nullptr, phi.apply(x), S.variety);
    }
    for (const auto& a : surjections_from(n)) {
      for (std::size_t c = 0; c < C.space_size(a.target_arity()); ++c) {
        auto p = decode(c, a.target_arity(), k);
        C.set_nu(a, p, S.nu_at(a, phi.apply(p)));
      }
      for (std::size_t c = 0; c < C.space_size(n); ++c) {
        auto x = decode(c, n, k);
        if (!in_U(a, x)) continue;
        auto y = phi.apply(x);
        if (in_U(a, y)) {
          C.set_d(a, x, S.d_at(a, y));
          continue;
        }
        auto required = C.block_tensor(a, x)->dim();
        auto provided = C.fiber(x).dim();
        if (required == provided) {
          C.set_d(a, x, Iso::identity(C.theory, provided));
        } else {
          out.report.add({"factorization_shape", {a}, labels_of(x, C.variety),
                          "required dim " + std::to_string(required) + " vs provided dim " + std::to_string(provided),
                          {}, {datum_key("d", &a, x, C.variety)}});
        }
      }
    }
  }
  if (out.report.empty()) out.report = check_strict(C);
  out.report.sort();
  return out;
}

/// Weak morphism pullback: V' = phi^-1 V cap W'_1 cap W'_2, maps copied.
inline WeakMorphism pullback_weak_morphism(const EtaleMap& phi, const WeakMorphism& m,
                                           std::shared_ptr<const WeakStructure> source,
                                           std::shared_ptr<const WeakStructure> target) {
  WeakMorphism out{source, target, {}, empty_maps(*source)};
  for (std::size_t n = 1; n <= source->max_arity; ++n) {
    auto V = preimage(phi, m.domain.at(n - 1)).intersect(source->W(n)).intersect(target->W(n));
    for (const auto& x : V.members())
      if (auto f = m.at(phi.apply(x))) out.set(x, *f);
    out.domain.push_back(std::move(V));
  }
  return out;
}

/// phi^* of a strict morphism f: S1 -> S2, through the weak pullback and glue.
inline StrictMorphism pullback_strict_morphism(const EtaleMap& phi, const StrictMorphism& f) {
  auto Z1 = std::make_shared<const WeakStructure>(pullback_weak(phi, weak_forget(*f.source)).structure);
  auto Z2 = std::make_shared<const WeakStructure>(pullback_weak(phi, weak_forget(*f.target)).structure);
  WeakMorphism wf{std::make_shared<const WeakStructure>(weak_forget(*f.source)),
                  std::make_shared<const WeakStructure>(weak_forget(*f.target)), {}, f.maps};
  for (std::size_t n = 1; n <= f.source->max_arity; ++n) wf.domain.push_back(Locus::full(f.source->k(), n));
  return glue_morphism(pullback_weak_morphism(phi, wf, Z1, Z2));
}

namespace detail {

/// Follows a provenance chain to the datum it ultimately copies.
inline std::optional<std::string> origin(const std::string& key, std::initializer_list<const Provenance*> chain) {
  std::string cur = key;
  for (const auto* p : chain) {
    auto next = p->find(cur);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

}  // namespace detail

struct ComposeCheck {
  StrictMorphism comparison;
  ValidationReport report;
};

/// Comparison (psi phi)^* S -> phi^* psi^* S given the provenance of both
/// sides: identity where both fibers copy the same datum of S, extended
/// through d and nu elsewhere; then verified with check_morphism.
inline ComposeCheck compare_by_provenance(std::shared_ptr<const StrictStructure> direct, const Provenance& direct_prov,
                                          std::shared_ptr<const StrictStructure> iterated,
                                          const Provenance& iterated_outer, const Provenance& iterated_inner) {
  ComposeCheck out{StrictMorphism{direct, iterated, empty_maps(*direct)}, {}};
  auto& m = out.comparison;
  const auto& X = direct->variety;
  const auto k = direct->k();
  for (std::size_t n = 1; n <= direct->max_arity; ++n)
    for (std::size_t c = 0; c < direct->space_size(n); ++c) {
      auto x = decode(c, n, k);
      auto key = datum_key("fiber", nullptr, x, X);
      auto a = detail::origin(key, {&direct_prov});
      auto b = detail::origin(key, {&iterated_outer, &iterated_inner});
      if (a && b && *a == *b) {
        m.set(x, Iso::identity(direct->fiber(x)));
      } else if (n == 1) {
        out.report.add({"provenance", {}, labels_of(x, X), "fibers at a point do not share an origin", {}, {key}});
      } else if (is_constant(x)) {
        auto col = Surjection::collapse(n);
        Tuple pt{x[0]};
        if (auto f = m.at(pt))
          m.set(x, compose_iso(iterated->nu_at(col, pt), compose_iso(*f, invert_iso(direct->nu_at(col, pt)))));
      } else {
        auto kappa = kernel_partition(x);
        std::vector<Iso> parts;
        bool ok = true;
        for (const auto& b2 : blocks(kappa)) {
          auto f = m.at(restrict_tuple(x, b2));
          if (!f) {
            ok = false;
            break;
          }
          parts.push_back(*f);
        }
        if (ok)
          m.set(x, compose_iso(iterated->d_at(kappa, x),
                               compose_iso(tensor_iso(parts, direct->theory), invert_iso(direct->d_at(kappa, x)))));
      }
    }
  out.report.merge(check_morphism(m));
  out.report.sort();
  return out;
}

inline ComposeCheck pullback_compose_check(const EtaleMap& phi, const EtaleMap& psi, const StrictStructure& S) {
  auto direct = pullback_strict_traced(then(phi, psi), S);
  auto inner = pullback_strict_traced(psi, S);
  auto outer = pullback_strict_traced(phi, inner.structure);
  return compare_by_provenance(std::make_shared<const StrictStructure>(std::move(direct.structure)), direct.provenance,
                               std::make_shared<const StrictStructure>(std::move(outer.structure)), outer.provenance,
                               inner.provenance);
}

}  // namespace fact
