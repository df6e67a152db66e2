#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fact/configuration.hpp"
#include "fact/fiber.hpp"
#include "fact/report.hpp"
#include "fact/surjection.hpp"

namespace fact {

/// Pointwise data indexed by tuple code.
using FiberTable = std::vector<std::optional<Fiber>>;
using IsoTable = std::vector<std::optional<Iso>>;

/// Fibers and structure isomorphisms of a factorization structure truncated
/// at `max_arity`.
///
/// nu[alpha] is indexed by points p of X^J and maps fiber(p) to
/// fiber(diagonal_embed(alpha, p)); d[alpha] is indexed by points x of X^I and
/// maps the tensor of fiber(x|I_j) over the blocks of alpha (in target order)
/// to fiber(x). Only canonical surjections carry data.
struct StructureData {
  StructureData(Variety X, FiberTheory t, std::size_t N)
      : variety(std::move(X)), theory(t), max_arity(N), fibers(N) {
    if (N == 0) throw DomainError("max arity must be at least 1");
    for (std::size_t n = 1; n <= N; ++n) fibers[n - 1].resize(space_size(n));
  }

  Variety variety;
  FiberTheory theory;
  std::size_t max_arity;
  std::vector<FiberTable> fibers;  // [n-1][code]
  std::map<Surjection, IsoTable> nu;
  std::map<Surjection, IsoTable> d;

  std::size_t k() const { return variety.size(); }
  std::size_t space_size(std::size_t n) const { return power(variety.size(), n); }
  std::size_t code(const Tuple& x) const { return encode(x, variety.size()); }
  Tuple point(std::size_t n, std::size_t code) const { return decode(code, n, variety.size()); }

  const Fiber* fiber_ptr(const Tuple& x) const {
    if (x.empty() || x.size() > max_arity) return nullptr;
    const auto& f = fibers[x.size() - 1][code(x)];
    return f ? &*f : nullptr;
  }
  const Fiber& fiber(const Tuple& x) const {
    if (auto f = fiber_ptr(x)) return *f;
    throw DomainError("no fiber at " + format_tuple(x, variety));
  }

  const Iso* nu_ptr(const Surjection& alpha, const Tuple& p) const { return lookup(nu, alpha, p); }
  const Iso* d_ptr(const Surjection& alpha, const Tuple& x) const { return lookup(d, alpha, x); }

  const Iso& nu_at(const Surjection& alpha, const Tuple& p) const {
    if (auto f = nu_ptr(alpha, p)) return *f;
    throw DomainError("no nu" + alpha.to_string() + " at " + format_tuple(p, variety));
  }
  const Iso& d_at(const Surjection& alpha, const Tuple& x) const {
    if (auto f = d_ptr(alpha, x)) return *f;
    throw DomainError("no d" + alpha.to_string() + " at " + format_tuple(x, variety));
  }

  void set_fiber(const Tuple& x, Fiber f) {
    if (x.empty() || x.size() > max_arity) throw DomainError("fiber arity out of range");
    fibers[x.size() - 1][code(x)] = std::move(f);
  }
  void set_nu(const Surjection& alpha, const Tuple& p, Iso f) {
    table(nu, alpha, alpha.target_arity())[code(p)] = std::move(f);
  }
  void set_d(const Surjection& alpha, const Tuple& x, Iso f) {
    table(d, alpha, alpha.source_arity())[code(x)] = std::move(f);
  }

  /// Tensor of fiber(x|I_j) over the blocks of alpha; nullopt if one is missing.
  std::optional<Fiber> block_tensor(const Surjection& alpha, const Tuple& x) const {
    std::vector<Fiber> parts;
    for (const auto& b : blocks(alpha)) {
      auto f = fiber_ptr(restrict_tuple(x, b));
      if (!f) return std::nullopt;
      parts.push_back(*f);
    }
    return tensor(parts, theory);
  }

  /// Equality of engaged entries; tables that exist but hold nothing compare
  /// equal to absent tables.
  friend bool operator==(const StructureData& a, const StructureData& b) {
    return a.variety == b.variety && a.theory == b.theory && a.max_arity == b.max_arity &&
           a.fibers == b.fibers && same_entries(a.nu, b.nu) && same_entries(a.d, b.d);
  }

 private:
  IsoTable& table(std::map<Surjection, IsoTable>& m, const Surjection& alpha, std::size_t arity) {
    if (alpha.source_arity() > max_arity) throw DomainError("surjection arity exceeds max arity");
    if (!alpha.is_canonical()) throw DomainError("structure data is keyed by canonical surjections, got " + alpha.to_string());
    auto& t = m[alpha];
    if (t.empty()) t.resize(space_size(arity));
    return t;
  }
  static bool same_entries(const std::map<Surjection, IsoTable>& a, const std::map<Surjection, IsoTable>& b) {
    auto covered = [](const std::map<Surjection, IsoTable>& x, const std::map<Surjection, IsoTable>& y) {
      for (const auto& [alpha, t] : x) {
        auto it = y.find(alpha);
        for (std::size_t c = 0; c < t.size(); ++c) {
          if (!t[c]) continue;
          if (it == y.end() || c >= it->second.size() || !it->second[c] || !(*it->second[c] == *t[c]))
            return false;
        }
      }
      return true;
    };
    return covered(a, b) && covered(b, a);
  }
  const Iso* lookup(const std::map<Surjection, IsoTable>& m, const Surjection& alpha, const Tuple& x) const {
    auto it = m.find(alpha);
    if (it == m.end()) return nullptr;
    auto c = code(x);
    if (c >= it->second.size() || !it->second[c]) return nullptr;
    return &*it->second[c];
  }
};

/// Fibers on all of X^n and nu, d everywhere they are defined.
struct StrictStructure : StructureData {
  using StructureData::StructureData;
  friend bool operator==(const StrictStructure&, const StrictStructure&) = default;
};

/// Loci of a weak structure: W(n), R(alpha) in X^J, F(alpha) in X^I.
struct WeakLoci {
  std::vector<Locus> W;  // [n-1]
  std::map<Surjection, Locus> R;
  std::map<Surjection, Locus> F;

  /// W(n) = X^n, R = X^J, F = X^I.
  static WeakLoci full(std::size_t k, std::size_t N) {
    WeakLoci l;
    for (std::size_t n = 1; n <= N; ++n) {
      l.W.push_back(Locus::full(k, n));
      for (const auto& a : surjections_from(n)) {
        l.R.emplace(a, Locus::full(k, a.target_arity()));
        l.F.emplace(a, Locus::full(k, n));
      }
    }
    return l;
  }

  /// Every locus is exactly the small diagonal (W(1) = X).
  static WeakLoci diagonal(std::size_t k, std::size_t N) {
    WeakLoci l;
    for (std::size_t n = 1; n <= N; ++n) {
      l.W.push_back(Locus::diagonal(k, n));
      for (const auto& a : surjections_from(n)) {
        l.R.emplace(a, Locus::diagonal(k, a.target_arity()));
        l.F.emplace(a, Locus::diagonal(k, n));
      }
    }
    return l;
  }

  /// The largest loci inside the given W: R(alpha) = W(J) cap D(alpha)^-1 W(I),
  /// F(alpha) = W(I) cap prod_j W(I_j).
  static WeakLoci maximal_within(std::vector<Locus> W) {
    WeakLoci l;
    l.W = std::move(W);
    const auto N = l.W.size();
    const auto k = l.W.front().variety_size();
    for (std::size_t n = 1; n <= N; ++n)
      for (const auto& a : surjections_from(n)) {
        l.R.emplace(a, Locus::where(k, a.target_arity(), [&](const Tuple& p) {
                      return l.W[p.size() - 1].contains(p) && l.W[n - 1].contains(diagonal_embed(a, p));
                    }));
        l.F.emplace(a, Locus::where(k, n, [&](const Tuple& x) {
                      if (!l.W[n - 1].contains(x)) return false;
                      for (const auto& b : blocks(a)) {
                        auto y = restrict_tuple(x, b);
                        if (!l.W[y.size() - 1].contains(y)) return false;
                      }
                      return true;
                    }));
      }
    return l;
  }

  friend bool operator==(const WeakLoci&, const WeakLoci&) = default;
};

/// Fibers only on W(n); nu only on R(alpha); d only on F(alpha) cap U(alpha).
struct WeakStructure : StructureData {
  WeakStructure(Variety X, FiberTheory t, std::size_t N, WeakLoci l)
      : StructureData(std::move(X), t, N), loci(std::move(l)) {}

  WeakLoci loci;

  const Locus& W(std::size_t n) const { return loci.W.at(n - 1); }
  const Locus& R(const Surjection& a) const { return at(loci.R, a, "R"); }
  const Locus& F(const Surjection& a) const { return at(loci.F, a, "F"); }

  friend bool operator==(const WeakStructure&, const WeakStructure&) = default;

 private:
  static const Locus& at(const std::map<Surjection, Locus>& m, const Surjection& a, const char* name) {
    auto it = m.find(a);
    if (it == m.end()) throw DomainError(std::string("no locus ") + name + a.to_string());
    return it->second;
  }
};

/// Pointwise maps between two strict structures over the same variety.
struct StrictMorphism {
  std::shared_ptr<const StrictStructure> source;
  std::shared_ptr<const StrictStructure> target;
  std::vector<IsoTable> maps;  // [n-1][code]

  const Iso* at(const Tuple& x) const {
    if (x.empty() || x.size() > maps.size()) return nullptr;
    const auto& t = maps[x.size() - 1];
    auto c = encode(x, source->k());
    return c < t.size() && t[c] ? &*t[c] : nullptr;
  }
  void set(const Tuple& x, Iso f) { maps.at(x.size() - 1).at(encode(x, source->k())) = std::move(f); }
};

/// Pointwise maps on V(n) between two weak structures.
struct WeakMorphism {
  std::shared_ptr<const WeakStructure> source;
  std::shared_ptr<const WeakStructure> target;
  std::vector<Locus> domain;   // V(n)
  std::vector<IsoTable> maps;  // [n-1][code], engaged exactly on V(n)

  const Iso* at(const Tuple& x) const {
    if (x.empty() || x.size() > maps.size()) return nullptr;
    const auto& t = maps[x.size() - 1];
    auto c = encode(x, source->k());
    return c < t.size() && t[c] ? &*t[c] : nullptr;
  }
  void set(const Tuple& x, Iso f) { maps.at(x.size() - 1).at(encode(x, source->k())) = std::move(f); }
};

inline std::vector<IsoTable> empty_maps(const StructureData& S) {
  std::vector<IsoTable> maps;
  for (std::size_t n = 1; n <= S.max_arity; ++n) maps.emplace_back(S.space_size(n));
  return maps;
}

inline StrictMorphism identity_morphism(std::shared_ptr<const StrictStructure> S) {
  StrictMorphism m{S, S, empty_maps(*S)};
  for (std::size_t n = 1; n <= S->max_arity; ++n)
    for (std::size_t c = 0; c < S->space_size(n); ++c)
      if (auto f = S->fibers[n - 1][c]) m.maps[n - 1][c] = Iso::identity(*f);
  return m;
}

inline WeakMorphism identity_morphism(std::shared_ptr<const WeakStructure> Z) {
  WeakMorphism m{Z, Z, Z->loci.W, empty_maps(*Z)};
  for (std::size_t n = 1; n <= Z->max_arity; ++n)
    for (std::size_t c = 0; c < Z->space_size(n); ++c)
      if (auto f = Z->fibers[n - 1][c]) m.maps[n - 1][c] = Iso::identity(*f);
  return m;
}

/// d for an arbitrary (possibly non-canonical) surjection, obtained from the
/// canonical one by reordering tensor factors into canonical block order.
inline std::optional<Iso> d_any(const StructureData& S, const Surjection& alpha, const Tuple& x) {
  if (alpha.target_arity() == 1) {
    if (auto f = S.fiber_ptr(x)) return Iso::identity(*f);
    return std::nullopt;
  }
  auto [c, relabel] = canonicalize(alpha);
  auto base = S.d_ptr(c, x);
  if (!base) return std::nullopt;
  if (c == alpha) return *base;
  std::vector<Fiber> parts;
  for (const auto& b : blocks(alpha)) {
    auto f = S.fiber_ptr(restrict_tuple(x, b));
    if (!f) return std::nullopt;
    parts.push_back(*f);
  }
  std::vector<std::size_t> order(alpha.target_arity());
  for (std::size_t j = 0; j < relabel.size(); ++j) order[relabel[j]] = j;
  return compose_iso(*base, reorder_iso(S.theory, std::span<const Fiber>(parts), order));
}

/// Containment and diagonal conditions on weak loci.
inline ValidationReport check_loci(const WeakLoci& loci, std::size_t k, std::size_t N) {
  ValidationReport r;
  auto fail = [&](std::vector<Surjection> s, std::string detail) {
    r.add({"locus", std::move(s), {}, std::move(detail), {}, {}});
  };
  if (loci.W.size() != N) {
    fail({}, "expected W(n) for n = 1.." + std::to_string(N));
    return r;
  }
  for (std::size_t n = 1; n <= N; ++n) {
    const auto& W = loci.W[n - 1];
    if (W.arity() != n || W.variety_size() != k) {
      fail({}, "W(" + std::to_string(n) + ") lives in the wrong space");
      return r;
    }
    if (!W.contains_diagonal()) fail({}, "W(" + std::to_string(n) + ") misses a diagonal point");
  }
  if (loci.W[0] != Locus::full(k, 1)) fail({}, "W(1) must be all of X");
  for (const auto* m : {&loci.R, &loci.F})
    for (const auto& [a, L] : *m)
      if (!a.is_canonical() || a.source_arity() > N) fail({a}, "locus keyed by a non-canonical or out-of-range surjection");
  for (std::size_t n = 1; n <= N; ++n)
    for (const auto& a : surjections_from(n)) {
      const auto m = a.target_arity();
      auto rit = loci.R.find(a);
      if (rit == loci.R.end() || rit->second.arity() != m || rit->second.variety_size() != k) {
        fail({a}, "R missing or in the wrong space");
      } else {
        const auto& R = rit->second;
        if (!R.contains_diagonal()) fail({a}, "R misses a diagonal point");
        for (const auto& p : R.members())
          if (!loci.W[m - 1].contains(p) || !loci.W[n - 1].contains(diagonal_embed(a, p)))
            fail({a}, "R not inside W(J) cap D(alpha)^-1 W(I) at a point of arity " + std::to_string(m));
      }
      auto fit = loci.F.find(a);
      if (fit == loci.F.end() || fit->second.arity() != n || fit->second.variety_size() != k) {
        fail({a}, "F missing or in the wrong space");
      } else {
        const auto& F = fit->second;
        if (!F.contains_diagonal()) fail({a}, "F misses a diagonal point");
        for (const auto& x : F.members()) {
          bool ok = loci.W[n - 1].contains(x);
          for (const auto& b : blocks(a)) {
            auto y = restrict_tuple(x, b);
            ok = ok && loci.W[y.size() - 1].contains(y);
          }
          if (!ok) fail({a}, "F not inside W(I) cap prod W(I_j)");
        }
      }
    }
  return r;
}

inline WeakStructure weak_forget(const StrictStructure& S, std::optional<WeakLoci> loci = std::nullopt) {
  WeakLoci l = loci ? std::move(*loci) : WeakLoci::full(S.k(), S.max_arity);
  if (auto r = check_loci(l, S.k(), S.max_arity); !r.empty()) {
    std::ostringstream os;
    os << "weak_forget: invalid loci\n" << r;
    throw DomainError(os.str());
  }
  WeakStructure Z(S.variety, S.theory, S.max_arity, std::move(l));
  const auto k = S.k();
  for (std::size_t n = 1; n <= S.max_arity; ++n) {
    for (std::size_t c = 0; c < S.space_size(n); ++c)
      if (Z.W(n).contains_code(c)) Z.fibers[n - 1][c] = S.fibers[n - 1][c];
    for (const auto& a : surjections_from(n)) {
      const auto& R = Z.R(a);
      for (std::size_t c = 0; c < R.space_size(); ++c) {
        if (!R.contains_code(c)) continue;
        auto p = decode(c, a.target_arity(), k);
        if (auto f = S.nu_ptr(a, p)) Z.set_nu(a, p, *f);
      }
      const auto& F = Z.F(a);
      for (std::size_t c = 0; c < F.space_size(); ++c) {
        if (!F.contains_code(c)) continue;
        auto x = decode(c, n, k);
        if (!in_U(a, x)) continue;
        if (auto f = S.d_ptr(a, x)) Z.set_d(a, x, *f);
      }
    }
  }
  return Z;
}

}  // namespace fact
