#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "fact/surjection.hpp"

namespace fact {

/// A finite discrete variety: a non-empty list of distinct point labels.
class Variety {
 public:
  explicit Variety(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw DomainError("a variety needs at least one point");
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      if (!index_.emplace(labels_[i], i).second)
        throw DomainError("duplicate point label '" + labels_[i] + "'");
    }
  }

  /// Points labelled prefix0, prefix1, ...
  static Variety numbered(std::size_t size, const std::string& prefix = "x") {
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < size; ++i) labels.push_back(prefix + std::to_string(i + 1));
    return Variety(std::move(labels));
  }

  std::size_t size() const { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const { return labels_; }

  std::size_t index_of(const std::string& label) const {
    auto it = index_.find(label);
    if (it == index_.end()) throw DomainError("unknown point label '" + label + "'");
    return it->second;
  }

  friend bool operator==(const Variety& a, const Variety& b) { return a.labels_ == b.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// A point of X^n as point indices.
using Tuple = std::vector<std::size_t>;

inline std::size_t power(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  while (exp--) r *= base;
  return r;
}

/// Lexicographic (big-endian) code of a tuple over a variety with k points.
inline std::size_t encode(std::span<const std::size_t> x, std::size_t k) {
  std::size_t code = 0;
  for (auto c : x) code = code * k + c;
  return code;
}

inline Tuple decode(std::size_t code, std::size_t n, std::size_t k) {
  Tuple x(n);
  for (std::size_t i = n; i-- > 0;) {
    x[i] = code % k;
    code /= k;
  }
  return x;
}

inline std::string format_tuple(const Tuple& x, const Variety& X) {
  std::string out = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out += ",";
    out += X.label(x[i]);
  }
  return out + ")";
}

inline bool is_constant(const Tuple& x) {
  return std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end();
}

/// x restricted to the (ascending) index subset.
inline Tuple restrict_tuple(const Tuple& x, std::span<const std::size_t> subset) {
  Tuple out;
  out.reserve(subset.size());
  for (auto i : subset) out.push_back(x.at(i));
  return out;
}

/// Distinct coordinate values in order of first occurrence.
inline std::vector<std::size_t> support(const Tuple& x) {
  std::vector<std::size_t> out;
  for (auto c : x)
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  return out;
}

/// Coordinate i of the result is coordinate alpha(i) of p.
inline Tuple diagonal_embed(const Surjection& alpha, const Tuple& p) {
  if (p.size() != alpha.target_arity())
    throw DomainError("diagonal_embed: point arity " + std::to_string(p.size()) +
                      " does not match target arity of " + alpha.to_string());
  Tuple x(alpha.source_arity());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = p[alpha(i)];
  return x;
}

/// x lies in U(alpha): coordinates in different blocks are different.
inline bool in_U(const Surjection& alpha, const Tuple& x) {
  if (x.size() != alpha.source_arity())
    throw DomainError("in_U: point arity does not match source of " + alpha.to_string());
  for (std::size_t a = 0; a < x.size(); ++a)
    for (std::size_t b = a + 1; b < x.size(); ++b)
      if (alpha(a) != alpha(b) && x[a] == x[b]) return false;
  return true;
}

/// The canonical surjection whose blocks are the classes of equal coordinates.
inline Surjection kernel_partition(const Tuple& x) {
  if (x.empty()) throw DomainError("kernel_partition of an empty tuple");
  auto supp = support(x);
  std::vector<std::size_t> m(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    m[i] = static_cast<std::size_t>(std::find(supp.begin(), supp.end(), x[i]) - supp.begin());
  return Surjection(std::move(m), supp.size());
}

/// An explicit subset of X^n, stored as a membership mask over tuple codes.
class Locus {
 public:
  Locus(std::size_t variety_size, std::size_t arity)
      : k_(variety_size), n_(arity), mask_(power(variety_size, arity), false) {
    if (variety_size == 0 || arity == 0) throw DomainError("locus over an empty space");
  }

  static Locus full(std::size_t k, std::size_t n) {
    Locus l(k, n);
    l.mask_.assign(l.mask_.size(), true);
    return l;
  }

  static Locus diagonal(std::size_t k, std::size_t n) {
    Locus l(k, n);
    for (std::size_t c = 0; c < k; ++c) l.insert(Tuple(n, c));
    return l;
  }

  template <class Pred>
  static Locus where(std::size_t k, std::size_t n, Pred&& pred) {
    Locus l(k, n);
    for (std::size_t code = 0; code < l.mask_.size(); ++code)
      if (pred(decode(code, n, k))) l.mask_[code] = true;
    return l;
  }

  std::size_t variety_size() const { return k_; }
  std::size_t arity() const { return n_; }
  std::size_t space_size() const { return mask_.size(); }

  bool contains_code(std::size_t code) const { return mask_.at(code); }
  bool contains(const Tuple& x) const {
    check(x);
    return mask_[encode(x, k_)];
  }
  void insert(const Tuple& x) {
    check(x);
    mask_[encode(x, k_)] = true;
  }
  void erase(const Tuple& x) {
    check(x);
    mask_[encode(x, k_)] = false;
  }

  std::size_t size() const { return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true)); }

  std::vector<Tuple> members() const {
    std::vector<Tuple> out;
    for (std::size_t code = 0; code < mask_.size(); ++code)
      if (mask_[code]) out.push_back(decode(code, n_, k_));
    return out;
  }

  bool contains_diagonal() const {
    for (std::size_t c = 0; c < k_; ++c)
      if (!contains(Tuple(n_, c))) return false;
    return true;
  }

  bool subset_of(const Locus& other) const {
    same_space(other);
    for (std::size_t i = 0; i < mask_.size(); ++i)
      if (mask_[i] && !other.mask_[i]) return false;
    return true;
  }

  Locus intersect(const Locus& other) const {
    same_space(other);
    Locus out(k_, n_);
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] && other.mask_[i];
    return out;
  }

  Locus unite(const Locus& other) const {
    same_space(other);
    Locus out(k_, n_);
    for (std::size_t i = 0; i < mask_.size(); ++i) out.mask_[i] = mask_[i] || other.mask_[i];
    return out;
  }

  friend bool operator==(const Locus&, const Locus&) = default;

 private:
  void check(const Tuple& x) const {
    if (x.size() != n_) throw DomainError("tuple arity does not match locus arity");
    for (auto c : x)
      if (c >= k_) throw DomainError("tuple coordinate outside the variety");
  }
  void same_space(const Locus& o) const {
    if (o.k_ != k_ || o.n_ != n_) throw DomainError("loci live in different spaces");
  }

  std::size_t k_;
  std::size_t n_;
  std::vector<bool> mask_;
};

/// U(alpha) as an explicit locus.
inline Locus U_locus(const Surjection& alpha, std::size_t k) {
  return Locus::where(k, alpha.source_arity(), [&](const Tuple& x) { return in_U(alpha, x); });
}

/// A total map of finite point sets. In the discrete model every such map is
/// a local isomorphism; injectivity plays the role of an empty Z_phi.
class EtaleMap {
 public:
  EtaleMap(Variety source, Variety target, std::vector<std::size_t> map)
      : source_(std::move(source)), target_(std::move(target)), map_(std::move(map)) {
    if (map_.size() != source_.size()) throw DomainError("etale map must be total on its source");
    for (auto v : map_)
      if (v >= target_.size()) throw DomainError("etale map value outside its target");
  }

  static EtaleMap identity(const Variety& X) {
    std::vector<std::size_t> m(X.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = i;
    return EtaleMap(X, X, std::move(m));
  }

  const Variety& source() const { return source_; }
  const Variety& target() const { return target_; }
  std::span<const std::size_t> map() const { return map_; }
  std::size_t operator()(std::size_t x) const { return map_.at(x); }

  Tuple apply(const Tuple& x) const {
    Tuple y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = map_.at(x[i]);
    return y;
  }

  bool is_injective() const {
    std::vector<std::size_t> v(map_);
    std::sort(v.begin(), v.end());
    return std::adjacent_find(v.begin(), v.end()) == v.end();
  }

  bool is_identity() const {
    if (!(source_ == target_)) return false;
    for (std::size_t i = 0; i < map_.size(); ++i)
      if (map_[i] != i) return false;
    return true;
  }

  friend bool operator==(const EtaleMap&, const EtaleMap&) = default;

 private:
  Variety source_;
  Variety target_;
  std::vector<std::size_t> map_;
};

/// then(phi, psi) = psi . phi.
inline EtaleMap then(const EtaleMap& phi, const EtaleMap& psi) {
  if (!(phi.target() == psi.source())) throw DomainError("etale maps are not composable");
  std::vector<std::size_t> m(phi.source().size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = psi(phi(i));
  return EtaleMap(phi.source(), psi.target(), std::move(m));
}

/// Pairs of distinct points with the same image.
inline Locus Z_phi(const EtaleMap& phi) {
  return Locus::where(phi.source().size(), 2,
                      [&](const Tuple& x) { return x[0] != x[1] && phi(x[0]) == phi(x[1]); });
}

/// Tuples on which phi identifies exactly the coordinates that are already equal.
inline Locus V_I_phi(const EtaleMap& phi, IndexSet I) {
  return Locus::where(phi.source().size(), I.arity(), [&](const Tuple& x) {
    for (std::size_t a = 0; a < x.size(); ++a)
      for (std::size_t b = a + 1; b < x.size(); ++b)
        if ((phi(x[a]) == phi(x[b])) != (x[a] == x[b])) return false;
    return true;
  });
}

/// Preimage of a locus on the target under the coordinatewise map.
inline Locus preimage(const EtaleMap& phi, const Locus& target_locus) {
  return Locus::where(phi.source().size(), target_locus.arity(),
                      [&](const Tuple& x) { return target_locus.contains(phi.apply(x)); });
}

struct CoverReport {
  bool covered = true;
  std::vector<Tuple> uncovered;
};

/// Checks F_I together with every U(alpha), alpha with >= 2 blocks, covers X^n.
inline CoverReport cover_check(const Locus& F_I, std::size_t n) {
  if (F_I.arity() != n) throw DomainError("cover_check: locus arity mismatch");
  CoverReport report;
  const auto k = F_I.variety_size();
  std::vector<Surjection> charts;
  if (n >= 2) charts = enumerate_surjections(IndexSet(n), 2);
  for (std::size_t code = 0; code < F_I.space_size(); ++code) {
    if (F_I.contains_code(code)) continue;
    auto x = decode(code, n, k);
    bool hit = std::any_of(charts.begin(), charts.end(),
                           [&](const Surjection& a) { return in_U(a, x); });
    if (!hit) {
      report.covered = false;
      report.uncovered.push_back(std::move(x));
    }
  }
  return report;
}

}  // namespace fact
