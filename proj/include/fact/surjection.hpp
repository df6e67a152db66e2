#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fact {

/// Raised when an operation is called outside its domain (arity mismatch,
/// empty restriction, point outside a locus, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The canonical finite set {0, ..., arity-1}. Printed 1-based.
class IndexSet {
 public:
  explicit IndexSet(std::size_t arity) : arity_(arity) {
    if (arity == 0) throw DomainError("index sets must be non-empty");
  }
  std::size_t arity() const { return arity_; }
  friend auto operator<=>(const IndexSet&, const IndexSet&) = default;

 private:
  std::size_t arity_;
};

/// A surjection {0..n-1} ->> {0..m-1} of canonical index sets.
///
/// Labels are 0-based in memory and 1-based in every textual form. Ordering
/// and equality are structural, which makes surjections usable as map keys.
class Surjection {
 public:
  /// Target arity is taken to be max(map)+1; every smaller label must be hit.
  explicit Surjection(std::vector<std::size_t> map) : map_(std::move(map)) {
    if (map_.empty()) throw DomainError("surjection source must be non-empty");
    target_ = *std::max_element(map_.begin(), map_.end()) + 1;
    validate();
  }

  Surjection(std::vector<std::size_t> map, std::size_t target_arity)
      : map_(std::move(map)), target_(target_arity) {
    if (map_.empty()) throw DomainError("surjection source must be non-empty");
    validate();
  }

  static Surjection identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    for (std::size_t i = 0; i < n; ++i) m[i] = i;
    return Surjection(std::move(m), n);
  }

  static Surjection collapse(std::size_t n) {
    return Surjection(std::vector<std::size_t>(n, 0), 1);
  }

  /// Builds from 1-based labels, as used in structure files.
  static Surjection from_one_based(const std::vector<std::size_t>& labels) {
    std::vector<std::size_t> m;
    m.reserve(labels.size());
    for (auto l : labels) {
      if (l == 0) throw DomainError("surjection labels are 1-based");
      m.push_back(l - 1);
    }
    return Surjection(std::move(m));
  }

  std::size_t source_arity() const { return map_.size(); }
  std::size_t target_arity() const { return target_; }
  std::size_t operator()(std::size_t i) const { return map_.at(i); }
  std::span<const std::size_t> map() const { return map_; }

  std::vector<std::size_t> one_based() const {
    std::vector<std::size_t> out(map_);
    for (auto& v : out) ++v;
    return out;
  }

  bool is_bijection() const { return target_ == map_.size(); }

  /// Canonical = restricted growth string: target labels are numbered in
  /// order of their first preimage.
  bool is_canonical() const {
    std::size_t next = 0;
    for (auto v : map_) {
      if (v > next) return false;
      if (v == next) ++next;
    }
    return true;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < map_.size(); ++i) os << (i ? "," : "") << map_[i] + 1;
    os << ']';
    return os.str();
  }

  friend bool operator==(const Surjection&, const Surjection&) = default;
  friend auto operator<=>(const Surjection&, const Surjection&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Surjection& s) {
    return os << s.to_string();
  }

 private:
  void validate() const {
    std::vector<bool> hit(target_, false);
    for (auto v : map_) {
      if (v >= target_) throw DomainError("surjection value out of range");
      hit[v] = true;
    }
    if (std::find(hit.begin(), hit.end(), false) != hit.end())
      throw DomainError("map " + to_string() + " is not surjective");
  }

  std::vector<std::size_t> map_;
  std::size_t target_ = 0;
};

using Block = std::vector<std::size_t>;

/// compose(beta, gamma) = gamma . beta for beta: I ->> K, gamma: K ->> J.
inline Surjection compose(const Surjection& beta, const Surjection& gamma) {
  if (beta.target_arity() != gamma.source_arity())
    throw DomainError("cannot compose " + beta.to_string() + " with " + gamma.to_string() +
                      ": arity mismatch");
  std::vector<std::size_t> m(beta.source_arity());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = gamma(beta(i));
  return Surjection(std::move(m), gamma.target_arity());
}

/// Fibres of alpha, in target order; elements ascending.
inline std::vector<Block> blocks(const Surjection& alpha) {
  std::vector<Block> out(alpha.target_arity());
  for (std::size_t i = 0; i < alpha.source_arity(); ++i) out[alpha(i)].push_back(i);
  return out;
}

/// Restriction of alpha to `subset`, relabelled: source and image both in
/// ascending order.
inline Surjection restrict(const Surjection& alpha, std::span<const std::size_t> subset) {
  if (subset.empty()) throw DomainError("cannot restrict a surjection to the empty set");
  std::vector<std::size_t> src(subset.begin(), subset.end());
  std::sort(src.begin(), src.end());
  if (std::adjacent_find(src.begin(), src.end()) != src.end())
    throw DomainError("restriction subset has repeated elements");
  if (src.back() >= alpha.source_arity()) throw DomainError("restriction subset out of range");
  std::vector<std::size_t> image;
  for (auto i : src) image.push_back(alpha(i));
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  std::vector<std::size_t> m;
  m.reserve(src.size());
  for (auto i : src) {
    auto pos = std::lower_bound(image.begin(), image.end(), alpha(i)) - image.begin();
    m.push_back(static_cast<std::size_t>(pos));
  }
  return Surjection(std::move(m), image.size());
}

/// Relabels the target of alpha so that it becomes canonical. `relabel[j]` is
/// the canonical label of alpha's target label j.
struct Canonicalized {
  Surjection surjection;
  std::vector<std::size_t> relabel;
};

inline Canonicalized canonicalize(const Surjection& alpha) {
  std::vector<std::size_t> relabel(alpha.target_arity(), alpha.target_arity());
  std::size_t next = 0;
  std::vector<std::size_t> m(alpha.source_arity());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto& r = relabel[alpha(i)];
    if (r == alpha.target_arity()) r = next++;
    m[i] = r;
  }
  return {Surjection(std::move(m), alpha.target_arity()), std::move(relabel)};
}

/// alpha * beta out of a common source, with the product set labelled
/// lexicographically by (j, k).
struct StarResult {
  std::size_t star_target = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // label -> (j, k)
  Surjection star_map;
  Surjection left_factor;   // J*K ->> J
  Surjection right_factor;  // J*K ->> K
};

inline StarResult star(const Surjection& alpha, const Surjection& beta) {
  if (alpha.source_arity() != beta.source_arity())
    throw DomainError("star product needs a shared source");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < alpha.source_arity(); ++i) pairs.emplace_back(alpha(i), beta(i));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::size_t> m(alpha.source_arity());
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), std::pair{alpha(i), beta(i)});
    m[i] = static_cast<std::size_t>(it - pairs.begin());
  }
  std::vector<std::size_t> left, right;
  for (auto [j, k] : pairs) {
    left.push_back(j);
    right.push_back(k);
  }
  const auto n = pairs.size();
  return {n, pairs, Surjection(std::move(m), n), Surjection(std::move(left), alpha.target_arity()),
          Surjection(std::move(right), beta.target_arity())};
}

namespace detail {
inline void grow_partitions(std::vector<std::size_t>& rgs, std::size_t pos, std::size_t used,
                            std::size_t min_blocks, std::vector<Surjection>& out) {
  if (pos == rgs.size()) {
    if (used >= min_blocks) out.emplace_back(rgs, used);
    return;
  }
  for (std::size_t v = 0; v <= used; ++v) {
    rgs[pos] = v;
    grow_partitions(rgs, pos + 1, std::max(used, v + 1), min_blocks, out);
  }
}
}  // namespace detail

/// Canonical surjections out of `source` with at least `min_target_arity`
/// blocks: one per set partition, in lexicographic order of restricted growth
/// strings.
inline std::vector<Surjection> enumerate_surjections(IndexSet source,
                                                     std::size_t min_target_arity = 1) {
  const auto n = source.arity();
  if (min_target_arity < 1 || min_target_arity > n)
    throw DomainError("minimum target arity must lie in [1, n]");
  std::vector<Surjection> out;
  std::vector<std::size_t> rgs(n, 0);
  detail::grow_partitions(rgs, 0, 0, min_target_arity, out);
  return out;
}

/// Canonical surjections out of {0..n-1}, computed once. Supports n <= 8.
inline const std::vector<Surjection>& surjections_from(std::size_t n) {
  static const auto table = [] {
    std::vector<std::vector<Surjection>> t(1);
    for (std::size_t k = 1; k <= 8; ++k) t.push_back(enumerate_surjections(IndexSet(k), 1));
    return t;
  }();
  if (n == 0 || n >= table.size()) throw DomainError("arity " + std::to_string(n) + " out of supported range");
  return table[n];
}

}  // namespace fact
