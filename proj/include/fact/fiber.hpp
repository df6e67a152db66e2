#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fact/matrix.hpp"
#include "fact/surjection.hpp"

namespace fact {

/// The value category a structure takes values in.
enum class FiberTheory { FiniteBijection, RationalVector };

inline std::string to_string(FiberTheory t) {
  return t == FiberTheory::FiniteBijection ? "finite_bijection" : "rational_vector";
}

inline FiberTheory theory_from_string(const std::string& s) {
  if (s == "finite_bijection") return FiberTheory::FiniteBijection;
  if (s == "rational_vector") return FiberTheory::RationalVector;
  throw DomainError("unknown fiber theory '" + s + "'");
}

/// Label of a set element or basis vector. Tensor products concatenate
/// labels, which keeps products strictly associative.
using Element = std::vector<std::string>;

class Fiber {
 public:
  /// A finite set with the given (distinct) elements.
  static Fiber finite_set(std::vector<Element> elements) {
    std::set<Element> seen(elements.begin(), elements.end());
    if (seen.size() != elements.size()) throw DomainError("fiber elements must be distinct");
    const auto n = elements.size();
    return Fiber(FiberTheory::FiniteBijection, n, std::move(elements));
  }

  /// A rational vector space; basis labels are optional.
  static Fiber vector_space(std::size_t dim, std::vector<Element> basis = {}) {
    if (!basis.empty()) {
      if (basis.size() != dim) throw DomainError("basis label count does not match dimension");
      std::set<Element> seen(basis.begin(), basis.end());
      if (seen.size() != basis.size()) throw DomainError("basis labels must be distinct");
    }
    return Fiber(FiberTheory::RationalVector, dim, std::move(basis));
  }

  static Fiber unit(FiberTheory theory) {
    return theory == FiberTheory::FiniteBijection ? finite_set({Element{}}) : vector_space(1, {Element{}});
  }

  FiberTheory theory() const { return theory_; }
  std::size_t dim() const { return dim_; }
  const std::vector<Element>& elements() const { return elements_; }
  bool labelled() const { return !elements_.empty() || dim_ == 0; }

  friend bool operator==(const Fiber&, const Fiber&) = default;

 private:
  Fiber(FiberTheory t, std::size_t dim, std::vector<Element> el)
      : theory_(t), dim_(dim), elements_(std::move(el)) {}

  FiberTheory theory_;
  std::size_t dim_;
  std::vector<Element> elements_;
};

/// A bijection of index sets: element i of the source goes to image[i].
class Bijection {
 public:
  explicit Bijection(std::vector<std::size_t> image) : image_(std::move(image)) {
    std::vector<bool> hit(image_.size(), false);
    for (auto v : image_) {
      if (v >= image_.size() || hit[v]) throw DomainError("not a bijection");
      hit[v] = true;
    }
  }
  static Bijection identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), 0);
    return Bijection(std::move(m));
  }
  std::size_t size() const { return image_.size(); }
  std::size_t operator()(std::size_t i) const { return image_[i]; }
  const std::vector<std::size_t>& image() const { return image_; }
  friend bool operator==(const Bijection&, const Bijection&) = default;

 private:
  std::vector<std::size_t> image_;
};

/// An isomorphism between fibers: a bijection (finite sets) or an invertible
/// rational matrix acting on column vectors. Invertibility is enforced on
/// construction.
class Iso {
 public:
  explicit Iso(Bijection b) : rep_(std::move(b)) {}
  explicit Iso(Matrix m) : rep_(std::move(m)) {
    const auto& mm = std::get<Matrix>(rep_);
    if (mm.rows() != mm.cols()) throw DomainError("isomorphism matrix must be square");
    if (!mm.is_invertible()) throw DomainError("isomorphism matrix is singular");
  }

  static Iso identity(FiberTheory t, std::size_t dim) {
    return t == FiberTheory::FiniteBijection ? Iso(Bijection::identity(dim)) : Iso(Matrix::identity(dim), Trusted{});
  }
  static Iso identity(const Fiber& f) { return identity(f.theory(), f.dim()); }

  FiberTheory theory() const {
    return std::holds_alternative<Bijection>(rep_) ? FiberTheory::FiniteBijection : FiberTheory::RationalVector;
  }
  std::size_t dim() const {
    return std::visit([](const auto& r) {
      if constexpr (std::is_same_v<std::decay_t<decltype(r)>, Bijection>) return r.size();
      else return r.rows();
    }, rep_);
  }
  bool is_bijection() const { return std::holds_alternative<Bijection>(rep_); }
  const Bijection& bijection() const { return std::get<Bijection>(rep_); }
  const Matrix& matrix() const { return std::get<Matrix>(rep_); }

  friend bool operator==(const Iso&, const Iso&) = default;

  // Used by the arithmetic below when invertibility holds by construction.
  struct Trusted {};
  Iso(Matrix m, Trusted) : rep_(std::move(m)) {}

 private:
  std::variant<Bijection, Matrix> rep_;
};

inline bool fits(const Iso& f, const Fiber& source, const Fiber& target) {
  return f.theory() == source.theory() && source.theory() == target.theory() &&
         f.dim() == source.dim() && f.dim() == target.dim();
}

/// f . g (g first).
inline Iso compose_iso(const Iso& f, const Iso& g) {
  if (f.theory() != g.theory()) throw DomainError("cannot compose isomorphisms of different theories");
  if (f.dim() != g.dim()) throw DomainError("cannot compose isomorphisms: shape mismatch");
  if (f.is_bijection()) {
    std::vector<std::size_t> m(g.dim());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = f.bijection()(g.bijection()(i));
    return Iso(Bijection(std::move(m)));
  }
  return Iso(f.matrix() * g.matrix(), Iso::Trusted{});
}

inline Iso invert_iso(const Iso& f) {
  if (f.is_bijection()) {
    std::vector<std::size_t> m(f.dim());
    for (std::size_t i = 0; i < m.size(); ++i) m[f.bijection()(i)] = i;
    return Iso(Bijection(std::move(m)));
  }
  return Iso(*f.matrix().inverse(), Iso::Trusted{});
}

inline bool iso_equal(const Iso& f, const Iso& g) { return f == g; }

inline Fiber tensor(std::span<const Fiber> fibers, FiberTheory theory) {
  for (const auto& f : fibers)
    if (f.theory() != theory) throw DomainError("tensor of fibers from mixed theories");
  std::size_t dim = 1;
  bool labelled = true;
  for (const auto& f : fibers) {
    dim *= f.dim();
    labelled = labelled && f.labelled();
  }
  std::vector<Element> elements;
  if (labelled || theory == FiberTheory::FiniteBijection) {
    elements.push_back(Element{});
    for (const auto& f : fibers) {
      std::vector<Element> next;
      next.reserve(elements.size() * f.dim());
      for (const auto& prefix : elements)
        for (const auto& e : f.elements()) {
          Element cat = prefix;
          cat.insert(cat.end(), e.begin(), e.end());
          next.push_back(std::move(cat));
        }
      elements = std::move(next);
    }
  }
  return theory == FiberTheory::FiniteBijection ? Fiber::finite_set(std::move(elements))
                                                : Fiber::vector_space(dim, std::move(elements));
}

/// Tensor product of isomorphisms (Kronecker / product bijection).
inline Iso tensor_iso(std::span<const Iso> isos, FiberTheory theory) {
  if (isos.empty()) return Iso::identity(theory, 1);
  for (const auto& f : isos)
    if (f.theory() != theory) throw DomainError("tensor of isomorphisms from mixed theories");
  if (theory == FiberTheory::FiniteBijection) {
    std::vector<std::size_t> m{0};
    for (const auto& f : isos) {
      std::vector<std::size_t> next;
      next.reserve(m.size() * f.dim());
      for (auto prefix : m)
        for (std::size_t i = 0; i < f.dim(); ++i) next.push_back(prefix * f.dim() + f.bijection()(i));
      m = std::move(next);
    }
    return Iso(Bijection(std::move(m)));
  }
  Matrix acc = Matrix::identity(1);
  for (const auto& f : isos) acc = kronecker(acc, f.matrix());
  return Iso(std::move(acc), Iso::Trusted{});
}

/// Symmetric-monoidal reordering of tensor factors. The source is the tensor
/// of factors with dimensions `dims` in the given order; the target places
/// source factor `order[t]` at position t.
inline Iso reorder_iso(FiberTheory theory, std::span<const std::size_t> dims,
                       std::span<const std::size_t> order) {
  const auto k = dims.size();
  if (order.size() != k) throw DomainError("reorder: permutation size mismatch");
  std::vector<bool> seen(k, false);
  for (auto o : order) {
    if (o >= k || seen[o]) throw DomainError("reorder: not a permutation");
    seen[o] = true;
  }
  std::size_t total = 1;
  for (auto d : dims) total *= d;
  std::vector<std::size_t> image(total);
  std::vector<std::size_t> digits(k);
  for (std::size_t src = 0; src < total; ++src) {
    auto rest = src;
    for (std::size_t f = k; f-- > 0;) {
      digits[f] = rest % dims[f];
      rest /= dims[f];
    }
    std::size_t tgt = 0;
    for (std::size_t t = 0; t < k; ++t) tgt = tgt * dims[order[t]] + digits[order[t]];
    image[src] = tgt;
  }
  if (theory == FiberTheory::FiniteBijection) return Iso(Bijection(std::move(image)));
  Matrix m(total, total);
  for (std::size_t src = 0; src < total; ++src) m(image[src], src) = 1;
  return Iso(std::move(m), Iso::Trusted{});
}

/// Convenience overload working from the fibers themselves.
inline Iso reorder_iso(FiberTheory theory, std::span<const Fiber> fibers, std::span<const std::size_t> order) {
  std::vector<std::size_t> dims;
  for (const auto& f : fibers) dims.push_back(f.dim());
  return reorder_iso(theory, std::span<const std::size_t>(dims), order);
}

}  // namespace fact
