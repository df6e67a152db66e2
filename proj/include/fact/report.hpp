#pragma once

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "fact/configuration.hpp"
#include "fact/surjection.hpp"

namespace fact {

/// One failed law instance.
struct Violation {
  std::string law;
  std::vector<Surjection> surjections;
  std::vector<std::string> point;  // labels of the base point
  std::string detail;
  std::string context;             // e.g. catalog map name; may be empty
  std::vector<std::string> involves;  // datum keys (see datum_key) used by the instance

  bool mentions(const std::string& key) const {
    return std::find(involves.begin(), involves.end(), key) != involves.end();
  }

  friend bool operator<(const Violation& a, const Violation& b) {
    return std::tie(a.context, a.law, a.surjections, a.point, a.detail) <
           std::tie(b.context, b.law, b.surjections, b.point, b.detail);
  }
  friend bool operator==(const Violation& a, const Violation& b) {
    return std::tie(a.context, a.law, a.surjections, a.point, a.detail, a.involves) ==
           std::tie(b.context, b.law, b.surjections, b.point, b.detail, b.involves);
  }
};

/// Datum keys name individual pieces of structure data, e.g.
/// "d[1,1,2]@(p,p,q)", "nu[1,1]@(p)", "fiber@(p,q)", "map@(p,q)".
inline std::string datum_key(const std::string& kind, const Surjection* s, const Tuple& x,
                             const Variety& X) {
  return kind + (s ? s->to_string() : std::string()) + "@" + format_tuple(x, X);
}

inline std::vector<std::string> labels_of(const Tuple& x, const Variety& X) {
  std::vector<std::string> out;
  for (auto c : x) out.push_back(X.label(c));
  return out;
}

class ValidationReport {
 public:
  void add(Violation v) { records_.push_back(std::move(v)); }

  void merge(const ValidationReport& other, const std::string& context = {}) {
    for (auto v : other.records_) {
      if (!context.empty() && v.context.empty()) v.context = context;
      records_.push_back(std::move(v));
    }
  }

  bool empty() const { return records_.empty(); }
  std::size_t size() const { return records_.size(); }
  const std::vector<Violation>& records() const { return records_; }

  /// Deterministic order independent of evaluation order.
  void sort() { std::stable_sort(records_.begin(), records_.end()); }

  bool mentions(const std::string& key) const {
    return std::any_of(records_.begin(), records_.end(), [&](const Violation& v) { return v.mentions(key); });
  }

  std::size_t count(const std::string& law) const {
    return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(),
                                                  [&](const Violation& v) { return v.law == law; }));
  }

  friend std::ostream& operator<<(std::ostream& os, const ValidationReport& r) {
    if (r.empty()) return os << "ok: no violations\n";
    os << r.size() << " violation(s)\n";
    for (const auto& v : r.records_) {
      os << "  " << v.law;
      if (!v.context.empty()) os << " <" << v.context << ">";
      for (const auto& s : v.surjections) os << ' ' << s;
      os << " at (";
      for (std::size_t i = 0; i < v.point.size(); ++i) os << (i ? "," : "") << v.point[i];
      os << "): " << v.detail << '\n';
    }
    return os;
  }

 private:
  std::vector<Violation> records_;
};

/// Thrown by constructions whose input fails validation; carries the report.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, ValidationReport report)
      : std::runtime_error(render(what, report)), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  static std::string render(const std::string& what, const ValidationReport& r) {
    std::ostringstream os;
    os << what << ": " << r;
    return os.str();
  }
  ValidationReport report_;
};

}  // namespace fact
