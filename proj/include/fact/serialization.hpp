#pragma once

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "fact/universal.hpp"

namespace fact {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;

/// Malformed input. Syntax errors carry a 1-based line and column; semantic
/// errors carry the JSON pointer of the offending value.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t column)
      : std::runtime_error("parse error at line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + msg),
        line_(line), column_(column) {}
  ParseError(const std::string& msg, const std::string& path)
      : std::runtime_error("parse error at " + (path.empty() ? std::string("/") : path) + ": " + msg), path_(path) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& path() const { return path_; }

 private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
  std::string path_;
};

namespace io {

struct Cursor {
  const Json& value;
  std::string path;

  Cursor at(const std::string& key) const {
    if (!value.is_object() || !value.contains(key)) fail("missing key '" + key + "'");
    return {value.at(key), path + "/" + key};
  }
  Cursor at(std::size_t i) const { return {value.at(i), path + "/" + std::to_string(i)}; }
  bool has(const std::string& key) const { return value.is_object() && value.contains(key); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, path); }

  void keys(std::initializer_list<const char*> allowed) const {
    if (!value.is_object()) fail("expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : value.items())
      if (!ok.count(k)) fail("unknown key '" + k + "'");
  }
  const Json& array() const {
    if (!value.is_array()) fail("expected an array");
    return value;
  }
  std::size_t size() const { return array().size(); }
  std::string str() const {
    if (!value.is_string()) fail("expected a string");
    return value.get<std::string>();
  }
  std::size_t count() const {
    if (!value.is_number_unsigned()) fail("expected a non-negative integer");
    return value.get<std::size_t>();
  }
};

inline std::vector<std::string> strings(const Cursor& c) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(c.at(i).str());
  return out;
}

inline Tuple point(const Cursor& c, const Variety& X) {
  Tuple x;
  for (std::size_t i = 0; i < c.size(); ++i) {
    try {
      x.push_back(X.index_of(c.at(i).str()));
    } catch (const DomainError& e) {
      c.at(i).fail(e.what());
    }
  }
  if (x.empty()) c.fail("empty point");
  return x;
}

inline Surjection surjection(const Cursor& c) {
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < c.size(); ++i) labels.push_back(c.at(i).count());
  try {
    return Surjection::from_one_based(labels);
  } catch (const DomainError& e) {
    c.fail(e.what());
  }
}

template <class F>
auto guarded(const Cursor& c, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DomainError& e) {
    c.fail(e.what());
  }
}

inline Json labels_json(const Tuple& x, const Variety& X) {
  Json a = Json::array();
  for (auto c : x) a.push_back(X.label(c));
  return a;
}

inline Json element_json(const Element& e) { return Json(e); }

// ---- fibers and isomorphisms ----

inline Json fiber_json(const Fiber& f) {
  Json j = Json::object();
  if (f.theory() == FiberTheory::FiniteBijection) {
    j["elements"] = Json::array();
    for (const auto& e : f.elements()) j["elements"].push_back(element_json(e));
  } else {
    j["dim"] = f.dim();
    if (!f.elements().empty()) {
      j["basis"] = Json::array();
      for (const auto& e : f.elements()) j["basis"].push_back(element_json(e));
    }
  }
  return j;
}

inline std::vector<Element> elements(const Cursor& c) {
  std::vector<Element> out;
  for (std::size_t i = 0; i < c.size(); ++i) out.push_back(strings(c.at(i)));
  return out;
}

inline Fiber parse_fiber(const Cursor& c, FiberTheory t) {
  if (t == FiberTheory::FiniteBijection) {
    c.keys({"point", "elements"});
    return guarded(c, [&] { return Fiber::finite_set(elements(c.at("elements"))); });
  }
  c.keys({"point", "dim", "basis"});
  auto dim = c.at("dim").count();
  std::vector<Element> basis;
  if (c.has("basis")) basis = elements(c.at("basis"));
  return guarded(c, [&] { return Fiber::vector_space(dim, basis); });
}

/// Matrices as row-major arrays of "p/q"; bijections as [source, target]
/// element pairs in source order.
inline Json iso_json(const Iso& f, const Fiber& source, const Fiber& target) {
  if (f.is_bijection()) {
    Json pairs = Json::array();
    for (std::size_t i = 0; i < f.dim(); ++i)
      pairs.push_back(Json::array({element_json(source.elements()[i]), element_json(target.elements()[f.bijection()(i)])}));
    return {{"bijection", pairs}};
  }
  Json rows = Json::array();
  const auto& m = f.matrix();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(format_rational(m(r, c)));
    rows.push_back(std::move(row));
  }
  return {{"matrix", rows}};
}

inline Iso parse_iso(const Cursor& c, FiberTheory t, const Fiber& source, const Fiber& target) {
  if (t == FiberTheory::FiniteBijection) {
    auto pairs = c.at("bijection");
    if (pairs.size() != source.dim() || source.dim() != target.dim()) pairs.fail("bijection does not fit its fibers");
    std::vector<std::size_t> image(source.dim(), source.dim());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      auto pr = pairs.at(i);
      if (pr.size() != 2) pr.fail("expected a [source, target] pair");
      auto s = strings(pr.at(0));
      auto d = strings(pr.at(1));
      auto si = std::find(source.elements().begin(), source.elements().end(), s) - source.elements().begin();
      auto ti = std::find(target.elements().begin(), target.elements().end(), d) - target.elements().begin();
      if (static_cast<std::size_t>(si) == source.dim() || static_cast<std::size_t>(ti) == target.dim())
        pr.fail("element not in the fiber");
      if (image[si] != source.dim()) pr.fail("source element listed twice");
      image[si] = static_cast<std::size_t>(ti);
    }
    return guarded(pairs, [&] { return Iso(Bijection(image)); });
  }
  auto rows = c.at("matrix");
  const auto n = rows.size();
  Matrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = rows.at(r);
    if (row.size() != n) row.fail("matrix must be square");
    for (std::size_t k = 0; k < n; ++k) {
      auto cell = row.at(k);
      m(r, k) = guarded(cell, [&] { return parse_rational(cell.str()); });
    }
  }
  if (n != source.dim() || n != target.dim())
    rows.fail("matrix of size " + std::to_string(n) + " does not fit fibers of dims " + std::to_string(source.dim()) +
              " and " + std::to_string(target.dim()));
  return guarded(rows, [&] { return Iso(std::move(m)); });
}

// ---- structure bodies ----

inline Json header_json(const std::string& kind, const StructureData* S) {
  Json h{{"format_version", kFormatVersion}, {"kind", kind}};
  if (S) {
    h["theory"] = to_string(S->theory);
    h["variety"] = S->variety.labels();
    h["max_arity"] = S->max_arity;
  }
  return h;
}

inline void body_json(const StructureData& S, Json& out) {
  const auto k = S.k();
  Json fibers = Json::array();
  for (std::size_t n = 1; n <= S.max_arity; ++n)
    for (std::size_t c = 0; c < S.space_size(n); ++c)
      if (const auto& f = S.fibers[n - 1][c]) {
        auto j = fiber_json(*f);
        j["point"] = labels_json(decode(c, n, k), S.variety);
        fibers.push_back(std::move(j));
      }
  Json nu = Json::array();
  for (const auto& [a, t] : S.nu)
    for (std::size_t c = 0; c < t.size(); ++c)
      if (t[c]) {
        auto p = decode(c, a.target_arity(), k);
        auto j = iso_json(*t[c], S.fiber(p), S.fiber(diagonal_embed(a, p)));
        j["surjection"] = a.one_based();
        j["point"] = labels_json(p, S.variety);
        nu.push_back(std::move(j));
      }
  Json d = Json::array();
  for (const auto& [a, t] : S.d)
    for (std::size_t c = 0; c < t.size(); ++c)
      if (t[c]) {
        auto x = decode(c, a.source_arity(), k);
        auto j = iso_json(*t[c], *S.block_tensor(a, x), S.fiber(x));
        j["surjection"] = a.one_based();
        j["point"] = labels_json(x, S.variety);
        d.push_back(std::move(j));
      }
  out["fibers"] = std::move(fibers);
  out["nu"] = std::move(nu);
  out["d"] = std::move(d);
}

inline void parse_body(const Cursor& root, StructureData& S) {
  auto fibers = root.at("fibers");
  for (std::size_t i = 0; i < fibers.size(); ++i) {
    auto e = fibers.at(i);
    auto x = point(e.at("point"), S.variety);
    if (x.size() > S.max_arity) e.fail("point arity exceeds max_arity");
    if (S.fiber_ptr(x)) e.fail("duplicate fiber");
    S.set_fiber(x, parse_fiber(e, S.theory));
  }
  for (const char* kind : {"nu", "d"}) {
    const bool is_nu = std::string(kind) == "nu";
    auto list = root.at(kind);
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto e = list.at(i);
      e.keys({"surjection", "point", S.theory == FiberTheory::FiniteBijection ? "bijection" : "matrix"});
      auto a = surjection(e.at("surjection"));
      if (!a.is_canonical()) e.at("surjection").fail("surjection is not canonical");
      if (a.source_arity() > S.max_arity) e.at("surjection").fail("surjection arity exceeds max_arity");
      auto x = point(e.at("point"), S.variety);
      if (x.size() != (is_nu ? a.target_arity() : a.source_arity())) e.at("point").fail("point arity does not match the surjection");
      if (is_nu) {
        if (S.nu_ptr(a, x)) e.fail("duplicate entry");
        auto src = S.fiber_ptr(x);
        auto tgt = S.fiber_ptr(diagonal_embed(a, x));
        if (!src || !tgt) e.fail("isomorphism between missing fibers");
        S.set_nu(a, x, parse_iso(e, S.theory, *src, *tgt));
      } else {
        if (S.d_ptr(a, x)) e.fail("duplicate entry");
        if (!in_U(a, x)) e.at("point").fail("point lies outside U of the surjection");
        auto src = S.block_tensor(a, x);
        auto tgt = S.fiber_ptr(x);
        if (!src || !tgt) e.fail("isomorphism between missing fibers");
        S.set_d(a, x, parse_iso(e, S.theory, *src, *tgt));
      }
    }
  }
}

inline Json points_json(const Locus& L, const Variety& X) {
  Json a = Json::array();
  for (const auto& x : L.members()) a.push_back(labels_json(x, X));
  return a;
}

inline Locus parse_points(const Cursor& c, const Variety& X, std::size_t arity) {
  Locus L(X.size(), arity);
  for (std::size_t i = 0; i < c.size(); ++i) {
    auto x = point(c.at(i), X);
    if (x.size() != arity) c.at(i).fail("point of arity " + std::to_string(x.size()) + " in a locus of arity " + std::to_string(arity));
    L.insert(x);
  }
  return L;
}

inline Json loci_json(const WeakLoci& L, const Variety& X) {
  Json W = Json::array();
  for (const auto& w : L.W) W.push_back(points_json(w, X));
  auto keyed = [&](const std::map<Surjection, Locus>& m) {
    Json a = Json::array();
    for (const auto& [s, l] : m) a.push_back({{"surjection", s.one_based()}, {"points", points_json(l, X)}});
    return a;
  };
  return {{"W", W}, {"R", keyed(L.R)}, {"F", keyed(L.F)}};
}

inline WeakLoci parse_loci(const Cursor& c, const Variety& X, std::size_t N) {
  c.keys({"W", "R", "F"});
  WeakLoci L;
  auto W = c.at("W");
  if (W.size() != N) W.fail("expected one W locus per arity 1.." + std::to_string(N));
  for (std::size_t n = 1; n <= N; ++n) L.W.push_back(parse_points(W.at(n - 1), X, n));
  for (const char* which : {"R", "F"}) {
    auto list = c.at(which);
    auto& target = std::string(which) == "R" ? L.R : L.F;
    for (std::size_t i = 0; i < list.size(); ++i) {
      auto e = list.at(i);
      e.keys({"surjection", "points"});
      auto a = surjection(e.at("surjection"));
      if (!a.is_canonical() || a.source_arity() > N) e.at("surjection").fail("non-canonical or out-of-range surjection");
      auto arity = std::string(which) == "R" ? a.target_arity() : a.source_arity();
      if (!target.emplace(a, parse_points(e.at("points"), X, arity)).second) e.fail("duplicate locus");
    }
  }
  return L;
}

struct Header {
  std::string kind;
  FiberTheory theory = FiberTheory::RationalVector;
  std::optional<Variety> variety;
  std::size_t max_arity = 0;
};

inline Header parse_header(const Cursor& root) {
  auto h = root.at("header");
  h.keys({"format_version", "kind", "theory", "variety", "max_arity"});
  if (h.at("format_version").count() != static_cast<std::size_t>(kFormatVersion))
    h.at("format_version").fail("unsupported format version");
  Header out;
  out.kind = h.at("kind").str();
  if (h.has("theory")) out.theory = guarded(h.at("theory"), [&] { return theory_from_string(h.at("theory").str()); });
  if (h.has("variety")) out.variety = guarded(h.at("variety"), [&] { return Variety(strings(h.at("variety"))); });
  if (h.has("max_arity")) {
    out.max_arity = h.at("max_arity").count();
    if (out.max_arity == 0 || out.max_arity > 8) h.at("max_arity").fail("max_arity must lie in 1..8");
  }
  return out;
}

inline void need_structure_header(const Cursor& root, const Header& h) {
  if (!h.variety || h.max_arity == 0) root.at("header").fail("structure files need variety and max_arity");
}

inline Json map_json(const EtaleMap& phi) {
  Json table = Json::object();
  for (std::size_t i = 0; i < phi.source().size(); ++i) table[phi.source().label(i)] = phi.target().label(phi(i));
  return {{"source", phi.source().labels()}, {"target", phi.target().labels()}, {"table", table}};
}

inline EtaleMap parse_map(const Cursor& c, std::initializer_list<const char*> allowed) {
  c.keys(allowed);
  auto source = guarded(c.at("source"), [&] { return Variety(strings(c.at("source"))); });
  auto target = guarded(c.at("target"), [&] { return Variety(strings(c.at("target"))); });
  auto table = c.at("table");
  if (!table.value.is_object()) table.fail("expected an object");
  std::vector<std::size_t> m(source.size(), target.size());
  for (const auto& [k, v] : table.value.items()) {
    Cursor entry{v, table.path + "/" + k};
    auto i = guarded(entry, [&] { return source.index_of(k); });
    m[i] = guarded(entry, [&] { return target.index_of(entry.str()); });
  }
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] == target.size()) table.fail("no image for '" + source.label(i) + "'");
  return EtaleMap(source, target, m);
}

}  // namespace io

// ---- public API ----

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline std::string to_json(const StrictStructure& S) {
  Json j{{"header", io::header_json("strict", &S)}};
  io::body_json(S, j);
  return dump(j);
}

inline std::string to_json(const WeakStructure& Z) {
  Json j{{"header", io::header_json("weak", &Z)}};
  io::body_json(Z, j);
  j["loci"] = io::loci_json(Z.loci, Z.variety);
  return dump(j);
}

inline std::string to_json(const EtaleMap& phi) {
  Json j = io::map_json(phi);
  j["header"] = io::header_json("etale_map", nullptr);
  return dump(j);
}

/// Comparisons are written against the strict pullback of the target
/// structure, which is recomputed on reading.
inline std::string to_json(const UniversalFamily& F) {
  Json h = io::header_json("family", nullptr);
  h["theory"] = to_string(F.theory);
  h["max_arity"] = F.max_arity;
  Json structures = Json::array();
  for (const auto& S : F.structures) {
    Json s{{"variety", S->variety.labels()}};
    io::body_json(*S, s);
    structures.push_back(std::move(s));
  }
  Json maps = Json::array();
  for (const auto& phi : F.catalog.maps) maps.push_back(io::map_json(phi));
  Json comparisons = Json::array();
  for (std::size_t i = 0; i < F.catalog.maps.size(); ++i) {
    const auto& phi = F.catalog.maps[i];
    const auto& src = F.over(phi.source());
    std::optional<StrictStructure> tgt;
    if (F.theory == FiberTheory::FiniteBijection) tgt = pullback_strict(phi, F.over(phi.target()));
    Json entries = Json::array();
    for (std::size_t n = 1; n <= F.max_arity; ++n)
      for (std::size_t c = 0; c < src.space_size(n); ++c)
        if (const auto& f = F.comparisons[i][n - 1][c]) {
          auto x = decode(c, n, src.k());
          auto j = io::iso_json(*f, src.fiber(x), tgt ? tgt->fiber(x) : src.fiber(x));
          j["point"] = io::labels_json(x, src.variety);
          entries.push_back(std::move(j));
        }
    comparisons.push_back(std::move(entries));
  }
  Json j{{"header", h}, {"structures", structures}, {"maps", maps}, {"comparisons", comparisons}};
  return dump(j);
}

using Document = std::variant<StrictStructure, WeakStructure, UniversalFamily, EtaleMap>;

inline Json parse_json_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, column = 1;
    const auto upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(msg, line, column);
  }
}

inline Document parse_document(const std::string& text) {
  const Json j = parse_json_text(text);
  io::Cursor root{j, ""};
  auto h = io::parse_header(root);
  if (h.kind == "strict") {
    io::need_structure_header(root, h);
    root.keys({"header", "fibers", "nu", "d"});
    StrictStructure S(*h.variety, h.theory, h.max_arity);
    io::parse_body(root, S);
    return S;
  }
  if (h.kind == "weak") {
    io::need_structure_header(root, h);
    root.keys({"header", "fibers", "nu", "d", "loci"});
    WeakStructure Z(*h.variety, h.theory, h.max_arity, io::parse_loci(root.at("loci"), *h.variety, h.max_arity));
    io::parse_body(root, Z);
    return Z;
  }
  if (h.kind == "etale_map") {
    return io::parse_map(root, {"header", "source", "target", "table"});
  }
  if (h.kind == "family") {
    if (h.max_arity == 0) root.at("header").fail("family files need max_arity");
    root.keys({"header", "structures", "maps", "comparisons"});
    UniversalFamily F{{}, h.theory, h.max_arity, {}, {}};
    auto structures = root.at("structures");
    for (std::size_t i = 0; i < structures.size(); ++i) {
      auto s = structures.at(i);
      s.keys({"variety", "fibers", "nu", "d"});
      auto X = io::guarded(s.at("variety"), [&] { return Variety(io::strings(s.at("variety"))); });
      if (std::find(F.catalog.varieties.begin(), F.catalog.varieties.end(), X) != F.catalog.varieties.end())
        s.fail("duplicate variety");
      StrictStructure S(X, h.theory, h.max_arity);
      io::parse_body(s, S);
      F.catalog.varieties.push_back(X);
      F.structures.push_back(std::make_shared<const StrictStructure>(std::move(S)));
    }
    auto maps = root.at("maps");
    for (std::size_t i = 0; i < maps.size(); ++i) {
      auto phi = io::parse_map(maps.at(i), {"source", "target", "table"});
      for (const auto* X : {&phi.source(), &phi.target()})
        if (std::find(F.catalog.varieties.begin(), F.catalog.varieties.end(), *X) == F.catalog.varieties.end())
          maps.at(i).fail("map between varieties missing from the family");
      F.catalog.maps.push_back(std::move(phi));
    }
    auto comparisons = root.at("comparisons");
    if (comparisons.size() != F.catalog.maps.size()) comparisons.fail("expected one comparison per map");
    for (std::size_t i = 0; i < comparisons.size(); ++i) {
      const auto& phi = F.catalog.maps[i];
      const auto& src = F.over(phi.source());
      std::optional<StrictStructure> tgt;
      if (F.theory == FiberTheory::FiniteBijection)
        tgt = io::guarded(comparisons.at(i), [&] { return pullback_strict(phi, F.over(phi.target())); });
      auto tables = empty_maps(src);
      auto list = comparisons.at(i);
      for (std::size_t e = 0; e < list.size(); ++e) {
        auto entry = list.at(e);
        entry.keys({"point", F.theory == FiberTheory::FiniteBijection ? "bijection" : "matrix"});
        auto x = io::point(entry.at("point"), src.variety);
        if (x.size() > F.max_arity) entry.fail("point arity exceeds max_arity");
        auto& slot = tables[x.size() - 1][src.code(x)];
        if (slot) entry.fail("duplicate entry");
        const auto& fs = src.fiber(x);
        const auto& ft = tgt ? tgt->fiber(x) : fs;
        if (F.theory == FiberTheory::RationalVector) {
          auto rows = entry.at("matrix");
          if (rows.size() != fs.dim()) rows.fail("matrix does not fit the source fiber");
          slot = io::parse_iso(entry, F.theory, fs, Fiber::vector_space(rows.size()));
        } else {
          slot = io::parse_iso(entry, F.theory, fs, ft);
        }
      }
      F.comparisons.push_back(std::move(tables));
    }
    return F;
  }
  root.at("header").at("kind").fail("unknown kind '" + h.kind + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Document read_document(const std::string& path) { return parse_document(read_text(path)); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

/// One JSON record per violation, in report order.
inline Json report_json(const ValidationReport& r) {
  Json records = Json::array();
  for (const auto& v : r.records()) {
    Json s = Json::array();
    for (const auto& a : v.surjections) s.push_back(a.one_based());
    Json rec{{"law", v.law}, {"surjections", s}, {"point", v.point}, {"detail", v.detail}};
    if (!v.context.empty()) rec["context"] = v.context;
    if (!v.involves.empty()) rec["involves"] = v.involves;
    records.push_back(std::move(rec));
  }
  return {{"ok", r.empty()}, {"violations", records}};
}

}  // namespace fact
