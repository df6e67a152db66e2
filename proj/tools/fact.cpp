#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "fact/fact.hpp"

namespace {

using namespace fact;

enum Exit { kOk = 0, kViolations = 1, kUsage = 2 };

struct Options {
  std::string format = "text";
};

int emit(const ValidationReport& r, const Options& o, const std::string& what) {
  if (o.format == "json") {
    std::cout << dump(report_json(r));
  } else {
    std::cout << what << ": " << r;
  }
  return r.empty() ? kOk : kViolations;
}

template <class T>
const T& expect(const Document& doc, const std::string& what) {
  if (auto p = std::get_if<T>(&doc)) return *p;
  throw DomainError("expected " + what);
}

int cmd_validate(const std::string& file, const Options& o) {
  auto doc = read_document(file);
  if (auto S = std::get_if<StrictStructure>(&doc)) return emit(check_strict(*S), o, "strict structure");
  if (auto Z = std::get_if<WeakStructure>(&doc)) return emit(check_weak(*Z), o, "weak structure");
  if (auto F = std::get_if<UniversalFamily>(&doc)) return emit(check_universal(*F), o, "family");
  return emit(ValidationReport{}, o, "etale map");
}

int cmd_glue(const std::string& file, const std::string& out, const Options& o) {
  auto doc = read_document(file);
  const auto& Z = expect<WeakStructure>(doc, "a weak structure");
  try {
    write_text(out, to_json(glue(Z)));
  } catch (const ValidationError& e) {
    return emit(e.report(), o, "glue");
  }
  return emit(ValidationReport{}, o, "glue");
}

int cmd_pullback(const std::string& map_file, const std::string& file, const std::string& out, const Options& o) {
  auto phi = expect<EtaleMap>(read_document(map_file), "an etale map");
  auto doc = read_document(file);
  try {
    if (auto S = std::get_if<StrictStructure>(&doc)) {
      if (auto r = check_strict(*S); !r.empty()) return emit(r, o, "input");
      write_text(out, to_json(pullback_strict(phi, *S)));
    } else {
      write_text(out, to_json(pullback_weak(phi, expect<WeakStructure>(doc, "a strict or weak structure")).structure));
    }
  } catch (const ValidationError& e) {
    return emit(e.report(), o, "pullback");
  }
  return emit(ValidationReport{}, o, "pullback");
}

int cmd_naive(const std::string& map_file, const std::string& file, const Options& o) {
  auto phi = expect<EtaleMap>(read_document(map_file), "an etale map");
  auto doc = read_document(file);
  const auto& S = expect<StrictStructure>(doc, "a strict structure");
  return emit(naive_pullback(phi, S).report, o, "naive pullback");
}

int cmd_universal(const std::string& file, bool naive, const Options& o) {
  auto doc = read_document(file);
  const auto& F = expect<UniversalFamily>(doc, "a family");
  return emit(check_universal(F, naive ? PullbackMode::Naive : PullbackMode::Strict), o, "universality");
}

struct GenOptions {
  std::string example;
  std::size_t dim = 1;
  std::size_t points = 1;
  std::size_t max_arity = 2;
  std::string kind = "strict";
  std::string loci = "full";
  std::string theory = "rational_vector";
  std::string out;
};

int cmd_gen(const GenOptions& g) {
  if (g.example != "commutative") throw DomainError("unknown example '" + g.example + "'");
  auto theory = theory_from_string(g.theory);
  if (g.kind == "family") {
    write_text(g.out, to_json(commutative_family(g.dim, Catalog::all_maps(g.points), g.max_arity, theory)));
    return kOk;
  }
  auto S = commutative_structure(Variety::numbered(g.points), g.dim, g.max_arity, theory);
  if (g.kind == "strict") {
    write_text(g.out, to_json(S));
  } else if (g.kind == "weak") {
    auto loci = g.loci == "diagonal" ? WeakLoci::diagonal(g.points, g.max_arity)
                                     : WeakLoci::full(g.points, g.max_arity);
    write_text(g.out, to_json(weak_forget(S, loci)));
  } else {
    throw DomainError("--kind must be strict, weak or family");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Checks, glues and pulls back finite factorization structures."};
  app.require_subcommand(1);
  Options opt;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", opt.format, "report format")->check(CLI::IsMember({"text", "json"}));
  };

  std::string file, map_file, out;
  bool naive = false;
  GenOptions gen;

  auto* validate = app.add_subcommand("validate", "check every law of a structure, weak structure or family");
  validate->add_option("file", file)->required();
  add_format(validate);

  auto* gl = app.add_subcommand("glue", "glue a weak structure into a strict one");
  gl->add_option("file", file)->required();
  gl->add_option("-o,--output", out)->required();
  add_format(gl);

  auto* pb = app.add_subcommand("pullback", "pull a structure back along a map");
  pb->add_option("map", map_file)->required();
  pb->add_option("file", file)->required();
  pb->add_option("-o,--output", out)->required();
  add_format(pb);

  auto* nv = app.add_subcommand("naive-pullback-check", "report where the naive pullback fails");
  nv->add_option("map", map_file)->required();
  nv->add_option("file", file)->required();
  add_format(nv);

  auto* uc = app.add_subcommand("universal-check", "check a family for compatibility with pullback");
  uc->add_option("family", file)->required();
  uc->add_flag("--naive", naive, "use the naive pullback");
  add_format(uc);

  auto* ge = app.add_subcommand("gen-example", "write a built-in example");
  ge->add_option("example", gen.example)->required();
  ge->add_option("--dim", gen.dim)->required()->check(CLI::Range(1, 16));
  ge->add_option("--points", gen.points)->required()->check(CLI::Range(1, 6));
  ge->add_option("--max-arity", gen.max_arity)->required()->check(CLI::Range(1, 5));
  ge->add_option("--kind", gen.kind)->check(CLI::IsMember({"strict", "weak", "family"}));
  ge->add_option("--loci", gen.loci)->check(CLI::IsMember({"full", "diagonal"}));
  ge->add_option("--theory", gen.theory)->check(CLI::IsMember({"rational_vector", "finite_bijection"}));
  ge->add_option("-o,--output", gen.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*validate) return cmd_validate(file, opt);
    if (*gl) return cmd_glue(file, out, opt);
    if (*pb) return cmd_pullback(map_file, file, out, opt);
    if (*nv) return cmd_naive(map_file, file, opt);
    if (*uc) return cmd_universal(file, naive, opt);
    if (*ge) return cmd_gen(gen);
  } catch (const ParseError& e) {
    std::cerr << e.what() << '\n';
    return kUsage;
  } catch (const ValidationError& e) {
    std::cerr << e.what();
    return kViolations;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
