// treedyn: command-line front end for the tree dynamics library.
//
// Exit codes: 0 success, 1 a checked property failed, 2 input error.

#include "treedyn/treedyn.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <future>
#include <iostream>
#include <random>
#include <sstream>

using namespace treedyn;
using io::Json;

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

struct Globals {
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::string out;
  std::string csv;
};

void emit(const Globals& g, const Json& j) {
  if (g.out.empty())
    std::cout << io::dump(j);
  else
    io::write_file(g.out, j);
}

void emit_csv(const Globals& g, const std::string& text) {
  if (g.csv.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(g.csv);
  if (!f) throw InputError("cannot write '" + g.csv + "'");
  f << text;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    int v = std::stoi(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError("bad " + what + " '" + s + "'");
}

/// "star:n" or "comb:r".
ConstructedMap base_from_spec(const std::string& spec) {
  auto colon = spec.find(':');
  if (colon == std::string::npos) throw InputError("base must be star:n or comb:r, got '" + spec + "'");
  auto kind = spec.substr(0, colon);
  int k = parse_int(spec.substr(colon + 1), "base parameter");
  if (kind == "star") return star_map(k);
  if (kind == "star-literal") return star_map(k, StarVariant::literal);
  if (kind == "comb") {
    auto c = comb_map(k);
    return {c.map, c.S};
  }
  throw InputError("unknown base kind '" + kind + "'");
}

/// "10:160:x2", "10:50:+10", "10:50:10" or "10,20,40".
std::vector<int> parse_range(const std::string& s) {
  std::vector<int> out;
  if (s.find(':') == std::string::npos) {
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_int(item, "N"));
  } else {
    std::vector<std::string> parts;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts.size() != 3 || parts[2].empty()) throw InputError("range must be lo:hi:step, got '" + s + "'");
    int lo = parse_int(parts[0], "N"), hi = parse_int(parts[1], "N");
    bool mult = parts[2][0] == 'x';
    int step = parse_int(parts[2][0] == 'x' || parts[2][0] == '+' ? parts[2].substr(1) : parts[2], "step");
    if ((mult && step < 2) || (!mult && step < 1)) throw InputError("range step must advance");
    for (long v = lo; v <= hi; v = mult ? v * step : v + step) out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw InputError("empty N range");
  for (int N : out)
    if (N <= 6) throw InputError("N must be greater than 6, got " + std::to_string(N));
  return out;
}

io::LoadedMap load_map(const std::string& path) { return io::map_from_json(io::read_file(path)); }

EntropyMethod method_from(const std::string& s) {
  if (s == "power") return EntropyMethod::power;
  if (s == "rome") return EntropyMethod::rome;
  if (s == "both") return EntropyMethod::both;
  throw InputError("unknown method '" + s + "'");
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v == 0 ? 0.0 : v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SweepRow {
  int N;
  std::size_t arcs;
  double lambda;
  double entropy;
  Rational theta;
  bool theta_ok;
  bool primitive;
  double lower_root;
};

SweepRow sweep_row(const ConstructedMap& base, int N, double tol) {
  auto e = extend_exact(base.map, base.S, N);
  const auto& m = e.map.transition().matrix;
  SweepRow r;
  r.N = N;
  r.arcs = e.map.arc_count();
  r.lambda = perron(m, tol);
  r.entropy = log_plus(r.lambda);
  auto td = theta_defect(e);
  r.theta = td.theta;
  r.theta_ok = td.ok;
  r.primitive = matrix_profile(m).primitive;
  r.lower_root = lower_bound_root(e.n, N);
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov maps on metric trees: entropy, constructions and bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--tol", g.tol, "numerical tolerance")->capture_default_str();
  app.add_option("--seed", g.seed, "seed for randomized runs")->capture_default_str();
  app.add_option("--out", g.out, "output JSON file (default stdout)");
  app.add_option("--csv", g.csv, "output CSV file (default stdout)");

  int exit_code = 0;

  // make ---------------------------------------------------------------
  auto* make = app.add_subcommand("make", "build a tree or map (star, star-literal, comb, ye, extend)");
  std::string make_kind;
  int make_n = 3, make_r = 2, make_N = 10, make_i = 0;
  std::vector<int> make_sig;
  std::string make_base = "star:2";
  make->add_option("kind", make_kind, "star | star-literal | comb | ye | extend")->required();
  make->add_option("--n", make_n, "star legs");
  make->add_option("--r", make_r, "comb depth");
  make->add_option("--sig", make_sig, "Ye tree signature")->delimiter(',');
  make->add_option("--i", make_i, "extra Ye tree endpoints");
  make->add_option("--N", make_N, "extension parameter");
  make->add_option("--base", make_base, "extension base star:n or comb:r");
  make->callback([&] {
    if (make_kind == "star") {
      auto s = star_map(make_n);
      emit(g, io::to_json(s.map, s.S));
    } else if (make_kind == "star-literal") {
      auto s = star_map(make_n, StarVariant::literal);
      emit(g, io::to_json(s.map, s.S));
    } else if (make_kind == "comb") {
      auto c = comb_map(make_r);
      emit(g, io::to_json(c.map, c.S));
    } else if (make_kind == "ye") {
      emit(g, io::to_json(make_ye_tree(make_sig, make_i)));
    } else if (make_kind == "extend") {
      auto b = base_from_spec(make_base);
      emit(g, io::to_json(extend_exact(b.map, b.S, make_N)));
    } else {
      throw InputError("unknown kind '" + make_kind + "'");
    }
  });

  // entropy ------------------------------------------------------------
  auto* ent = app.add_subcommand("entropy", "topological entropy of a map");
  std::string ent_map, ent_method = "power";
  ent->add_option("--map", ent_map, "map file")->required();
  ent->add_option("--method", ent_method, "power | rome | both")->capture_default_str();
  ent->callback([&] {
    auto f = load_map(ent_map).map;
    std::cout << fmt("%.9f", entropy(f, method_from(ent_method), g.tol)) << "\n";
  });

  // check --------------------------------------------------------------
  auto* chk = app.add_subcommand("check", "check dynamical properties; exit 1 if any fails");
  std::string chk_map;
  std::vector<std::string> chk_props{"exact"};
  chk->add_option("--map", chk_map, "map file")->required();
  chk->add_option("--props", chk_props, "exact, transitive, primitive, zero-entropy, ps")->delimiter(',');
  chk->callback([&] {
    auto lm = load_map(chk_map);
    auto d = dynamical_properties(lm.map);
    auto p = matrix_profile(lm.map.transition().matrix);
    for (const auto& prop : chk_props) {
      bool ok;
      std::string detail;
      if (prop == "exact") {
        ok = d.exact;
      } else if (prop == "transitive") {
        ok = d.transitive;
      } else if (prop == "primitive") {
        ok = p.primitive;
      } else if (prop == "zero-entropy") {
        ok = entropy(lm.map, EntropyMethod::power, g.tol) == 0.0;
      } else if (prop == "ps") {
        if (lm.S.empty()) throw InputError("map file has no S sequence for the ps check");
        auto rep = check_ps_linear(lm.map, lm.S);
        ok = rep.ok;
        for (const auto& fl : rep.failures) detail += std::string(" (") + fl.condition + ": " + fl.witness + ")";
      } else {
        throw InputError("unknown property '" + prop + "'");
      }
      std::cout << prop << ": " << (ok ? "ok" : "FAILED") << detail << "\n";
      if (!ok) exit_code = 1;
    }
  });

  // extend -------------------------------------------------------------
  auto* ext = app.add_subcommand("extend", "build the exact extension g_N of a (P,S)-linear map");
  std::string ext_base, ext_map;
  int ext_N = 10;
  ext->add_option("--base", ext_base, "star:n or comb:r");
  ext->add_option("--map", ext_map, "map file with an S sequence");
  ext->add_option("--N", ext_N, "extension parameter (> 6)")->required();
  ext->callback([&] {
    ConstructedMap b;
    if (!ext_map.empty()) {
      auto lm = load_map(ext_map);
      if (lm.S.empty()) throw InputError("map file has no S sequence");
      b = {lm.map, lm.S};
    } else if (!ext_base.empty()) {
      b = base_from_spec(ext_base);
    } else {
      throw InputError("extend needs --base or --map");
    }
    auto e = extend_exact(b.map, b.S, ext_N);
    auto td = theta_defect(e);
    std::cerr << "arcs " << e.map.arc_count() << ", entropy " << fmt("%.9f", entropy(e.map, EntropyMethod::power, g.tol))
              << ", theta " << to_string(td.theta) << " (limit " << to_string(td.limit) << ")\n";
    emit(g, io::to_json(e));
    if (!matrix_profile(e.map.transition().matrix).primitive || !td.ok) exit_code = 1;
  });

  // sweep --------------------------------------------------------------
  auto* sw = app.add_subcommand("sweep", "entropy sweep of g_N over a range of N");
  std::string sw_base, sw_range;
  sw->add_option("--base", sw_base, "star:n or comb:r")->required();
  sw->add_option("--N", sw_range, "lo:hi:xk, lo:hi:+k or a comma list")->required();
  sw->callback([&] {
    auto b = base_from_spec(sw_base);
    auto Ns = parse_range(sw_range);
    std::vector<std::future<SweepRow>> jobs;
    for (int N : Ns) jobs.push_back(std::async(std::launch::async, [&b, N, tol = g.tol] { return sweep_row(b, N, tol); }));
    std::ostringstream csv;
    csv << "N,arcs,lambda,entropy,theta,primitive,lower_root\n";
    for (auto& j : jobs) {
      auto r = j.get();
      csv << r.N << ',' << r.arcs << ',' << fmt("%.12f", r.lambda) << ',' << fmt("%.12f", r.entropy) << ','
          << to_string(r.theta) << ',' << (r.primitive ? "true" : "false") << ',' << fmt("%.12f", r.lower_root) << "\n";
      if (!r.primitive || !r.theta_ok) exit_code = 1;
    }
    emit_csv(g, csv.str());
  });

  // bound --------------------------------------------------------------
  auto* bnd = app.add_subcommand("bound", "endpoint-count bound of a tree, or the P-Lipschitz bound of g_N");
  std::string bnd_tree, bnd_base;
  int bnd_N = 10;
  double bnd_L2 = 4;
  bnd->add_option("--tree", bnd_tree, "tree file (extraction report)");
  bnd->add_option("--base", bnd_base, "star:n or comb:r (P-Lipschitz profile of g_N)");
  bnd->add_option("--N", bnd_N, "extension parameter");
  bnd->add_option("--L2", bnd_L2, "Lipschitz constant of the attached part")->capture_default_str();
  bnd->callback([&] {
    if (!bnd_tree.empty()) {
      auto t = io::tree_from_json(io::read_file(bnd_tree));
      auto r = extract_and_bound(t);
      emit(g, io::to_json(r));
      if (endpoint_count(t) >= 3 && !branch_count_check(t)) exit_code = 1;
      return;
    }
    if (bnd_base.empty()) throw InputError("bound needs --tree or --base");
    if (!(bnd_L2 > 0)) throw InputError("--L2 must be positive");
    auto b = base_from_spec(bnd_base);
    auto e = extend_exact(b.map, b.S, bnd_N);
    double lambda = perron(e.map.transition().matrix, g.tol);
    std::set<std::size_t> defect(e.defect.begin(), e.defect.end());
    LipschitzSpec spec{e.map.transition().adjacency, std::vector<double>(e.map.arc_count(), lambda), {}};
    for (std::size_t a = 0; a < e.map.arc_count(); ++a) {
      if (defect.count(a))
        spec.constants[a] = 2 * lambda * bnd_L2;
      else
        spec.subsystem.push_back(a);
    }
    auto pb = p_lipschitz_bound(spec);
    auto td = theta_defect(e);
    Json j;
    j["N"] = bnd_N;
    j["lambda"] = lambda;
    j["entropy"] = log_plus(lambda);
    j["theta"] = to_string(pb.theta);
    j["theta_limit"] = to_string(td.limit);
    j["theta_ok"] = td.ok;
    j["bound"] = pb.bound;
    emit(g, j);
    if (!td.ok) exit_code = 1;
  });

  // witness ------------------------------------------------------------
  auto* wit = app.add_subcommand("witness", "iterate a seed segment until it covers the tree");
  std::string wit_map, wit_from, wit_to;
  long wit_arc = -1;
  std::size_t wit_cap = 0;
  wit->add_option("--map", wit_map, "map file")->required();
  wit->add_option("--arc", wit_arc, "seed arc index (default: random from --seed)");
  wit->add_option("--from", wit_from, "seed start in [0,1], rational");
  wit->add_option("--to", wit_to, "seed end in [0,1], rational");
  wit->add_option("--cap", wit_cap, "step cap (default 50 x arc count)");
  wit->callback([&] {
    auto f = load_map(wit_map).map;
    std::mt19937_64 rng(g.seed);
    std::size_t arc;
    Rational lo, hi;
    if (wit_arc >= 0) {
      arc = static_cast<std::size_t>(wit_arc);
      if (arc >= f.arc_count()) throw InputError("--arc out of range");
    } else {
      arc = std::uniform_int_distribution<std::size_t>(0, f.arc_count() - 1)(rng);
    }
    if (!wit_from.empty() || !wit_to.empty()) {
      if (wit_from.empty() || wit_to.empty()) throw InputError("--from and --to go together");
      lo = parse_rational(wit_from);
      hi = parse_rational(wit_to);
    } else {
      int q = std::uniform_int_distribution<int>(2, 64)(rng);
      int a = std::uniform_int_distribution<int>(0, q - 1)(rng);
      lo = Rational(a, q);
      hi = Rational(a + 1, q);
    }
    std::size_t cap = wit_cap ? wit_cap : 50 * f.arc_count();
    auto r = exactness_witness(f, SegmentSet::single(f.arc_count(), arc, lo, hi), cap);
    std::ostringstream csv;
    csv << "step,arcs_full,total_measure\n";
    for (const auto& s : r.trace) csv << s.step << ',' << s.arcs_full << ',' << fmt("%.12g", s.total_measure) << "\n";
    emit_csv(g, csv.str());
    if (r.covered_in)
      std::cerr << "covered in " << *r.covered_in << " steps\n";
    else
      std::cerr << "not covered within " << cap << " steps\n";
    if (!r.covered_in) exit_code = 1;
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return exit_code;
}
