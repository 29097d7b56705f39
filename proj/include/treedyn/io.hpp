#pragma once

// JSON formats for trees, maps, extensions, extraction reports, matrices and
// polynomials.

#include "treedyn/bounds.hpp"
#include "treedyn/constructions.hpp"
#include "treedyn/markov.hpp"
#include "treedyn/polynomial.hpp"
#include "treedyn/spectral.hpp"
#include "treedyn/tree.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace treedyn::io {

using Json = nlohmann::json;

class FormatError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline std::string text(const Json& j, const char* what) {
  if (!j.is_string()) throw FormatError(std::string(what) + " must be a string");
  return j.get<std::string>();
}

inline Rational rational(const Json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw FormatError("length must be a rational string or an integer");
}

inline Json integer(const Integer& v) {
  if (v >= std::numeric_limits<long long>::min() && v <= std::numeric_limits<long long>::max())
    return Json(v.convert_to<long long>());
  return Json(v.str());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trees

inline Json to_json(const MetricTree& t) {
  Json j;
  j["vertices"] = t.vertex_ids();
  j["edges"] = Json::array();
  for (const auto& e : t.edges())
    j["edges"].push_back(
        {{"id", e.id}, {"from", t.vertex_id(e.a)}, {"to", t.vertex_id(e.b)}, {"len", to_string(e.length)}});
  return j;
}

inline MetricTree tree_from_json(const Json& j) {
  std::vector<std::string> vertices;
  const auto& vs = detail::field(j, "vertices");
  if (!vs.is_array()) throw FormatError("'vertices' must be an array");
  for (const auto& v : vs) vertices.push_back(detail::text(v, "vertex id"));
  std::vector<EdgeSpec> edges;
  const auto& es = detail::field(j, "edges");
  if (!es.is_array()) throw FormatError("'edges' must be an array");
  for (const auto& e : es)
    edges.push_back({detail::text(detail::field(e, "id"), "edge id"), detail::text(detail::field(e, "from"), "from"),
                     detail::text(detail::field(e, "to"), "to"), detail::rational(detail::field(e, "len"))});
  return MetricTree::build(std::move(vertices), std::move(edges));
}

// ---------------------------------------------------------------------------
// Maps

inline Json to_json(const MarkovMap& f, const std::vector<std::string>& S = {}) {
  const auto& t = f.tree();
  Json j;
  j["tree"] = to_json(t);
  j["marks"] = Json::array();
  for (const auto& id : t.vertex_ids()) j["marks"].push_back({{"id", id}, {"at", {{"vertex", id}}}});
  j["image"] = Json::object();
  for (std::size_t v = 0; v < t.vertex_count(); ++v) j["image"][t.vertex_id(v)] = t.vertex_id(f.image(v));
  if (!S.empty()) j["S"] = S;
  return j;
}

struct LoadedMap {
  MarkovMap map;
  std::vector<std::string> S;
};

/// Marks that are exactly the tree's vertices (same ids) keep the tree as
/// given; anything else goes through from_point_images.
inline LoadedMap map_from_json(const Json& j) {
  auto tree = tree_from_json(detail::field(j, "tree"));
  std::vector<Mark> marks;
  const auto& ms = detail::field(j, "marks");
  if (!ms.is_array()) throw FormatError("'marks' must be an array");
  bool plain = ms.size() == tree.vertex_count();
  for (const auto& mk : ms) {
    auto id = detail::text(detail::field(mk, "id"), "mark id");
    const auto& at = detail::field(mk, "at");
    if (at.contains("vertex")) {
      auto v = detail::text(at.at("vertex"), "vertex");
      plain = plain && v == id;
      marks.push_back({id, at_vertex(v)});
    } else {
      plain = false;
      marks.push_back({id, on_edge(detail::text(detail::field(at, "edge"), "edge"), detail::rational(detail::field(at, "offset")))});
    }
  }
  std::map<std::string, std::string> image;
  const auto& im = detail::field(j, "image");
  if (!im.is_object()) throw FormatError("'image' must be an object");
  for (const auto& [k, v] : im.items()) image[k] = detail::text(v, "image");

  LoadedMap out;
  if (plain) {
    std::set<std::string> ids;
    for (const auto& mk : marks) ids.insert(mk.id);
    plain = ids.size() == tree.vertex_count();
  }
  out.map = plain ? MarkovMap::create(std::move(tree), image) : from_point_images(tree, marks, image);
  if (j.contains("S"))
    for (const auto& s : j.at("S")) out.S.push_back(detail::text(s, "S entry"));
  return out;
}

// ---------------------------------------------------------------------------
// Extensions

inline Json to_json(const ExtensionResult& ext) {
  Json j = to_json(ext.map);
  j["arc_roles"] = Json::object();
  for (std::size_t i = 0; i < ext.labels.size(); ++i) j["arc_roles"][std::to_string(i)] = ext.labels[i];
  j["N"] = ext.N;
  j["n"] = ext.n;
  j["m"] = ext.m;
  j["p"] = ext.p;
  j["defect"] = ext.defect;
  j["S_base"] = ext.S_base;
  return j;
}

// ---------------------------------------------------------------------------
// Extraction reports

inline Json to_json(const ExtractionReport& r) {
  Json j = to_json(r.subtree);
  j["kind"] = r.kind;
  j["k"] = r.k;
  j["size"] = r.size;
  j["endpoints"] = r.endpoints;
  j["bound"] = r.certified_bound;
  return j;
}

// ---------------------------------------------------------------------------
// Matrices and polynomials

inline Json to_json(const SquareMatrix& m) { return Json(m.rows()); }

inline SquareMatrix matrix_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("matrix must be an array of rows");
  std::vector<std::vector<long long>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw FormatError("matrix row must be an array");
    std::vector<long long> row;
    for (const auto& x : r) {
      if (!x.is_number_integer()) throw FormatError("matrix entries must be integers");
      row.push_back(x.get<long long>());
    }
    rows.push_back(std::move(row));
  }
  return SquareMatrix::from_rows(rows);
}

inline Json to_json(const IntPoly& p) {
  Json j = Json::array();
  for (const auto& c : p.coeffs()) j.push_back(detail::integer(c));
  return j;
}

inline IntPoly poly_from_json(const Json& j) {
  if (!j.is_array()) throw FormatError("polynomial must be an array of coefficients");
  std::vector<Integer> c;
  for (const auto& x : j) {
    if (x.is_number_integer())
      c.emplace_back(x.get<long long>());
    else if (x.is_string())
      c.emplace_back(x.get<std::string>());
    else
      throw FormatError("polynomial coefficients must be integers");
  }
  return IntPoly(std::move(c));
}

// ---------------------------------------------------------------------------
// Files

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("invalid JSON in '" + path + "': " + e.what());
  }
}

inline void write_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out << dump(j);
}

}  // namespace treedyn::io
