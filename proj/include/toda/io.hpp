#pragma once

// File formats: mesh JSON, density CSV + JSON sidecar, field CSV, solver
// and certificate JSON, run manifests, and VTK legacy ASCII. Every write
// goes to a temporary file that is renamed into place. Doubles are printed
// in shortest round-trip form so reading back is bit-exact.

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "toda/coupled.hpp"
#include "toda/errors.hpp"
#include "toda/gauss.hpp"
#include "toda/laplacian.hpp"
#include "toda/mesh.hpp"
#include "toda/ricci.hpp"
#include "toda/sections.hpp"
#include "toda/spectral.hpp"

namespace toda::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double x = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  // from_chars rejects a leading '+'
  if (first != last && *first == '+') ++first;
  const auto r = std::from_chars(first, last, x);
  if (r.ec != std::errc() || r.ptr != last) throw FormatError("bad number: " + std::string(s));
  return x;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_atomic(const fs::path& p, const std::string& content) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw FormatError("write failed: " + tmp.string());
  }
  fs::rename(tmp, p);
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

inline json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the content.
inline std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw Error("EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

/// null for non-finite values, which JSON cannot encode
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline double get_num(const json& j, const char* key) {
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.get<double>();
}

// ---- mesh ----

inline json mesh_to_json(const HyperbolicMesh& m) {
  json j;
  j["genus"] = m.genus;
  j["level"] = m.level;
  j["vertices"] = m.vertex_count();
  json tris = json::array();
  for (const auto& t : m.triangles) tris.push_back({t[0], t[1], t[2]});
  j["triangles"] = tris;
  json lens = json::array(), hol = json::array();
  for (const auto& e : m.edges) {
    lens.push_back({e.tail, e.head, e.length});
    hol.push_back({e.tail, e.head, e.holonomy.str()});
  }
  j["edge_lengths"] = lens;
  j["holonomy"] = hol;
  json pos = json::array();
  for (const auto& p : m.vertex_positions) pos.push_back({p.real(), p.imag()});
  j["vertex_positions"] = pos;
  json words = json::array();
  for (const auto& w : m.corner_words) words.push_back({w[0].str(), w[1].str(), w[2].str()});
  j["corner_words"] = words;
  json te = json::array();
  for (int t = 0; t < m.triangle_count(); ++t)
    te.push_back({m.triangle_edges[t][0], m.triangle_edges[t][1], m.triangle_edges[t][2]});
  j["triangle_edges"] = te;
  j["vertex_areas"] = m.vertex_areas;
  if (m.cover) {
    j["cover"] = {{"degree", m.cover->degree},
                  {"base_vertex_count", m.cover->base_vertex_count},
                  {"base_triangle_count", m.cover->base_triangle_count}};
  }
  return j;
}

/// Rebuilds the mesh from positions and corner words, then checks that the
/// stored lengths, holonomies, and combinatorics are reproduced exactly.
inline HyperbolicMesh mesh_from_json(const json& j) {
  try {
    const int genus = j.at("genus").get<int>();
    const int level = j.at("level").get<int>();
    const int V = j.at("vertices").get<int>();
    std::vector<Complex> pos;
    for (const auto& p : j.at("vertex_positions")) pos.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    if (static_cast<int>(pos.size()) != V) throw FormatError("vertex count mismatch");
    const auto& tris = j.at("triangles");
    const auto& words = j.at("corner_words");
    if (tris.size() != words.size()) throw FormatError("corner_words size mismatch");
    std::vector<TriangleChart> charts(tris.size());
    for (std::size_t t = 0; t < tris.size(); ++t)
      for (int c = 0; c < 3; ++c) {
        charts[t].vertices[c] = tris[t].at(c).get<int>();
        if (charts[t].vertices[c] < 0 || charts[t].vertices[c] >= V)
          throw FormatError("triangle vertex out of range");
        charts[t].words[c] = Word::parse(words[t].at(c).get<std::string>());
      }
    HyperbolicMesh m = HyperbolicMesh::assemble(genus, level, std::move(pos), charts);
    const auto& lens = j.at("edge_lengths");
    const auto& hol = j.at("holonomy");
    if (static_cast<int>(lens.size()) != m.edge_count() || hol.size() != lens.size())
      throw MeshMismatch("edge list does not match the rebuilt mesh");
    for (int e = 0; e < m.edge_count(); ++e) {
      const Edge& E = m.edges[e];
      if (lens[e].at(0).get<int>() != E.tail || lens[e].at(1).get<int>() != E.head ||
          lens[e].at(2).get<double>() != E.length ||
          hol[e].at(2).get<std::string>() != E.holonomy.str())
        throw MeshMismatch("edge " + std::to_string(e) + " does not match the rebuilt mesh");
    }
    if (j.contains("cover")) {
      const auto& c = j.at("cover");
      CoverData cd;
      cd.degree = c.at("degree").get<int>();
      cd.base_vertex_count = c.at("base_vertex_count").get<int>();
      cd.base_triangle_count = c.at("base_triangle_count").get<int>();
      if (cd.degree < 1 || cd.base_vertex_count * cd.degree != V)
        throw FormatError("inconsistent cover data");
      for (int i = 0; i < V; ++i) {
        cd.base_vertex.push_back(i % cd.base_vertex_count);
        cd.sheet.push_back(i / cd.base_vertex_count);
      }
      m.cover = std::move(cd);
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("mesh JSON: ") + e.what());
  }
}

inline void save_mesh(const fs::path& p, const HyperbolicMesh& m) { write_atomic(p, dump(mesh_to_json(m))); }

inline HyperbolicMesh load_mesh(const fs::path& p) {
  return mesh_from_json(parse_json(read_file(p), p.string()));
}

// ---- vertex fields ----

inline std::string field_csv(const Vec& f, const char* column = "value") {
  std::string s = "vertex_index,";
  s += column;
  s += '\n';
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    s += std::to_string(i);
    s += ',';
    s += format_double(f[i]);
    s += '\n';
  }
  return s;
}

inline Vec parse_field_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("vertex_index,", 0) != 0)
    throw FormatError("field CSV must start with a vertex_index header");
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw FormatError("bad CSV row: " + line);
    const long idx = std::strtol(line.c_str(), nullptr, 10);
    if (idx != static_cast<long>(vals.size())) throw FormatError("CSV rows must be in index order");
    vals.push_back(parse_double(std::string_view(line).substr(comma + 1)));
  }
  return to_vec(vals);
}

inline void save_field(const fs::path& p, const Vec& f) { write_atomic(p, field_csv(f)); }

inline Vec load_field(const fs::path& p) { return parse_field_csv(read_file(p)); }

// ---- section densities ----

/// Writes `<stem>.csv` and `<stem>.json`; `p` may name either.
inline void save_density(const fs::path& p, const SectionDensity& d) {
  fs::path csv = p, side = p;
  csv.replace_extension(".csv");
  side.replace_extension(".json");
  json j;
  j["degree"] = d.degree;
  j["c_L"] = d.c_L;
  j["normalization"] = to_string(d.normalization);
  json div = json::array();
  for (const auto& [v, m] : d.divisor.entries) div.push_back({v, m});
  j["divisor"] = div;
  j["values"] = csv.filename().string();
  write_atomic(csv, field_csv(d.log_density, "log_density"));
  write_atomic(side, dump(j));
}

inline SectionDensity load_density(const fs::path& p) {
  fs::path side = p;
  side.replace_extension(".json");
  const json j = parse_json(read_file(side), side.string());
  try {
    SectionDensity d;
    d.degree = j.at("degree").get<int>();
    d.c_L = j.at("c_L").get<double>();
    d.normalization = parse_normalization(j.at("normalization").get<std::string>());
    for (const auto& e : j.at("divisor")) d.divisor.entries.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    fs::path csv = side;
    csv.replace_extension(".csv");
    if (j.contains("values")) csv = side.parent_path() / j.at("values").get<std::string>();
    d.log_density = load_field(csv);
    d.divisor.validate(static_cast<int>(d.log_density.size()));
    return d;
  } catch (const json::exception& e) {
    throw FormatError(std::string("density JSON: ") + e.what());
  }
}

// ---- reports ----

inline json to_json(const SpectralReport& r) {
  return {{"lambda0", r.lambda0}, {"lambda1", r.lambda1}, {"systole", r.systole},
          {"volume", r.volume},   {"tol", r.tol},         {"seed", r.seed}};
}

inline SpectralReport spectral_from_json(const json& j) {
  SpectralReport r;
  r.lambda0 = j.at("lambda0").get<double>();
  r.lambda1 = j.at("lambda1").get<double>();
  r.systole = j.at("systole").get<double>();
  r.volume = j.at("volume").get<double>();
  r.tol = j.at("tol").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  return r;
}

inline json to_json(const GaussSolution& s, double eta) {
  return {{"residual", s.residual_norm},
          {"iterations", s.iterations},
          {"eta", eta},
          {"box_margin", s.box_margin}};
}

inline json to_json(const RicciSolution& s, double c, int degree) {
  return {{"J_value", num(s.J_value)},
          {"grad_norm", num(s.grad_norm)},
          {"mean_residual", s.mean_constraint_residual},
          {"residual", s.residual},
          {"iterations", s.iterations},
          {"c", c},
          {"degree", degree}};
}

inline json to_json(const AFCertificate& c) {
  return {{"sup_af", c.sup_af},
          {"gauss_residual", c.gauss_residual},
          {"ricci_residual", c.ricci_residual},
          {"mean_residual", c.mean_residual},
          {"converged", c.converged},
          {"almost_fuchsian", c.almost_fuchsian},
          {"outer_iters", c.outer_iters},
          {"t", c.t},
          {"eta", c.eta},
          {"degree", c.degree},
          {"density_degree", c.density_degree},
          {"genus", c.genus},
          {"lambda1", num(c.lambda1)},
          {"systole", num(c.systole)},
          {"admissibility_margin", c.admissibility_margin},
          {"sup_gauss_data", c.sup_gauss_data},
          {"sup_exp_minus_2u", c.sup_exp_minus_2u}};
}

inline AFCertificate certificate_from_json(const json& j) {
  AFCertificate c;
  c.sup_af = j.at("sup_af").get<double>();
  c.gauss_residual = j.at("gauss_residual").get<double>();
  c.ricci_residual = j.at("ricci_residual").get<double>();
  c.mean_residual = j.at("mean_residual").get<double>();
  c.converged = j.at("converged").get<bool>();
  c.almost_fuchsian = j.at("almost_fuchsian").get<bool>();
  c.outer_iters = j.at("outer_iters").get<int>();
  c.t = j.at("t").get<double>();
  c.eta = j.at("eta").get<double>();
  c.degree = j.at("degree").get<int>();
  c.density_degree = j.at("density_degree").get<int>();
  c.genus = j.at("genus").get<int>();
  c.lambda1 = get_num(j, "lambda1");
  c.systole = get_num(j, "systole");
  c.admissibility_margin = j.at("admissibility_margin").get<double>();
  c.sup_gauss_data = j.at("sup_gauss_data").get<double>();
  c.sup_exp_minus_2u = j.at("sup_exp_minus_2u").get<double>();
  return c;
}

inline json to_json(const CoupledConfig& c) {
  return {{"eta", c.eta},
          {"damping", c.damping},
          {"max_outer_iters", c.max_outer_iters},
          {"tol_outer", c.tol_outer},
          {"degree", c.degree},
          {"scale", c.scale},
          {"gauss_tol", c.gauss_tol},
          {"ricci_tol", c.ricci_tol},
          {"variational_every", c.variational_every}};
}

/// Manifest entry for an input file: path and git blob hash.
inline json file_entry(const fs::path& p) {
  return {{"path", p.string()}, {"sha1", git_blob_hash(read_file(p))}};
}

// ---- VTK ----

struct NamedField {
  std::string name;
  Vec values;
};

/// Legacy ASCII POLYDATA over the canonical vertex positions in the disk.
/// Triangle connectivity is combinatorial, so wrapped triangles cross the
/// fundamental domain in the picture.
inline std::string vtk_polydata(const HyperbolicMesh& m, const std::vector<NamedField>& fields) {
  std::string s = "# vtk DataFile Version 3.0\ntoda fields\nASCII\nDATASET POLYDATA\n";
  s += "POINTS " + std::to_string(m.vertex_count()) + " double\n";
  for (const auto& p : m.vertex_positions)
    s += format_double(p.real()) + ' ' + format_double(p.imag()) + " 0\n";
  s += "POLYGONS " + std::to_string(m.triangle_count()) + ' ' + std::to_string(4 * m.triangle_count()) + '\n';
  for (const auto& t : m.triangles)
    s += "3 " + std::to_string(t[0]) + ' ' + std::to_string(t[1]) + ' ' + std::to_string(t[2]) + '\n';
  if (!fields.empty()) s += "POINT_DATA " + std::to_string(m.vertex_count()) + '\n';
  for (const auto& f : fields) {
    if (f.values.size() != m.vertex_count()) throw MeshMismatch("VTK field size mismatch: " + f.name);
    s += "SCALARS " + f.name + " double 1\nLOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < f.values.size(); ++i) {
      // VTK readers choke on inf; clamp to the most negative double
      const double x = std::isfinite(f.values[i]) ? f.values[i] : std::numeric_limits<double>::lowest();
      s += format_double(x) + '\n';
    }
  }
  return s;
}

}  // namespace toda::io
