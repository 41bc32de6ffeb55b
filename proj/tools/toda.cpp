// Command-line front end: mesh construction, covers, section densities,
// solves, verification, and export.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "toda/io.hpp"
#include "toda/toda.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace toda;

namespace {

struct VerifyFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "0:2,1:2" -> {(0,2),(1,2)}
Divisor parse_divisor(const std::string& s) {
  Divisor d;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        d.entries.emplace_back(std::stoi(item), 1);
      } else {
        d.entries.emplace_back(std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1)));
      }
    } catch (const std::logic_error&) {
      throw FormatError("bad divisor entry: " + item);
    }
  }
  std::sort(d.entries.begin(), d.entries.end());
  return d;
}

/// Generator images as JSON {"a1": [...], "b1": [...], "a2": [...], "b2": [...]}.
CoverSpec load_cover_spec(const fs::path& p) {
  const json j = io::parse_json(io::read_file(p), p.string());
  CoverSpec s;
  const char* names[4] = {"a1", "b1", "a2", "b2"};
  try {
    for (int g = 0; g < 4; ++g) s.generator_images[g] = j.at(names[g]).get<Permutation>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("cover spec: ") + e.what());
  }
  s.degree = static_cast<int>(s.generator_images[0].size());
  return s;
}

void write_json(const fs::path& p, const json& j) { io::write_atomic(p, io::dump(j)); }

Vec zero_or_field(const std::string& path, const DiscreteLaplacian& lap) {
  if (path.empty()) return Vec::Zero(lap.size());
  Vec f = io::load_field(path);
  if (f.size() != lap.size()) throw MeshMismatch("field " + path + " does not match the mesh");
  return f;
}

Vec af_field(const Vec& u, const Vec& v, const SectionDensity& d) {
  return exp_field(d.log_density + 2.0 * v - 4.0 * u);
}

// Geometry invariants checked from a mesh file alone.
std::vector<std::string> verify_mesh(const HyperbolicMesh& m) {
  std::vector<std::string> fails;
  if (m.euler_characteristic() != 2 - 2 * m.genus) fails.push_back("Euler characteristic is not 2-2g");
  const double expected = 4.0 * std::numbers::pi * (m.genus - 1);
  if (std::abs(m.volume() - expected) > 1e-3 * expected) fails.push_back("area differs from 4 pi (g-1)");
  for (int t = 0; t < m.triangle_count(); ++t) {
    if (!is_identity_element(m.boundary_holonomy(t))) {
      fails.push_back("triangle " + std::to_string(t) + " has nontrivial boundary holonomy");
      break;
    }
  }
  const DiscreteLaplacian lap(m);
  const Vec ones = Vec::Ones(lap.size());
  if (lap.apply(ones).lpNorm<Eigen::Infinity>() > 1e-10) fails.push_back("Laplacian kills no constants");
  return fails;
}

// Appends flags from a JSON config for keys not already given on the
// command line. Nested objects keyed by subcommand name override the top level.
std::vector<std::string> merge_config(std::vector<std::string> args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return args;
  if (it + 1 == args.end()) throw CLI::ArgumentMismatch("--config needs a file");
  const std::string path = *(it + 1);
  args.erase(it, it + 2);
  const json j = io::parse_json(io::read_file(path), path);
  if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
  std::string sub;
  for (std::size_t i = 1; i < args.size(); ++i)
    if (args[i].rfind("-", 0) != 0) {
      sub = args[i];
      break;
    }
  json flat = json::object();
  for (auto& [k, v] : j.items())
    if (!v.is_object()) flat[k] = v;
  if (j.contains(sub) && j[sub].is_object())
    for (auto& [k, v] : j[sub].items()) flat[k] = v;

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
    return false;
  };
  auto scalar = [](const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return io::format_double(v.get<double>());
    throw CLI::ConversionError("unsupported config value: " + v.dump());
  };
  for (auto& [k, v] : flat.items()) {
    if (given(k)) continue;
    if (v.is_boolean()) {
      if (v.get<bool>()) args.push_back("--" + k);
    } else if (v.is_array()) {
      args.push_back("--" + k);
      for (const auto& x : v) args.push_back(scalar(x));
    } else {
      args.push_back("--" + k);
      args.push_back(scalar(v));
    }
  }
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete mixed Toda system on hyperbolic surfaces"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();

  // mesh
  auto* mesh_cmd = app.add_subcommand("mesh", "build the refined Bolza surface");
  bool genus2 = false;
  int refine = 3;
  std::string out, spectral_out;
  mesh_cmd->add_flag("--genus2", genus2, "Bolza surface (the only built-in surface)")->required();
  mesh_cmd->add_option("--refine", refine, "refinement level")->check(CLI::Range(0, 8))->capture_default_str();
  mesh_cmd->add_option("-o,--output", out, "mesh JSON")->required();
  mesh_cmd->add_option("--spectral", spectral_out, "also write the spectral report here");

  // cover
  auto* cover_cmd = app.add_subcommand("cover", "build a finite cover of a mesh");
  std::string mesh_in, perm_in;
  int n = 2;
  cover_cmd->add_option("--mesh", mesh_in, "base mesh JSON")->required()->check(CLI::ExistingFile);
  cover_cmd->add_option("-n,--degree", n, "degree of the cyclic cover")->check(CLI::PositiveNumber);
  cover_cmd->add_option("--perm", perm_in, "generator images JSON")->check(CLI::ExistingFile);
  cover_cmd->add_option("-o,--output", out, "cover mesh JSON")->required();

  // section
  auto* section_cmd = app.add_subcommand("section", "synthesize a section density");
  std::string divisor_str, norm_str = "unit_mean", lift_in, base_mesh_in;
  bool zero = false;
  int degree = 1;
  int zn = 0;
  section_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  section_cmd->add_option("--divisor", divisor_str, "zeros as vertex:multiplicity,...");
  section_cmd->add_option("--normalization", norm_str, "unit_mean or unit_sup")->capture_default_str();
  section_cmd->add_flag("--zero", zero, "the zero section");
  section_cmd->add_option("--degree", degree, "degree of the zero section")->capture_default_str();
  section_cmd->add_option("--lift", lift_in, "base density to lift (balanced family)")->check(CLI::ExistingFile);
  section_cmd->add_option("--base-mesh", base_mesh_in, "base mesh of --lift")->check(CLI::ExistingFile);
  section_cmd->add_option("--zn", zn, "extra zero of the balanced lift")->capture_default_str();
  section_cmd->add_option("-o,--output", out, "density JSON (CSV written alongside)")->required();

  // solve-gauss
  auto* gauss_cmd = app.add_subcommand("solve-gauss", "solve the Gauss equation");
  std::string f_in;
  std::optional<double> f_const;
  double eta = 0.5, tol = 1e-10;
  bool monotone = false;
  gauss_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  gauss_cmd->add_option("--f", f_in, "data field CSV")->check(CLI::ExistingFile);
  gauss_cmd->add_option("--f-const", f_const, "constant data");
  gauss_cmd->add_option("--eta", eta, "admissibility parameter")->capture_default_str();
  gauss_cmd->add_option("--tol", tol, "residual tolerance")->capture_default_str();
  gauss_cmd->add_flag("--monotone", monotone, "use the monotone iteration");
  gauss_cmd->add_option("-o,--output", out, "output directory")->required();

  // solve-ricci
  auto* ricci_cmd = app.add_subcommand("solve-ricci", "solve the Ricci equation");
  std::string density_in, u_in;
  bool newton = false;
  double ricci_tol = 1e-9;
  ricci_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  ricci_cmd->add_option("--density", density_in, "density JSON")->required()->check(CLI::ExistingFile);
  ricci_cmd->add_option("--u", u_in, "conformal factor field CSV (default 0)")->check(CLI::ExistingFile);
  ricci_cmd->add_option("--degree", degree, "normal bundle degree")->capture_default_str();
  ricci_cmd->add_option("--tol", ricci_tol, "gradient tolerance")->capture_default_str();
  ricci_cmd->add_flag("--newton", newton, "polish with Newton");
  ricci_cmd->add_option("-o,--output", out, "output directory")->required();

  // solve-coupled
  auto* coupled_cmd = app.add_subcommand("solve-coupled", "run the coupled fixed-point iteration");
  CoupledConfig cfg;
  bool vtk = false;
  coupled_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  coupled_cmd->add_option("--density", density_in, "density JSON")->required()->check(CLI::ExistingFile);
  coupled_cmd->add_option("--eta", cfg.eta, "curvature bound parameter")->capture_default_str();
  coupled_cmd->add_option("--scale", cfg.scale, "density rescaling t")->capture_default_str();
  coupled_cmd->add_option("--damping", cfg.damping, "damping theta")->capture_default_str();
  coupled_cmd->add_option("--degree", cfg.degree, "normal bundle degree")->capture_default_str();
  coupled_cmd->add_option("--max-outer", cfg.max_outer_iters, "outer iteration cap")->capture_default_str();
  coupled_cmd->add_option("--tol", cfg.tol_outer, "outer tolerance")->capture_default_str();
  coupled_cmd->add_flag("--vtk", vtk, "also write fields.vtk");
  coupled_cmd->add_option("-o,--output", out, "output directory")->required();

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "re-check invariants from files");
  std::string run_dir;
  verify_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  verify_cmd->add_option("--density", density_in, "density JSON")->check(CLI::ExistingFile);
  verify_cmd->add_option("--run", run_dir, "solve-coupled output directory")->check(CLI::ExistingDirectory);

  // export
  auto* export_cmd = app.add_subcommand("export", "write VTK for external plotting");
  std::string v_in;
  export_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--density", density_in, "density JSON")->check(CLI::ExistingFile);
  export_cmd->add_option("--u", u_in, "u field CSV")->check(CLI::ExistingFile);
  export_cmd->add_option("--v", v_in, "v field CSV")->check(CLI::ExistingFile);
  double export_scale = 1.0;
  export_cmd->add_option("--scale", export_scale, "density rescaling t of the run")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  export_cmd->add_option("-o,--output", out, "VTK file")->required();

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "empirical Moser-Trudinger probe");
  int samples = 100;
  probe_cmd->add_option("--mesh", mesh_in, "mesh JSON")->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--samples", samples, "number of random fields")->check(CLI::PositiveNumber)->capture_default_str();
  probe_cmd->add_option("-o,--output", out, "report JSON (stdout if omitted)");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = merge_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const toda::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*mesh_cmd) {
      const HyperbolicMesh m = build_base_surface(refine);
      io::save_mesh(out, m);
      if (!spectral_out.empty()) write_json(spectral_out, io::to_json(spectral_gap(m, seed)));
      std::cout << "mesh: V=" << m.vertex_count() << " E=" << m.edge_count() << " F=" << m.triangle_count()
                << " chi=" << m.euler_characteristic() << " area=" << m.volume() << "\n";
    } else if (*cover_cmd) {
      const HyperbolicMesh base = io::load_mesh(mesh_in);
      const CoverSpec spec = perm_in.empty() ? CoverSpec::cyclic(n) : load_cover_spec(perm_in);
      const HyperbolicMesh c = build_cover(base, spec);
      io::save_mesh(out, c);
      std::cout << "cover: degree=" << spec.degree << " genus=" << c.genus << " V=" << c.vertex_count() << "\n";
    } else if (*section_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      const Normalization norm = parse_normalization(norm_str);
      SectionDensity d;
      if (zero) {
        d = zero_section(lap, degree);
      } else if (!lift_in.empty()) {
        if (base_mesh_in.empty()) throw CLI::RequiredError("--base-mesh");
        const HyperbolicMesh base = io::load_mesh(base_mesh_in);
        const PoissonSolver solver(lap);
        d = balanced_lift(io::load_density(lift_in), base, m, solver, zn, norm).first;
      } else {
        const PoissonSolver solver(lap);
        d = synth_density(solver, parse_divisor(divisor_str), norm);
      }
      io::save_density(out, d);
      std::cout << "section: degree=" << d.degree << "\n";
    } else if (*gauss_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      GaussProblem p;
      p.eta = eta;
      p.tol = tol;
      if (f_const) p.f = Vec::Constant(lap.size(), *f_const);
      else p.f = zero_or_field(f_in, lap);
      const GaussSolution s = monotone ? monotone_solve_gauss(lap, p) : solve_gauss(lap, p);
      const fs::path dir(out);
      io::save_field(dir / "u.csv", s.u);
      write_json(dir / "gauss.json", io::to_json(s, eta));
      std::cout << "gauss: residual=" << s.residual_norm << " iterations=" << s.iterations << "\n";
    } else if (*ricci_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      const SectionDensity d = io::load_density(density_in);
      if (d.log_density.size() != lap.size()) throw MeshMismatch("density does not match the mesh");
      RicciProblem p = make_ricci_problem(lap, zero_or_field(u_in, lap), d, degree);
      p.tol = ricci_tol;
      RicciSolution s = maximize_J(lap, p);
      if (newton) {
        const Vec w = s.w;
        s = solve_ricci_newton(lap, p, s.v);
        s.w = w;
      }
      const fs::path dir(out);
      io::save_field(dir / "v.csv", s.v);
      io::save_field(dir / "w.csv", s.w);
      write_json(dir / "ricci.json", io::to_json(s, p.c, degree));
      std::cout << "ricci: residual=" << s.residual << " iterations=" << s.iterations << "\n";
    } else if (*coupled_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      const SectionDensity d = io::load_density(density_in);
      if (d.log_density.size() != lap.size()) throw MeshMismatch("density does not match the mesh");
      const fs::path dir(out);
      json manifest = {{"mesh", io::file_entry(mesh_in)},
                       {"density", io::file_entry(density_in)},
                       {"config", io::to_json(cfg)},
                       {"seed", seed}};
      write_json(dir / "manifest.json", manifest);
      CoupledResult r = solve_coupled(m, lap, d, cfg);
      const SpectralReport sr = spectral_gap(m, seed);
      r.certificate.lambda1 = sr.lambda1;
      r.certificate.systole = sr.systole;
      io::save_field(dir / "u.csv", r.u);
      io::save_field(dir / "v.csv", r.v);
      json hist = json::array();
      for (std::size_t k = 0; k < r.increments.size(); ++k)
        hist.push_back({{"increment", r.increments[k]}, {"theta", r.thetas[k]}});
      write_json(dir / "history.json", hist);
      write_json(dir / "certificate.json", io::to_json(r.certificate));
      if (vtk) {
        const SectionDensity a = scaled_density(d, cfg.scale);
        io::write_atomic(dir / "fields.vtk",
                         io::vtk_polydata(m, {{"u", r.u}, {"v", r.v}, {"log_alpha_sq", a.log_density},
                                              {"af", af_field(r.u, r.v, a)}}));
      }
      std::cout << "coupled: sup_af=" << r.certificate.sup_af << " outer_iters=" << r.certificate.outer_iters
                << " almost_fuchsian=" << (r.certificate.almost_fuchsian ? "yes" : "no") << "\n";
    } else if (*verify_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      std::vector<std::string> fails = verify_mesh(m);
      std::optional<SectionDensity> d;
      if (!density_in.empty()) {
        d = io::load_density(density_in);
        if (d->log_density.size() != lap.size()) throw MeshMismatch("density does not match the mesh");
        if (!d->identically_zero() && poincare_lelong_residual(lap, *d) > 1e-9)
          fails.push_back("density violates the Poincare-Lelong identity");
      }
      if (!run_dir.empty()) {
        const fs::path dir(run_dir);
        const json man = io::parse_json(io::read_file(dir / "manifest.json"), "manifest");
        const json cfgj = man.at("config");
        if (!d) d = io::load_density(man.at("density").at("path").get<std::string>());
        const SectionDensity a = scaled_density(*d, cfgj.at("scale").get<double>());
        const Vec u = io::load_field(dir / "u.csv");
        const Vec v = io::load_field(dir / "v.csv");
        const json stored = io::parse_json(io::read_file(dir / "certificate.json"), "certificate");
        AFCertificate c = certify(m, lap, u, v, a, cfgj.at("eta").get<double>(), cfgj.at("degree").get<int>(),
                                  10.0 * cfgj.at("tol_outer").get<double>());
        const AFCertificate s = io::certificate_from_json(stored);
        c.t = s.t;
        c.outer_iters = s.outer_iters;
        c.lambda1 = s.lambda1;
        c.systole = s.systole;
        c.converged = c.converged && s.converged;
        c.almost_fuchsian = c.converged && c.sup_af < 1.0;
        if (io::to_json(c) != stored) fails.push_back("certificate is not reproduced from the run files");
        if (!c.converged) fails.push_back("run residuals exceed the tolerance");
        if (u.minCoeff() < -0.5 * std::log(2.0) - 1e-9 || u.maxCoeff() > 1e-9)
          fails.push_back("u leaves the box -ln2/2 <= u <= 0");
      }
      for (const auto& f : fails) std::cerr << "verify: " << f << "\n";
      if (!fails.empty()) throw VerifyFailure(std::to_string(fails.size()) + " invariant(s) violated");
      std::cout << "verify: ok\n";
    } else if (*export_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      std::vector<io::NamedField> fields;
      const Vec u = zero_or_field(u_in, lap), v = zero_or_field(v_in, lap);
      if (!u_in.empty()) fields.push_back({"u", u});
      if (!v_in.empty()) fields.push_back({"v", v});
      if (!density_in.empty()) {
        const SectionDensity d = scaled_density(io::load_density(density_in), export_scale);
        fields.push_back({"log_alpha_sq", d.log_density});
        fields.push_back({"af", af_field(u, v, d)});
      }
      io::write_atomic(out, io::vtk_polydata(m, fields));
    } else if (*probe_cmd) {
      const HyperbolicMesh m = io::load_mesh(mesh_in);
      const DiscreteLaplacian lap(m);
      const MTProbeReport r = mt_probe(lap, samples, seed);
      const json j = {{"samples", samples}, {"seed", seed}, {"max_value", r.max_value}, {"values", r.values}};
      if (out.empty()) std::cout << io::dump(j);
      else write_json(out, j);
    }
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const VerifyFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
