// Convergence study driver. Settings come from an optional config file and
// are overridden by command-line flags of the same name.

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "cutfem/config.hpp"
#include "cutfem/forms.hpp"
#include "cutfem/geometry.hpp"
#include "cutfem/mesh.hpp"
#include "cutfem/study.hpp"

namespace {

std::string fmt_eoc(double v) { return std::isfinite(v) ? fmt::format("{:.2f}", v) : "-"; }

void print_table(const cutfem::ErrorReport& rep) {
  std::cout << fmt::format("k={} r={} radius-mult={} nu={} hash={}\n", rep.k, rep.r, rep.radius_multiplier, rep.nu,
                           rep.config_hash);
  std::cout << fmt::format("{:>5} {:>10} {:>10} {:>12} {:>6} {:>12} {:>6} {:>8} {:>9}\n", "level", "tau", "h", "ev",
                           "eoc", "ep", "eoc", "dofs", "time[s]");
  for (const auto& l : rep.levels) {
    if (!l.ok) {
      std::cout << fmt::format("{:>5} FAILED: {}\n", l.level, l.failure);
      continue;
    }
    std::cout << fmt::format("{:>5} {:>10.4g} {:>10.4g} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>8} {:>9.1f}\n", l.level,
                             l.tau, l.h, l.ev, fmt_eoc(l.eoc_v), l.ep, fmt_eoc(l.eoc_p), l.dofs, l.seconds);
  }
  std::cout << fmt::format("wall time {:.1f}s\n", rep.wall_seconds);
}

nlohmann::json failure_summary(const cutfem::ErrorReport& rep) {
  nlohmann::json j;
  j["status"] = "failed";
  j["config_hash"] = rep.config_hash;
  j["failures"] = nlohmann::json::array();
  for (const auto& l : rep.levels) {
    if (!l.ok) j["failures"].push_back({{"level", l.level}, {"message", l.failure}});
  }
  return j;
}

void dump_level(const cutfem::StudyConfig& cfg, int level, const std::string& mesh_path,
                const std::string& quad_path, const std::string& matrix_path) {
  const cutfem::LevelSetup setup(cfg, level);
  if (!mesh_path.empty()) {
    std::ofstream os(mesh_path);
    setup.mesh().dump(os);
  }
  if (!quad_path.empty()) {
    std::ofstream os(quad_path);
    setup.geometry().dump_quadrature(os);
  }
  if (!matrix_path.empty()) {
    std::ofstream os(matrix_path);
    cutfem::FormAssembler::dump_coordinates(os, setup.forms().linear_operator().total());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Convergence study for the unfitted Navier-Stokes solver"};
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value config file")->check(CLI::ExistingFile);

  std::map<std::string, std::string> flags;
  for (const auto& key : cutfem::config_keys()) app.add_option("--" + key, flags[key]);

  std::string dump_mesh, dump_quad, dump_matrix;
  app.add_option("--dump-mesh", dump_mesh, "write the finest-level mesh and exit");
  app.add_option("--dump-quadrature", dump_quad, "write the finest-level cut quadrature and exit");
  app.add_option("--dump-matrix", dump_matrix, "write the finest-level linear spatial operator and exit");
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  CLI11_PARSE(app, argc, argv);

  cutfem::StudyConfig cfg;
  try {
    if (!config_path.empty()) cutfem::read_config_file(config_path, cfg);
    for (const auto& key : cutfem::config_keys()) {
      if (app.count("--" + key) > 0) cutfem::apply_setting(cfg, key, flags[key]);
    }
    cfg.validate();
    if (cfg.k + 1 != cfg.r) {
      std::cerr << fmt::format("note: (k, r) = ({}, {}) is not one of the standard pairings (1, 2) and (2, 3)\n", cfg.k,
                               cfg.r);
    }
  } catch (const std::exception& e) {
    std::cout << nlohmann::json{{"status", "invalid-config"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  if (print_config) {
    std::cout << cfg.canonical();
    return 0;
  }
  if (!dump_mesh.empty() || !dump_quad.empty() || !dump_matrix.empty()) {
    dump_level(cfg, cfg.levels.back(), dump_mesh, dump_quad, dump_matrix);
    return 0;
  }

  cutfem::ErrorReport rep;
  try {
    rep = cutfem::run_study(cfg, cfg.jobs == 1 ? &std::cerr : nullptr);
  } catch (const std::exception& e) {
    std::cout << nlohmann::json{{"status", "failed"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  print_table(rep);
  if (!rep.all_ok()) {
    std::cout << failure_summary(rep).dump() << "\n";
    return 1;
  }
  return 0;
}
