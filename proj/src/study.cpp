#include "cutfem/study.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cutfem {

using Eigen::VectorXd;

ErrorNorms compute_l2l2_error(const TaylorHoodSpace& space, const CutGeometry& error_geometry,
                              const TemporalBasis& basis, const Trajectory& trajectory,
                              const SpaceTimeVector& velocity, const SpaceTimeScalar& pressure) {
  const auto& mesh = space.mesh();
  if (&mesh != &error_geometry.mesh()) throw std::invalid_argument("compute_l2l2_error: mesh mismatch");
  if (trajectory.k != basis.degree()) throw std::invalid_argument("compute_l2l2_error: temporal degree mismatch");
  const int n = space.total_dofs();

  struct Tables {
    const VolumeRule* rule;
    BasisTable vel;
    BasisTable pres;
    std::vector<int> vel_dofs;
    std::vector<int> pres_dofs;
  };
  std::vector<Tables> cells;
  for (int id = 0; id < mesh.num_cells(); ++id) {
    const CellId c{id};
    if (!error_geometry.has_fluid(c)) continue;
    const VolumeRule& rule = error_geometry.volume(c);
    if (rule.points.empty()) continue;
    cells.push_back({&rule, space.velocity().tabulate(c, rule.points), space.pressure().tabulate(c, rule.points),
                     space.velocity().cell_dofs(c), space.pressure().cell_dofs(c)});
  }

  const Rule1D tq = gauss_legendre(basis.degree() + 3);
  double ev2 = 0.0;
  double ep2 = 0.0;
  std::vector<double> diff;
  for (const SlabSolution& sol : trajectory.slabs) {
    if (sol.state.size() < static_cast<Eigen::Index>(basis.size()) * n) {
      throw std::invalid_argument("compute_l2l2_error: trajectory does not match the space");
    }
    for (std::size_t iq = 0; iq < tq.size(); ++iq) {
      const double t = sol.slab.time(tq.points[iq]);
      const double wt = sol.slab.tau() * tq.weights[iq];
      const VectorXd u = evaluate_in_time(basis, sol.state.head(static_cast<Eigen::Index>(basis.size()) * n), n,
                                          tq.points[iq]);
      double vel_sq = 0.0;
      double area = 0.0;
      double mean = 0.0;
      diff.clear();
      for (const auto& c : cells) {
        for (std::size_t q = 0; q < c.rule->points.size(); ++q) {
          const auto qi = static_cast<Eigen::Index>(q);
          const Point& x = c.rule->points[q];
          const double w = c.rule->weights[q];
          double vx = 0.0, vy = 0.0, p = 0.0;
          for (std::size_t l = 0; l < c.vel_dofs.size(); ++l) {
            const double phi = c.vel.value(qi, static_cast<Eigen::Index>(l));
            vx += phi * u[space.ux_offset() + c.vel_dofs[l]];
            vy += phi * u[space.uy_offset() + c.vel_dofs[l]];
          }
          for (std::size_t l = 0; l < c.pres_dofs.size(); ++l) {
            p += c.pres.value(qi, static_cast<Eigen::Index>(l)) * u[space.p_offset() + c.pres_dofs[l]];
          }
          const Eigen::Vector2d ve = velocity(x, t);
          vel_sq += w * ((ve.x() - vx) * (ve.x() - vx) + (ve.y() - vy) * (ve.y() - vy));
          const double d = pressure(x, t) - p;
          diff.push_back(d);
          mean += w * d;
          area += w;
        }
      }
      mean /= area;
      double p_sq = 0.0;
      std::size_t idx = 0;
      for (const auto& c : cells) {
        for (std::size_t q = 0; q < c.rule->points.size(); ++q, ++idx) {
          const double d = diff[idx] - mean;
          p_sq += c.rule->weights[q] * d * d;
        }
      }
      ev2 += wt * vel_sq;
      ep2 += wt * p_sq;
    }
  }
  return {std::sqrt(ev2), std::sqrt(ep2)};
}

std::vector<double> compute_eoc(const std::vector<double>& errors) {
  std::vector<double> out(errors.size(), kUndefined);
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double a = errors[i - 1];
    const double b = errors[i];
    if (std::isfinite(a) && std::isfinite(b) && a > 0.0 && b > 0.0) out[i] = std::log2(a / b);
  }
  return out;
}

bool ErrorReport::all_ok() const {
  return std::all_of(levels.begin(), levels.end(), [](const LevelResult& l) { return l.ok; });
}

std::vector<double> ErrorReport::velocity_errors() const {
  std::vector<double> e;
  for (const auto& l : levels) e.push_back(l.ev);
  return e;
}

std::vector<double> ErrorReport::pressure_errors() const {
  std::vector<double> e;
  for (const auto& l : levels) e.push_back(l.ep);
  return e;
}

LevelSetup::LevelSetup(const StudyConfig& config, int level)
    : mesh_(level),
      geometry_(mesh_, config.disk, config.volume_degree(), config.surface_degree()),
      error_geometry_(mesh_, config.disk, config.volume_degree() + 2, config.surface_degree()),
      submesh_(build_stabilization_submesh(mesh_, config.disk, config.radius_multiplier)),
      space_(mesh_, config.r),
      activity_(compute_dof_activity(space_, geometry_, submesh_)),
      forms_(space_, geometry_, submesh_, config.forms()),
      system_(forms_, activity_, config.k, config.convection),
      exact_(config.nu) {}

FlowData LevelSetup::data() const {
  const ExactSolution exact = exact_;
  const RigidDisk disk = geometry_.disk();
  return {[exact](const Point& x, double t) { return exact.source(x, t); },
          [exact, disk](const Point& x, double t) { return exact.boundary_data(x, t, disk); }};
}

VectorXd LevelSetup::interpolant(double t) const {
  return interpolate(
      space_, [&](const Point& x) { return exact_.velocity(x, t); }, [&](const Point& x) { return exact_.pressure(x, t); });
}

Trajectory interpolate_trajectory(const LevelSetup& setup, const StudyConfig& config, int slabs) {
  const SlabSystem& sys = setup.system();
  const int n = sys.spatial_size();
  Trajectory traj;
  traj.k = sys.basis().degree();
  for (const Slab& slab : uniform_slabs(config.final_time, slabs)) {
    SlabSolution sol;
    sol.slab = slab;
    sol.state = VectorXd::Zero(sys.size());
    for (int a = 0; a < sys.basis().size(); ++a) {
      sol.state.segment(static_cast<Eigen::Index>(a) * n, n) = setup.interpolant(slab.time(sys.basis().nodes()[a]));
    }
    traj.slabs.push_back(std::move(sol));
  }
  return traj;
}

LevelResult run_level(const StudyConfig& config, int level, Trajectory* trajectory) {
  const auto start = std::chrono::steady_clock::now();
  LevelResult res;
  res.level = level;
  try {
    config.validate();
    res.tau = config.tau0 / std::ldexp(1.0, level);
    res.slabs = config.slabs(level);
    const LevelSetup setup(config, level);
    res.h = setup.mesh().diameter();
    res.dofs = setup.system().size();
    Trajectory traj = advance(setup.system(), setup.data(), setup.interpolant(0.0), config.final_time, res.slabs,
                              config.newton);
    for (const auto& s : traj.slabs) {
      res.max_newton_iterations = std::max(res.max_newton_iterations, s.report.iterations);
      res.max_linear_residual = std::max(res.max_linear_residual, s.report.max_linear_residual);
      res.log.push_back({s.slab.index, s.report.iterations, s.report.final_residual, s.report.max_linear_residual,
                         s.report.solve_seconds});
    }
    const ExactSolution& ex = setup.exact();
    const ErrorNorms e = compute_l2l2_error(
        setup.space(), setup.error_geometry(), setup.system().basis(), traj,
        [&](const Point& x, double t) { return ex.velocity(x, t); },
        [&](const Point& x, double t) { return ex.pressure(x, t); });
    res.ev = e.velocity;
    res.ep = e.pressure;
    res.ok = std::isfinite(res.ev) && std::isfinite(res.ep);
    if (!res.ok) res.failure = "non-finite error norm";
    if (trajectory) *trajectory = std::move(traj);
  } catch (const std::exception& e) {
    res.ok = false;
    res.failure = e.what();
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

ErrorReport run_study(const StudyConfig& config, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  ErrorReport rep;
  rep.k = config.k;
  rep.r = config.r;
  rep.radius_multiplier = config.radius_multiplier;
  rep.nu = config.nu;
  rep.config_hash = config.hash();

  const int finest = config.levels.back();
  Trajectory finest_traj;
  auto solve = [&](int level) {
    return run_level(config, level, (!config.snapshot.empty() && level == finest) ? &finest_traj : nullptr);
  };
  if (config.jobs > 1) {
    std::vector<std::future<LevelResult>> jobs;
    for (std::size_t i = 0; i < config.levels.size(); ++i) {
      jobs.push_back(std::async(std::launch::async, solve, config.levels[i]));
      if (jobs.size() >= static_cast<std::size_t>(config.jobs) || i + 1 == config.levels.size()) {
        for (auto& j : jobs) rep.levels.push_back(j.get());
        jobs.clear();
      }
    }
  } else {
    for (int level : config.levels) {
      rep.levels.push_back(solve(level));
      const auto& l = rep.levels.back();
      if (log) {
        for (const auto& s : l.log) {
          *log << fmt::format("level {} slab {}, newton_iters {}, residual {:.3e}, solve_time {:.3f}s\n", level,
                              s.slab, s.newton_iterations, s.residual, s.seconds);
        }
      }
    }
  }

  const auto ev = compute_eoc(rep.velocity_errors());
  const auto ep = compute_eoc(rep.pressure_errors());
  for (std::size_t i = 0; i < rep.levels.size(); ++i) {
    rep.levels[i].eoc_v = ev[i];
    rep.levels[i].eoc_p = ep[i];
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  if (!config.output.empty()) {
    std::ofstream os(config.output);
    if (!os) throw std::runtime_error("cannot write '" + config.output + "'");
    write_csv(os, rep);
  }
  if (!config.run_log.empty()) {
    std::ofstream os(config.run_log);
    if (!os) throw std::runtime_error("cannot write '" + config.run_log + "'");
    write_run_log(os, rep);
  }
  if (!config.snapshot.empty() && rep.levels.back().ok) {
    const LevelSetup setup(config, finest);
    std::ofstream os(config.snapshot);
    if (!os) throw std::runtime_error("cannot write '" + config.snapshot + "'");
    write_snapshot(os, setup, finest_traj, config.snapshot_points);
  }
  return rep;
}

void write_csv(std::ostream& os, const ErrorReport& report) {
  os << "tau,h,ev,eoc_v,ep,eoc_p,k,r,radius_multiplier,nu\n";
  for (const auto& l : report.levels) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{},{},{:.17g},{:.17g}\n", l.tau, l.h, l.ev,
                      l.eoc_v, l.ep, l.eoc_p, report.k, report.r, report.radius_multiplier, report.nu);
  }
}

ErrorReport read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("tau,h,ev,eoc_v,ep,eoc_p", 0) != 0) {
    throw std::invalid_argument("read_csv: missing or unexpected header");
  }
  ErrorReport rep;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> f;
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 10) throw std::invalid_argument("read_csv: expected 10 fields, got " + std::to_string(f.size()));
    LevelResult l;
    l.tau = std::stod(f[0]);
    l.h = std::stod(f[1]);
    l.ev = std::stod(f[2]);
    l.eoc_v = std::stod(f[3]);
    l.ep = std::stod(f[4]);
    l.eoc_p = std::stod(f[5]);
    l.ok = std::isfinite(l.ev) && std::isfinite(l.ep);
    l.level = static_cast<int>(std::lround(std::log2(1.0 / (2.0 * std::sqrt(2.0)) / l.h)));
    rep.k = std::stoi(f[6]);
    rep.r = std::stoi(f[7]);
    rep.radius_multiplier = std::stod(f[8]);
    rep.nu = std::stod(f[9]);
    rep.levels.push_back(l);
  }
  return rep;
}

void write_run_log(std::ostream& os, const ErrorReport& report) {
  os << "level,slab,newton_iters,residual,linear_residual,solve_time\n";
  for (const auto& l : report.levels) {
    for (const auto& s : l.log) {
      os << fmt::format("{},{},{},{:.6e},{:.6e},{:.6f}\n", l.level, s.slab, s.newton_iterations, s.residual,
                        s.linear_residual, s.seconds);
    }
  }
}

void write_snapshot(std::ostream& os, const LevelSetup& setup, const Trajectory& trajectory, int points) {
  if (trajectory.slabs.empty()) throw std::invalid_argument("write_snapshot: empty trajectory");
  const auto& space = setup.space();
  const VectorXd u = setup.system().at(trajectory.slabs.back().state, 1.0);
  const VectorXd ux = u.segment(space.ux_offset(), space.velocity_dofs());
  const VectorXd uy = u.segment(space.uy_offset(), space.velocity_dofs());
  const VectorXd p = u.segment(space.p_offset(), space.pressure_dofs());
  os << "x,y,fluid,vx,vy,p\n";
  for (int j = 0; j < points; ++j) {
    for (int i = 0; i < points; ++i) {
      const Point x(static_cast<double>(i) / (points - 1), static_cast<double>(j) / (points - 1));
      const bool fluid = setup.geometry().disk().signed_distance(x) > 0.0;
      os << fmt::format("{:.6f},{:.6f},{},{:.10e},{:.10e},{:.10e}\n", x.x(), x.y(), fluid ? 1 : 0,
                        space.velocity().evaluate(ux, x), space.velocity().evaluate(uy, x),
                        space.pressure().evaluate(p, x));
    }
  }
}

double SweepReport::error_factor() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& e : entries) {
    if (!e.ok) continue;
    lo = std::min(lo, e.ev);
    hi = std::max(hi, e.ev);
  }
  return (hi > 0.0 && std::isfinite(lo)) ? hi / lo : kUndefined;
}

bool SweepReport::all_ok() const {
  return std::all_of(entries.begin(), entries.end(), [](const SweepEntry& e) { return e.ok; });
}

SweepReport cut_robustness_sweep(const StudyConfig& config, int level, const std::vector<Point>& shifts) {
  SweepReport rep;
  rep.level = level;
  for (const Point& shift : shifts) {
    StudyConfig c = config;
    c.disk.center = config.disk.center + shift;
    c.levels = {level};
    SweepEntry e;
    e.shift = shift;
    try {
      const BackgroundMesh mesh(level);
      const CutGeometry geo(mesh, c.disk, c.volume_degree(), c.surface_degree());
      e.cut_cells = geo.count(CellClass::Cut);
      e.min_cut_fraction = 1.0;
      const double full = mesh.cell_size() * mesh.cell_size();
      for (int id = 0; id < mesh.num_cells(); ++id) {
        if (geo.cell_class(CellId{id}) == CellClass::Cut) {
          e.min_cut_fraction = std::min(e.min_cut_fraction, geo.volume(CellId{id}).measure() / full);
        }
      }
    } catch (const std::exception& ex) {
      e.failure = ex.what();
      rep.entries.push_back(e);
      continue;
    }
    const LevelResult r = run_level(c, level);
    e.ok = r.ok;
    e.failure = r.failure;
    e.ev = r.ev;
    e.ep = r.ep;
    e.max_newton_iterations = r.max_newton_iterations;
    e.max_linear_residual = r.max_linear_residual;
    rep.entries.push_back(e);
  }
  return rep;
}

}  // namespace cutfem
