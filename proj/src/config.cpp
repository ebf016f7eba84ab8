#include "cutfem/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cutfem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || trim(v.substr(pos)).size() != 0) throw std::invalid_argument("bad number for " + key + ": '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d)) throw std::invalid_argument("expected integer for " + key + ": '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("expected boolean for " + key + ": '" + v + "'");
}

using Setter = std::function<void(StudyConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"k", [](StudyConfig& c, const std::string& k, const std::string& v) { c.k = to_int(k, v); }},
      {"r", [](StudyConfig& c, const std::string& k, const std::string& v) { c.r = to_int(k, v); }},
      {"levels", [](StudyConfig& c, const std::string&, const std::string& v) { c.levels = parse_levels(v); }},
      {"nu", [](StudyConfig& c, const std::string& k, const std::string& v) { c.nu = to_double(k, v); }},
      {"gamma1", [](StudyConfig& c, const std::string& k, const std::string& v) { c.gamma1 = to_double(k, v); }},
      {"gamma2", [](StudyConfig& c, const std::string& k, const std::string& v) { c.gamma2 = to_double(k, v); }},
      {"gv", [](StudyConfig& c, const std::string& k, const std::string& v) { c.gv = to_double(k, v); }},
      {"gp", [](StudyConfig& c, const std::string& k, const std::string& v) { c.gp = to_double(k, v); }},
      {"radius-mult",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.radius_multiplier = to_double(k, v); }},
      {"center-x",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.disk.center.x() = to_double(k, v); }},
      {"center-y",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.disk.center.y() = to_double(k, v); }},
      {"radius", [](StudyConfig& c, const std::string& k, const std::string& v) { c.disk.radius = to_double(k, v); }},
      {"tau0", [](StudyConfig& c, const std::string& k, const std::string& v) { c.tau0 = to_double(k, v); }},
      {"final-time",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.final_time = to_double(k, v); }},
      {"q-vol", [](StudyConfig& c, const std::string& k, const std::string& v) { c.q_vol = to_int(k, v); }},
      {"q-surf", [](StudyConfig& c, const std::string& k, const std::string& v) { c.q_surf = to_int(k, v); }},
      {"newton-abs",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.newton.abs_tol = to_double(k, v); }},
      {"newton-rel",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.newton.rel_tol = to_double(k, v); }},
      {"newton-max",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.newton.max_iterations = to_int(k, v); }},
      {"convection",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.convection = to_bool(k, v); }},
      {"outer-bc",
       [](StudyConfig& c, const std::string& k, const std::string& v) {
         if (v == "strong") c.outer = OuterBoundary::Strong;
         else if (v == "nitsche") c.outer = OuterBoundary::Nitsche;
         else throw std::invalid_argument(k + " must be 'strong' or 'nitsche'");
       }},
      {"jump-domain",
       [](StudyConfig& c, const std::string& k, const std::string& v) {
         if (v == "full") c.jump = JumpDomain::Full;
         else if (v == "stabilized") c.jump = JumpDomain::Stabilized;
         else throw std::invalid_argument(k + " must be 'full' or 'stabilized'");
       }},
      {"jobs", [](StudyConfig& c, const std::string& k, const std::string& v) { c.jobs = to_int(k, v); }},
      {"out", [](StudyConfig& c, const std::string&, const std::string& v) { c.output = v; }},
      {"run-log", [](StudyConfig& c, const std::string&, const std::string& v) { c.run_log = v; }},
      {"snapshot", [](StudyConfig& c, const std::string&, const std::string& v) { c.snapshot = v; }},
      {"snapshot-points",
       [](StudyConfig& c, const std::string& k, const std::string& v) { c.snapshot_points = to_int(k, v); }},
  };
  return table;
}

}  // namespace

void StudyConfig::validate() const {
  if (k < 0 || k > 2) throw std::invalid_argument("k must be in {0, 1, 2}");
  if (r < 2 || r > 3) throw std::invalid_argument("r must be in {2, 3}");
  if (levels.empty()) throw std::invalid_argument("level list is empty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0 || levels[i] > BackgroundMesh::kMaxLevel) throw std::invalid_argument("level out of range");
    if (i > 0 && levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must be strictly increasing");
  }
  if (!(radius_multiplier >= 1.0)) throw std::invalid_argument("radius-mult must be >= 1");
  if (!(tau0 > 0.0) || !(final_time > 0.0)) throw std::invalid_argument("tau0 and final-time must be positive");
  if (q_vol < 0 || q_surf < 0) throw std::invalid_argument("quadrature degrees must be >= 0");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (snapshot_points < 2) throw std::invalid_argument("snapshot-points must be >= 2");
  newton.validate();
  cutfem::validate(forms());
}

FormsConfig StudyConfig::forms() const {
  FormsConfig f;
  f.nu = nu;
  f.nitsche = NitscheParams::for_degree(r);
  if (gamma1 > 0.0) f.nitsche.gamma1 = gamma1;
  if (gamma2 > 0.0) f.nitsche.gamma2 = gamma2;
  f.ghost = {gv, gp};
  f.outer = outer;
  f.jump = jump;
  return f;
}

int StudyConfig::slabs(int level) const {
  const double tau = tau0 / std::ldexp(1.0, level);
  const double m = final_time / tau;
  const int count = static_cast<int>(std::lround(m));
  if (count < 1 || std::abs(m - count) > 1e-9 * m) {
    throw std::invalid_argument("final-time is not a multiple of the slab length at level " + std::to_string(level));
  }
  return count;
}

std::string StudyConfig::canonical() const {
  const FormsConfig f = forms();
  std::string lv;
  for (std::size_t i = 0; i < levels.size(); ++i) lv += (i ? "," : "") + std::to_string(levels[i]);
  std::string s;
  s += fmt::format("k = {}\nr = {}\nlevels = {}\nnu = {:.17g}\n", k, r, lv, nu);
  s += fmt::format("gamma1 = {:.17g}\ngamma2 = {:.17g}\ngv = {:.17g}\ngp = {:.17g}\n", f.nitsche.gamma1,
                   f.nitsche.gamma2, gv, gp);
  s += fmt::format("radius-mult = {:.17g}\ncenter-x = {:.17g}\ncenter-y = {:.17g}\nradius = {:.17g}\n",
                   radius_multiplier, disk.center.x(), disk.center.y(), disk.radius);
  s += fmt::format("tau0 = {:.17g}\nfinal-time = {:.17g}\nq-vol = {}\nq-surf = {}\n", tau0, final_time,
                   volume_degree(), surface_degree());
  s += fmt::format("newton-abs = {:.17g}\nnewton-rel = {:.17g}\nnewton-max = {}\nconvection = {}\n", newton.abs_tol,
                   newton.rel_tol, newton.max_iterations, convection ? "true" : "false");
  s += fmt::format("outer-bc = {}\njump-domain = {}\n", outer == OuterBoundary::Strong ? "strong" : "nitsche",
                   jump == JumpDomain::Full ? "full" : "stabilized");
  return s;
}

std::string StudyConfig::hash() const {
  // FNV-1a, stable across platforms
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return fmt::format("{:016x}", h);
}

std::vector<int> parse_levels(const std::string& text) {
  const std::string t = trim(text);
  std::vector<int> out;
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const int a = to_int("levels", t.substr(0, dots));
    const int b = to_int("levels", t.substr(dots + 2));
    if (b < a) throw std::invalid_argument("empty level range '" + text + "'");
    for (int l = a; l <= b; ++l) out.push_back(l);
    return out;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_int("levels", trim(item)));
  if (out.empty()) throw std::invalid_argument("empty level list");
  return out;
}

void apply_setting(StudyConfig& config, const std::string& key, const std::string& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown config key '" + key + "'");
  it->second(config, key, trim(value));
}

void read_config(std::istream& is, StudyConfig& config) {
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void read_config_file(const std::string& path, StudyConfig& config) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open config file '" + path + "'");
  read_config(is, config);
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

}  // namespace cutfem
