#pragma once

// Config files, trajectory CSV and VTK snapshots.

#include "fsislip/fixed_point.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fsislip {

class IoError : public std::runtime_error {
public:
  IoError(const std::string& path, const std::string& cause)
      : std::runtime_error(path + ": " + cause), path_(path) {}
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

// =============================================================================
// Config
// =============================================================================

struct ConfigIssue {
  std::size_t line = 0; ///< 0 when not tied to a line
  std::string key;
  std::string message;
};

class ConfigError : public std::runtime_error {
public:
  ConfigError(std::vector<ConfigIssue> issues, std::vector<std::string> defaults)
      : std::runtime_error(format(issues, defaults)), issues_(std::move(issues)), defaults_(std::move(defaults)) {}

  const std::vector<ConfigIssue>& issues() const { return issues_; }
  const std::vector<std::string>& defaults_applied() const { return defaults_; }

private:
  static std::string format(const std::vector<ConfigIssue>& issues, const std::vector<std::string>& defaults)
  {
    std::ostringstream os;
    os << issues.size() << " config error(s)";
    for (const auto& i : issues) {
      os << "\n  ";
      if (i.line > 0)
        os << "line " << i.line << ": ";
      if (!i.key.empty())
        os << i.key << ": ";
      os << i.message;
    }
    if (!defaults.empty()) {
      os << "\n  defaults applied:";
      for (const auto& d : defaults)
        os << "\n    " << d;
    }
    return os.str();
  }

  std::vector<ConfigIssue> issues_;
  std::vector<std::string> defaults_;
};

struct ParsedConfig {
  SimulationConfig config;
  std::vector<std::string> defaults_applied; ///< "section.key = value" for every key left out
};

namespace detail {

enum class KeyType { Real, Count, Text };

struct KeySpec {
  const char* section;
  const char* name;
  KeyType type;
  bool required;
};

inline const std::vector<KeySpec>& config_keys()
{
  static const std::vector<KeySpec> keys = {
      {"geometry", "r_body", KeyType::Real, false},
      {"geometry", "r_outer", KeyType::Real, false},
      {"geometry", "center_x", KeyType::Real, false},
      {"geometry", "center_y", KeyType::Real, false},
      {"geometry", "n_radial", KeyType::Count, false},
      {"geometry", "n_angular", KeyType::Count, false},
      {"geometry", "grading", KeyType::Real, false},
      {"physics", "mu", KeyType::Real, false},
      {"physics", "beta", KeyType::Real, false},
      {"physics", "rho_b", KeyType::Real, false},
      {"physics", "gravity_x", KeyType::Real, false},
      {"physics", "gravity_y", KeyType::Real, false},
      {"physics", "force_x", KeyType::Real, false},
      {"physics", "force_y", KeyType::Real, false},
      {"physics", "torque", KeyType::Real, false},
      {"initial", "eta0_x", KeyType::Real, false},
      {"initial", "eta0_y", KeyType::Real, false},
      {"initial", "omega0", KeyType::Real, false},
      {"time", "t_end", KeyType::Real, true},
      {"time", "dt", KeyType::Real, true},
      {"time", "picard_tol", KeyType::Real, false},
      {"time", "picard_max_iter", KeyType::Count, false},
      {"time", "solver_tol", KeyType::Real, false},
      {"transform", "delta0", KeyType::Real, false},
      {"transform", "tol_vol", KeyType::Real, false},
      {"transform", "threads", KeyType::Count, false},
      {"output", "out_dir", KeyType::Text, false},
      {"output", "snapshot_stride", KeyType::Count, false},
  };
  return keys;
}

inline double* real_slot(SimulationConfig& c, const std::string& k)
{
  static const std::map<std::string, double* (*)(SimulationConfig&)> m = {
      {"r_body", [](SimulationConfig& c) { return &c.r_body; }},
      {"r_outer", [](SimulationConfig& c) { return &c.r_outer; }},
      {"center_x", [](SimulationConfig& c) { return &c.center.x(); }},
      {"center_y", [](SimulationConfig& c) { return &c.center.y(); }},
      {"grading", [](SimulationConfig& c) { return &c.grading; }},
      {"mu", [](SimulationConfig& c) { return &c.mu; }},
      {"beta", [](SimulationConfig& c) { return &c.beta; }},
      {"rho_b", [](SimulationConfig& c) { return &c.rho_b; }},
      {"gravity_x", [](SimulationConfig& c) { return &c.gravity.x(); }},
      {"gravity_y", [](SimulationConfig& c) { return &c.gravity.y(); }},
      {"force_x", [](SimulationConfig& c) { return &c.force.x(); }},
      {"force_y", [](SimulationConfig& c) { return &c.force.y(); }},
      {"torque", [](SimulationConfig& c) { return &c.torque; }},
      {"eta0_x", [](SimulationConfig& c) { return &c.eta0.x(); }},
      {"eta0_y", [](SimulationConfig& c) { return &c.eta0.y(); }},
      {"omega0", [](SimulationConfig& c) { return &c.omega0; }},
      {"t_end", [](SimulationConfig& c) { return &c.t_end; }},
      {"dt", [](SimulationConfig& c) { return &c.dt; }},
      {"picard_tol", [](SimulationConfig& c) { return &c.picard_tol; }},
      {"solver_tol", [](SimulationConfig& c) { return &c.solver_tol; }},
      {"delta0", [](SimulationConfig& c) { return &c.delta0; }},
      {"tol_vol", [](SimulationConfig& c) { return &c.tol_vol; }},
  };
  const auto it = m.find(k);
  return it == m.end() ? nullptr : it->second(c);
}

inline void set_count(SimulationConfig& c, const std::string& k, std::size_t v)
{
  if (k == "n_radial")
    c.n_radial = v;
  else if (k == "n_angular")
    c.n_angular = v;
  else if (k == "picard_max_iter")
    c.picard_max_iter = v;
  else if (k == "threads")
    c.threads = static_cast<unsigned>(v);
  else if (k == "snapshot_stride")
    c.snapshot_stride = v;
}

inline std::string current_value(const SimulationConfig& c, const KeySpec& k)
{
  SimulationConfig copy = c;
  std::ostringstream os;
  switch (k.type) {
  case KeyType::Real: {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, *real_slot(copy, k.name));
    os << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    break;
  }
  case KeyType::Count:
    if (std::string(k.name) == "n_radial")
      os << c.n_radial;
    else if (std::string(k.name) == "n_angular")
      os << c.n_angular;
    else if (std::string(k.name) == "picard_max_iter")
      os << c.picard_max_iter;
    else if (std::string(k.name) == "threads")
      os << c.threads;
    else
      os << c.snapshot_stride;
    break;
  case KeyType::Text:
    os << c.out_dir;
    break;
  }
  return os.str();
}

inline std::string trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline bool parse_real(const std::string& s, double& out)
{
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

inline bool parse_count(const std::string& s, std::size_t& out)
{
  const char* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

} // namespace detail

/// Parse and validate a config. Throws ConfigError listing every problem.
inline ParsedConfig parse_config(const std::string& text)
{
  std::vector<ConfigIssue> issues;
  std::map<std::string, std::size_t> seen; // "section.key" -> line
  ParsedConfig out;
  SimulationConfig& cfg = out.config;

  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = detail::trim(line);
    if (line.empty())
      continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        issues.push_back({line_no, "", "malformed section header '" + line + "'"});
        continue;
      }
      section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
      const bool known = std::any_of(detail::config_keys().begin(), detail::config_keys().end(),
                                     [&](const detail::KeySpec& k) { return section == k.section; });
      if (!known)
        issues.push_back({line_no, "", "unknown section [" + section + "]"});
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({line_no, "", "expected 'key = value'"});
      continue;
    }
    const std::string key = detail::trim(std::string_view(line).substr(0, eq));
    const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty()) {
      issues.push_back({line_no, "", "missing key before '='"});
      continue;
    }
    if (section.empty()) {
      issues.push_back({line_no, key, "key outside of any section"});
      continue;
    }
    const auto spec = std::find_if(detail::config_keys().begin(), detail::config_keys().end(),
                                   [&](const detail::KeySpec& k) { return section == k.section && key == k.name; });
    if (spec == detail::config_keys().end()) {
      issues.push_back({line_no, key, "unknown key in [" + section + "]"});
      continue;
    }
    const std::string full = section + "." + key;
    if (const auto it = seen.find(full); it != seen.end()) {
      issues.push_back({line_no, key,
                        "duplicate key (lines " + std::to_string(it->second) + " and " + std::to_string(line_no) + ")"});
      continue;
    }
    seen.emplace(full, line_no);

    switch (spec->type) {
    case detail::KeyType::Real: {
      double v = 0.0;
      if (!detail::parse_real(value, v))
        issues.push_back({line_no, key, "not a finite number: '" + value + "'"});
      else
        *detail::real_slot(cfg, key) = v;
      break;
    }
    case detail::KeyType::Count: {
      std::size_t v = 0;
      if (!detail::parse_count(value, v))
        issues.push_back({line_no, key, "not a nonnegative integer: '" + value + "'"});
      else
        detail::set_count(cfg, key, v);
      break;
    }
    case detail::KeyType::Text:
      if (value.empty())
        issues.push_back({line_no, key, "empty value"});
      else
        cfg.out_dir = value;
      break;
    }
  }

  for (const auto& k : detail::config_keys()) {
    const std::string full = std::string(k.section) + "." + k.name;
    if (seen.count(full))
      continue;
    if (k.required)
      issues.push_back({0, k.name, std::string("missing required key in [") + k.section + "]"});
    else
      out.defaults_applied.push_back(full + " = " + detail::current_value(cfg, k));
  }

  if (issues.empty())
    for (auto& [key, msg] : cfg.validate()) {
      std::size_t at = 0;
      for (const auto& [full, ln] : seen)
        if (full.substr(full.find('.') + 1) == key)
          at = ln;
      issues.push_back({at, key, msg});
    }
  if (!issues.empty())
    throw ConfigError(std::move(issues), out.defaults_applied);
  return out;
}

inline ParsedConfig load_config(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError(path, "cannot open config file");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

// =============================================================================
// Trajectory CSV
// =============================================================================

inline constexpr const char* kTrajectoryHeader =
    "t,xc_x,xc_y,theta,eta_x,eta_y,omega,gap,energy,dissipation,picard_iters,picard_residual,detJ_min,detJ_max";

inline std::string trajectory_csv(const TrajectoryRecord& rows)
{
  std::string out = kTrajectoryHeader;
  out += '\n';
  char buf[64];
  for (const auto& r : rows) {
    const double v[] = {r.t,     r.x_c.x(), r.x_c.y(), r.theta,  r.eta.x(),
                        r.eta.y(), r.omega, r.gap,     r.energy, r.dissipation,
                        static_cast<double>(r.picard_iters), r.picard_residual, r.detJ_min, r.detJ_max};
    for (std::size_t k = 0; k < std::size(v); ++k) {
      std::snprintf(buf, sizeof buf, "%.16e", v[k]);
      if (k > 0)
        out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& content)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f)
    throw IoError(path, "cannot open for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.flush();
  if (!f)
    throw IoError(path, "write failed");
}

inline void write_trajectory(const std::string& path, const TrajectoryRecord& rows)
{
  write_text_file(path, trajectory_csv(rows));
}

/// Reads back the CSV columns; the in-memory-only fields stay default.
inline TrajectoryRecord read_trajectory(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw IoError(path, "cannot open trajectory");
  std::string line;
  if (!std::getline(f, line) || line != kTrajectoryHeader)
    throw IoError(path, "missing or unexpected header");
  TrajectoryRecord rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty())
      continue;
    std::array<double, 14> v{};
    std::size_t k = 0, pos = 0;
    while (k < v.size()) {
      const auto comma = line.find(',', pos);
      const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!detail::parse_real(cell, v[k]))
        throw IoError(path, "bad value on line " + std::to_string(line_no));
      ++k;
      if (comma == std::string::npos)
        break;
      pos = comma + 1;
    }
    if (k != v.size())
      throw IoError(path, "wrong column count on line " + std::to_string(line_no));
    TrajectoryRow r;
    r.t = v[0];
    r.x_c = Vec2(v[1], v[2]);
    r.theta = v[3];
    r.eta = Vec2(v[4], v[5]);
    r.omega = v[6];
    r.gap = v[7];
    r.energy = v[8];
    r.dissipation = v[9];
    r.picard_iters = static_cast<std::size_t>(v[10]);
    r.picard_residual = v[11];
    r.detJ_min = v[12];
    r.detJ_max = v[13];
    rows.push_back(r);
  }
  return rows;
}

// =============================================================================
// VTK
// =============================================================================

inline std::string snapshot_name(std::size_t step)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "snap_%06zu.vtk", step);
  return buf;
}

/// Legacy ASCII unstructured grid with point arrays velocity, pressure, detJ.
inline std::string snapshot_vtk(const Mesh& mesh, const VectorField& velocity, const ScalarField& pressure,
                                const std::vector<double>& detJ, const std::string& title = "fsislip snapshot")
{
  const std::size_t n = mesh.num_nodes();
  if (velocity.size() != n || pressure.size() != n || detJ.size() != n)
    throw ParameterError("fields", "snapshot fields must have one value per node");
  std::string out;
  char buf[128];
  out += "# vtk DataFile Version 3.0\n" + title + "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  std::snprintf(buf, sizeof buf, "POINTS %zu double\n", n);
  out += buf;
  for (const auto& p : mesh.nodes) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e 0\n", p.x(), p.y());
    out += buf;
  }
  const std::size_t nt = mesh.num_triangles();
  std::snprintf(buf, sizeof buf, "CELLS %zu %zu\n", nt, 4 * nt);
  out += buf;
  for (const auto& t : mesh.triangles) {
    std::snprintf(buf, sizeof buf, "3 %zu %zu %zu\n", t[0], t[1], t[2]);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "CELL_TYPES %zu\n", nt);
  out += buf;
  for (std::size_t t = 0; t < nt; ++t)
    out += "5\n";
  std::snprintf(buf, sizeof buf, "POINT_DATA %zu\nVECTORS velocity double\n", n);
  out += buf;
  for (const auto& u : velocity) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e 0\n", u.x(), u.y());
    out += buf;
  }
  const auto scalars = [&](const char* name, const std::vector<double>& v) {
    out += std::string("SCALARS ") + name + " double 1\nLOOKUP_TABLE default\n";
    for (double x : v) {
      std::snprintf(buf, sizeof buf, "%.16e\n", x);
      out += buf;
    }
  };
  scalars("pressure", pressure);
  scalars("detJ", detJ);
  return out;
}

/// Writes dir/snap_{step:06}.vtk and returns the path.
inline std::string write_snapshot(const std::string& dir, const Mesh& mesh, const CoupledState& z,
                                  const std::vector<double>& detJ, std::size_t step)
{
  const std::string path = (std::filesystem::path(dir) / snapshot_name(step)).string();
  write_text_file(path, snapshot_vtk(mesh, z.z_F, z.q_F, detJ, "fsislip snapshot step " + std::to_string(step)));
  return path;
}

inline void ensure_directory(const std::string& dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError(dir, ec.message());
}

} // namespace fsislip
