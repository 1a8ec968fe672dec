#include "chwfr/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "chwfr/wfr_dynamic.hpp"

namespace chwfr::io {
namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  return out;
}

std::vector<std::vector<double>> read_csv(const std::string& path,
                                          const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected;
  for (std::size_t i = 0; i < header.size(); ++i) expected += (i ? "," : "") + header[i];
  if (line != expected)
    throw InvalidInput("'" + path + "': expected header '" + expected + "', got '" + line + "'");
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size())
        throw InvalidInput("'" + path + "' line " + std::to_string(lineno) + ": bad number '" +
                           cell + "'");
      row.push_back(v);
    }
    if (row.size() != header.size())
      throw InvalidInput("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                         std::to_string(header.size()) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_grid_column(const std::vector<double>& xs, const std::string& path) {
  const int n = static_cast<int>(xs.size());
  PeriodicGrid grid(n);
  for (int i = 0; i < n; ++i)
    if (std::abs(xs[i] - grid.x(i)) > 1e-9)
      throw InvalidInput("'" + path + "': x column is not the uniform grid 2*pi*i/" +
                         std::to_string(n));
}

void dump(const Json& j, int indent, int depth, std::string& out) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * (depth + 1), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent) * depth, ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{";
      out += nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) {
          out += ",";
          out += nl;
        }
        first = false;
        out += pad + Json(it.key()).dump() + (indent > 0 ? ": " : ":");
        dump(it.value(), indent, depth + 1, out);
      }
      out += nl + close_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[";
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += indent > 0 ? ", " : ",";
        first = false;
        dump(v, indent, depth + 1, out);
      }
      out += "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  return out;
}

void write_density_csv(const std::string& path, const DensityField& rho) {
  PeriodicGrid grid(static_cast<int>(rho.size()));
  std::ofstream out = open_out(path);
  out << "x,value\n";
  for (int i = 0; i < grid.size(); ++i)
    out << format_double(grid.x(i)) << ',' << format_double(rho[i]) << '\n';
}

DensityField read_density_csv(const std::string& path) {
  const auto rows = read_csv(path, {"x", "value"});
  std::vector<double> xs, vals;
  for (const auto& r : rows) {
    xs.push_back(r[0]);
    vals.push_back(r[1]);
  }
  check_grid_column(xs, path);
  return vals;
}

void write_trajectory_csv(const std::string& path, const CHTrajectory& traj) {
  PeriodicGrid grid(traj.n);
  std::ofstream out = open_out(path);
  out << "t,x,u\n";
  for (std::size_t k = 0; k < traj.size(); ++k)
    for (int i = 0; i < traj.n; ++i)
      out << format_double(traj.times[k]) << ',' << format_double(grid.x(i)) << ','
          << format_double(traj.u[k][i]) << '\n';
}

CHTrajectory read_trajectory_csv(const std::string& path, const ConeParams& params) {
  const auto rows = read_csv(path, {"t", "x", "u"});
  if (rows.empty()) throw InvalidInput("'" + path + "' has no samples");
  CHTrajectory traj;
  traj.params = params;
  std::vector<double> xs;
  for (const auto& r : rows) {
    if (traj.times.empty() || r[0] != traj.times.back()) {
      traj.times.push_back(r[0]);
      traj.u.emplace_back();
    }
    traj.u.back().push_back(r[2]);
    if (traj.times.size() == 1) xs.push_back(r[1]);
  }
  check_grid_column(xs, path);
  traj.n = static_cast<int>(xs.size());
  for (const Field& u : traj.u)
    if (static_cast<int>(u.size()) != traj.n)
      throw InvalidInput("'" + path + "': every time slice needs " + std::to_string(traj.n) +
                         " samples");
  traj.dt = traj.times.size() > 1 ? traj.times[1] - traj.times[0] : 0.0;
  return traj;
}

void write_flow_csv(const std::string& path, const FlowPath& flow) {
  std::ofstream out = open_out(path);
  out << "t,x,phi,lam\n";
  for (std::size_t k = 0; k < flow.size(); ++k) {
    const GroupElement& g = flow.elements[k];
    PeriodicGrid grid(g.size());
    for (int i = 0; i < g.size(); ++i)
      out << format_double(flow.times[k]) << ',' << format_double(grid.x(i)) << ','
          << format_double(g.phi()[i]) << ',' << format_double(g.lam()[i]) << '\n';
  }
}

void write_wfr_csv(const std::string& path, const WFRVariables& vars) {
  const CellValues c = interpolate_to_cells(vars);
  std::ofstream out = open_out(path);
  out << "t,x,rho,m,mu\n";
  for (int k = 0; k < vars.nt; ++k)
    for (int i = 0; i < vars.nx; ++i) {
      const std::size_t j = static_cast<std::size_t>(k) * vars.nx + i;
      out << format_double((k + 0.5) * vars.dt()) << ',' << format_double(i * vars.dx()) << ','
          << format_double(c.rho[j]) << ',' << format_double(c.m[j]) << ','
          << format_double(c.mu[j]) << '\n';
    }
}

Field parse_init(const std::string& spec, int n) {
  PeriodicGrid grid(n);
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw InvalidInput("init spec '" + spec + "' must look like kind:args");
  const std::string kind = spec.substr(0, colon), args = spec.substr(colon + 1);
  auto numbers = [&](std::size_t count) {
    std::vector<double> v;
    std::stringstream ss(args);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(x))
        throw InvalidInput("init spec '" + spec + "': bad number '" + cell + "'");
      v.push_back(x);
    }
    if (v.size() != count)
      throw InvalidInput("init spec '" + spec + "': expected " + std::to_string(count) +
                         " numbers");
    return v;
  };
  if (kind == "const") return Field(n, numbers(1)[0]);
  if (kind == "sin") {
    const double amp = numbers(1)[0];
    Field f(n);
    for (int i = 0; i < n; ++i) f[i] = amp * std::sin(grid.x(i));
    return f;
  }
  if (kind == "bump") {
    const auto v = numbers(3);
    return von_mises_bump(n, v[0], v[1], v[2]);
  }
  if (kind == "file") {
    Field f = read_density_csv(args);
    if (static_cast<int>(f.size()) != n)
      throw InvalidInput("init file '" + args + "' has " + std::to_string(f.size()) +
                         " samples, expected " + std::to_string(n));
    return f;
  }
  throw InvalidInput("unknown init kind '" + kind + "' (const, sin, bump, file)");
}

}  // namespace chwfr::io
