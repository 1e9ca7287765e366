#ifndef GEOCONNECT_REPORT_HPP
#define GEOCONNECT_REPORT_HPP

// Result serialization: verdict summaries as JSON, sample tables as CSV
// with a header row and doubles printed with 17 significant digits, plus a
// whitespace layout for gnuplot. Identical inputs produce byte-identical
// files.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geoconnect/connect.hpp"
#include "geoconnect/gpw.hpp"
#include "geoconnect/log.hpp"

namespace geoconnect {

inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

enum class EmitLayout { csv, gnuplot };

namespace detail {

inline void write_table(const std::string& file, const std::vector<std::string>& header,
                        const std::vector<std::vector<double>>& rows, EmitLayout layout) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write '" + file + "'");
  const char sep = layout == EmitLayout::csv ? ',' : ' ';
  if (layout == EmitLayout::gnuplot) out << "# ";
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out << sep;
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << sep;
      out << fmt17(row[i]);
    }
    out << '\n';
  }
}

}  // namespace detail

inline void write_path_table(const std::string& file, const DiscretePath& path,
                             EmitLayout layout = EmitLayout::csv) {
  const int d = static_cast<int>(path.nodes[0].size());
  std::vector<std::string> header{"s"};
  for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
  if (path.has_time()) header.push_back("t");
  std::vector<std::vector<double>> rows;
  const int m = path.segments();
  for (int i = 0; i <= m; ++i) {
    std::vector<double> row{static_cast<double>(i) / m};
    for (double c : path.nodes[static_cast<std::size_t>(i)]) row.push_back(c);
    if (path.has_time()) row.push_back(path.t_nodes[static_cast<std::size_t>(i)]);
    rows.push_back(std::move(row));
  }
  detail::write_table(file, header, rows, layout);
}

inline void write_solution_table(const std::string& file, const GeodesicSolution& sol,
                                 EmitLayout layout = EmitLayout::csv) {
  const int d = static_cast<int>(sol.x[0].size());
  std::vector<std::string> header{"s"};
  for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
  header.push_back("t");
  for (int k = 1; k <= d; ++k) header.push_back("xdot" + std::to_string(k));
  header.push_back("tdot");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < sol.x.size(); ++i) {
    std::vector<double> row{sol.s[i]};
    for (double c : sol.x[i]) row.push_back(c);
    row.push_back(sol.t[i]);
    for (double c : sol.xdot[i]) row.push_back(c);
    row.push_back(sol.tdot[i]);
    rows.push_back(std::move(row));
  }
  detail::write_table(file, header, rows, layout);
}

inline void write_sweep_table(const std::string& file, const std::vector<SweepRow>& rows,
                              EmitLayout layout = EmitLayout::csv) {
  std::vector<std::vector<double>> table;
  for (const auto& r : rows)
    table.push_back({static_cast<double>(r.n), r.jn, r.xdot_l2, r.tdot_l2, r.h1_gap, r.residual,
                     r.w_min, r.w_max, static_cast<double>(r.iterations)});
  detail::write_table(file,
                      {"n", "Jn", "xdot_l2", "tdot_l2", "h1_gap", "residual", "w_min", "w_max",
                       "iterations"},
                      table, layout);
}

inline void write_gpw_table(const std::string& file, const GpwPath& path,
                            EmitLayout layout = EmitLayout::csv) {
  const int d = static_cast<int>(path.x[0].size());
  std::vector<std::string> header{"s"};
  for (int k = 1; k <= d; ++k) header.push_back("x" + std::to_string(k));
  header.push_back("u");
  header.push_back("v");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < path.x.size(); ++i) {
    std::vector<double> row{path.s[i]};
    for (double c : path.x[i]) row.push_back(c);
    row.push_back(path.u[i]);
    row.push_back(path.v[i]);
    rows.push_back(std::move(row));
  }
  detail::write_table(file, header, rows, layout);
}

inline nlohmann::json certificate_json(const ObstructionCertificate& cert) {
  nlohmann::json j;
  j["applicable"] = cert.applicable;
  j["potential"] = cert.potential_description;
  j["resolution"] = cert.resolution;
  j["refined_resolution"] = cert.refined_resolution;
  j["refinement_stable"] = cert.refinement_stable;
  j["reduced_to_axis"] = cert.reduced_to_axis;
  j["obstructed"] = cert.obstructed();
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : cert.modes) {
    nlohmann::json mj;
    mj["mode"] = mode_name(m.mode);
    mj["reachable"] = m.reachable;
    mj["witness_points"] = m.witness.size();
    modes.push_back(mj);
  }
  j["modes"] = modes;
  return j;
}

inline int verdict_exit_code(ConnectVerdict::Tag tag) {
  switch (tag) {
    case ConnectVerdict::Tag::geodesic: return 0;
    case ConnectVerdict::Tag::obstructed: return 2;
    case ConnectVerdict::Tag::inconclusive: return 3;
  }
  return 1;
}

inline nlohmann::json verdict_json(const ConnectVerdict& verdict) {
  nlohmann::json j;
  switch (verdict.tag) {
    case ConnectVerdict::Tag::geodesic: j["tag"] = "geodesic"; break;
    case ConnectVerdict::Tag::obstructed: j["tag"] = "obstructed"; break;
    case ConnectVerdict::Tag::inconclusive: j["tag"] = "inconclusive"; break;
  }
  j["exit_code"] = verdict_exit_code(verdict.tag);
  j["note"] = verdict.diag.note;
  j["endpoints_swapped"] = verdict.diag.endpoints_swapped;
  if (verdict.tag == ConnectVerdict::Tag::geodesic) {
    j["sign_class"] = sign_class_name(verdict.sign_class);
    j["energy"] = fmt17(verdict.solution.energy);
    j["killing_constant"] = fmt17(verdict.solution.killing);
    j["energy_drift"] = fmt17(verdict.solution.energy_drift);
    j["killing_drift"] = fmt17(verdict.solution.killing_drift);
    j["residual"] = fmt17(verdict.solution.residual);
    j["step_halving_error"] = fmt17(verdict.solution.step_halving_error);
  }
  if (verdict.certificate.applicable || verdict.tag == ConnectVerdict::Tag::obstructed)
    j["certificate"] = certificate_json(verdict.certificate);
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : verdict.diag.rows) {
    nlohmann::json rj;
    rj["n"] = r.n;
    rj["Jn"] = fmt17(r.jn);
    rj["xdot_l2"] = fmt17(r.xdot_l2);
    rj["tdot_l2"] = fmt17(r.tdot_l2);
    rj["h1_gap"] = fmt17(r.h1_gap);
    rj["residual"] = fmt17(r.residual);
    rj["iterations"] = r.iterations;
    rows.push_back(rj);
  }
  j["sweep"] = rows;
  return j;
}

inline nlohmann::json gpw_verdict_json(const GpwVerdict& verdict) {
  nlohmann::json j;
  j["tag"] = verdict.tag == GpwVerdict::Tag::geodesic ? "geodesic" : "inconclusive";
  j["exit_code"] = verdict.tag == GpwVerdict::Tag::geodesic ? 0 : 3;
  j["endpoint_error"] = fmt17(verdict.endpoint_error);
  j["jacobian_condition"] = fmt17(verdict.jacobian_condition);
  j["energy_drift"] = fmt17(verdict.energy_drift);
  j["residual"] = fmt17(verdict.residual);
  j["iterations"] = verdict.iterations;
  j["note"] = verdict.note;
  if (verdict.tag == GpwVerdict::Tag::geodesic) {
    j["pairing"] = fmt17(verdict.path.du);
    j["sign_class"] = sign_class_name(gpw_classify(verdict.path));
  }
  return j;
}

// Path tables written by `connect` are read back by `verify`; the time
// column is optional so plain spatial paths can be loaded too.
inline DiscretePath read_path_table(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open path file '" + file + "'");
  std::string line;
  if (!std::getline(in, line)) throw Error("empty path file '" + file + "'");
  const char sep = line.find(',') != std::string::npos ? ',' : ' ';
  std::vector<std::string> header;
  {
    std::string cell;
    std::istringstream hs(line[0] == '#' ? line.substr(1) : line);
    while (std::getline(hs, cell, sep)) {
      while (!cell.empty() && (cell.front() == ' ')) cell.erase(cell.begin());
      if (!cell.empty()) header.push_back(cell);
    }
  }
  int t_col = -1, s_col = -1;
  std::vector<int> x_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "t") t_col = static_cast<int>(i);
    else if (header[i] == "s") s_col = static_cast<int>(i);
    else if (header[i].size() >= 2 && header[i][0] == 'x' &&
             std::isdigit(static_cast<unsigned char>(header[i][1])))
      x_cols.push_back(static_cast<int>(i));
  }
  (void)s_col;
  if (x_cols.empty()) throw Error("path file '" + file + "' has no coordinate columns");
  DiscretePath path;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, sep))
      if (!cell.empty()) cells.push_back(std::strtod(cell.c_str(), nullptr));
    Vec node;
    for (int c : x_cols) node.push_back(cells[static_cast<std::size_t>(c)]);
    path.nodes.push_back(std::move(node));
    if (t_col >= 0) path.t_nodes.push_back(cells[static_cast<std::size_t>(t_col)]);
  }
  if (path.nodes.size() < 2) throw Error("path file '" + file + "' has fewer than 2 rows");
  return path;
}

}  // namespace geoconnect

#endif  // GEOCONNECT_REPORT_HPP
