#include "capgm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capgm/errors.hpp"

namespace capgm {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  // shortest decimal form that parses back to the same double
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

void ensure_directory(const std::string& path) {
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw DataError("cannot create directory " + path + ": " + ec.message());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, const std::string& path, int lineno,
                  const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw DataError(path + ":" + std::to_string(lineno) + ": column '" +
                    column + "' is not numeric: '" + cell + "'");
  return v;
}

}  // namespace

LoadedData load_dataset_csv(const std::string& path,
                            const std::vector<std::string>& predictors,
                            const std::string& group_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);

  int y_col = -1, group_col = -1;
  std::vector<int> pred_cols;
  std::vector<std::string> pred_names;
  if (predictors.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == "y") y_col = static_cast<int>(j);
      else if (header[j] == group_column) group_col = static_cast<int>(j);
      else {
        pred_cols.push_back(static_cast<int>(j));
        pred_names.push_back(header[j]);
      }
    }
  } else {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == "y") y_col = static_cast<int>(j);
      else if (header[j] == group_column) group_col = static_cast<int>(j);
    }
    for (const std::string& name : predictors) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        throw DataError(path + ": predictor column '" + name + "' not found");
      pred_cols.push_back(static_cast<int>(it - header.begin()));
      pred_names.push_back(name);
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  std::vector<int> groups;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError(path + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(header.size()) +
                      " cells, got " + std::to_string(cells.size()));
    if (y_col >= 0) ys.push_back(parse_cell(cells[y_col], path, lineno, "y"));
    if (group_col >= 0) {
      const double g = parse_cell(cells[group_col], path, lineno, group_column);
      if (g < 1 || g != std::floor(g))
        throw DataError(path + ":" + std::to_string(lineno) +
                        ": group labels must be positive integers");
      groups.push_back(static_cast<int>(g));
    }
    std::vector<double> row(pred_cols.size());
    for (std::size_t j = 0; j < pred_cols.size(); ++j)
      row[j] = parse_cell(cells[pred_cols[j]], path, lineno, pred_names[j]);
    rows.push_back(std::move(row));
  }

  LoadedData out;
  out.has_y = y_col >= 0;
  out.predictor_names = pred_names;
  out.group = std::move(groups);
  const int n = static_cast<int>(rows.size());
  const int P = static_cast<int>(pred_cols.size());
  out.data.X.resize(n, P);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < P; ++j) out.data.X(i, j) = rows[i][j];
  if (out.has_y) out.data.y = std::move(ys);
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data,
                       const std::vector<int>* group) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "y";
  for (int j = 1; j <= data.num_predictors(); ++j) out << ",x" << j;
  if (group != nullptr) out << ",group";
  out << "\n";
  for (int i = 0; i < data.n(); ++i) {
    out << format_double(data.y[i]);
    for (int j = 0; j < data.num_predictors(); ++j)
      out << "," << format_double(data.X(i, j));
    if (group != nullptr) out << "," << (*group)[i];
    out << "\n";
  }
}

void write_truth_csv(const std::string& path, const SimTruth& truth) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "group,dc,oc\n";
  for (std::size_t i = 0; i < truth.groups.size(); ++i)
    out << truth.groups[i] << "," << truth.dcs[i] << "," << truth.ocs[i] << "\n";
}

TruthLabels load_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv_line(line);
  int gi = -1, di = -1, oi = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "group") gi = static_cast<int>(j);
    if (header[j] == "dc") di = static_cast<int>(j);
    if (header[j] == "oc") oi = static_cast<int>(j);
  }
  if (gi < 0 || di < 0 || oi < 0)
    throw DataError(path + ": truth file needs group, dc and oc columns");
  TruthLabels t;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    t.group.push_back(static_cast<int>(parse_cell(cells[gi], path, lineno, "group")));
    t.dc.push_back(static_cast<int>(parse_cell(cells[di], path, lineno, "dc")));
    t.oc.push_back(static_cast<int>(parse_cell(cells[oi], path, lineno, "oc")));
  }
  return t;
}

json tree_to_json(const PyramidTree& tree) {
  json rules = json::array();
  for (const SplittingRule& rule : tree.rules)
    rules.push_back({{"predictor", rule.predictor}, {"threshold", rule.threshold}});
  return json{{"depth", tree.depth()},
              {"rules", rules},
              {"labeling", "binary-path-1based"}};
}

PyramidTree tree_from_json(const json& j) {
  PyramidTree tree;
  for (const auto& rule : j.at("rules"))
    tree.rules.push_back(SplittingRule{rule.at("predictor").get<int>(),
                                       rule.at("threshold").get<double>()});
  if (tree.depth() != j.at("depth").get<int>())
    throw DataError("tree record: depth does not match rule count");
  return tree;
}

void save_chain_trace(const std::string& dir, const ChainTrace& trace) {
  ensure_directory(dir);
  const long M = trace.M();

  {
    json meta{{"method", trace.method}, {"family", trace.family},
              {"n", trace.n},           {"K", trace.K},
              {"H", trace.H},           {"P", trace.P},
              {"kept", M}};
    std::ofstream out(dir + "/meta.json");
    if (!out) throw DataError("cannot write " + dir + "/meta.json");
    out << meta.dump(2) << "\n";
  }

  {
    static const char* names[4] = {"grow", "prune", "resplit", "change"};
    json acc;
    for (int m = 0; m < 4; ++m) {
      acc[names[m]] = {{"proposed", trace.moves[m].proposed},
                       {"accepted", trace.moves[m].accepted},
                       {"auto_rejected", trace.moves[m].auto_rejected}};
    }
    std::ofstream out(dir + "/accept.json");
    if (!out) throw DataError("cannot write " + dir + "/accept.json");
    out << acc.dump(2) << "\n";
  }

  {
    std::ofstream out(dir + "/trace.csv");
    if (!out) throw DataError("cannot write " + dir + "/trace.csv");
    out << "iter";
    for (int i = 1; i <= trace.n; ++i) out << ",c" << i;
    for (int i = 1; i <= trace.n; ++i) out << ",g" << i;
    out << "\n";
    for (long m = 0; m < M; ++m) {
      out << (m + 1);
      for (int c : trace.C[m]) out << "," << c;
      for (int g : trace.groups[m]) out << "," << g;
      out << "\n";
    }
  }

  {
    std::ofstream out(dir + "/trace.jsonl");
    if (!out) throw DataError("cannot write " + dir + "/trace.jsonl");
    for (long m = 0; m < M; ++m) {
      json rec{{"iter", m + 1}};
      if (trace.has_trees()) rec["tree"] = tree_to_json(trace.trees[m]);
      rec["d"] = trace.D[m];
      rec["atoms"] = trace.atoms[m];
      if (!trace.atoms_p.empty()) rec["atoms_p"] = trace.atoms_p[m];
      if (!trace.phi.empty()) rec["phi"] = trace.phi[m];
      if (!trace.alpha.empty()) rec["alpha"] = trace.alpha[m];
      rec["beta"] = trace.beta[m];
      rec["rho"] = trace.rho[m];
      json nu_rows = json::array();
      for (int k = 0; k < trace.K; ++k) {
        json row = json::array();
        for (int h = 0; h < trace.H; ++h) row.push_back(trace.nu[m](k, h));
        nu_rows.push_back(std::move(row));
      }
      rec["nu"] = std::move(nu_rows);
      rec["loglik"] = trace.loglik[m];
      out << rec.dump() << "\n";
    }
  }
}

ChainTrace load_chain_trace(const std::string& dir) {
  ChainTrace trace;
  {
    std::ifstream in(dir + "/meta.json");
    if (!in) throw DataError("cannot open " + dir + "/meta.json");
    json meta = json::parse(in);
    trace.method = meta.at("method").get<std::string>();
    trace.family = meta.at("family").get<std::string>();
    trace.n = meta.at("n").get<int>();
    trace.K = meta.at("K").get<int>();
    trace.H = meta.at("H").get<int>();
    trace.P = meta.at("P").get<int>();
  }
  {
    std::ifstream in(dir + "/accept.json");
    if (in) {
      json acc = json::parse(in);
      static const char* names[4] = {"grow", "prune", "resplit", "change"};
      for (int m = 0; m < 4; ++m) {
        if (!acc.contains(names[m])) continue;
        trace.moves[m].proposed = acc[names[m]].value("proposed", 0L);
        trace.moves[m].accepted = acc[names[m]].value("accepted", 0L);
        trace.moves[m].auto_rejected = acc[names[m]].value("auto_rejected", 0L);
      }
    }
  }
  {
    std::ifstream in(dir + "/trace.csv");
    if (!in) throw DataError("cannot open " + dir + "/trace.csv");
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      const auto cells = split_csv_line(line);
      if (static_cast<int>(cells.size()) != 1 + 2 * trace.n)
        throw DataError(dir + "/trace.csv: malformed row");
      std::vector<int> c(trace.n), g(trace.n);
      for (int i = 0; i < trace.n; ++i) c[i] = std::stoi(cells[1 + i]);
      for (int i = 0; i < trace.n; ++i) g[i] = std::stoi(cells[1 + trace.n + i]);
      trace.C.push_back(std::move(c));
      trace.groups.push_back(std::move(g));
    }
  }
  {
    std::ifstream in(dir + "/trace.jsonl");
    if (!in) throw DataError("cannot open " + dir + "/trace.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      if (rec.contains("tree")) trace.trees.push_back(tree_from_json(rec["tree"]));
      trace.D.push_back(rec.at("d").get<std::vector<int>>());
      trace.atoms.push_back(rec.at("atoms").get<std::vector<double>>());
      if (rec.contains("atoms_p"))
        trace.atoms_p.push_back(rec["atoms_p"].get<std::vector<double>>());
      if (rec.contains("phi")) trace.phi.push_back(rec["phi"].get<double>());
      if (rec.contains("alpha")) trace.alpha.push_back(rec["alpha"].get<double>());
      trace.beta.push_back(rec.at("beta").get<double>());
      trace.rho.push_back(rec.at("rho").get<std::vector<double>>());
      Eigen::MatrixXd nu(trace.K, trace.H);
      const auto& rows = rec.at("nu");
      for (int k = 0; k < trace.K; ++k)
        for (int h = 0; h < trace.H; ++h) nu(k, h) = rows[k][h].get<double>();
      trace.nu.push_back(std::move(nu));
      trace.loglik.push_back(rec.at("loglik").get<double>());
    }
  }
  if (trace.C.size() != trace.D.size())
    throw DataError(dir + ": trace.csv and trace.jsonl disagree on length");
  return trace;
}

void write_coclustering_csv(const std::string& path,
                            const CoclusteringMatrix& matrix) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  const int n = static_cast<int>(matrix.prob.rows());
  out << "id";
  for (int i = 1; i <= n; ++i) out << "," << i;
  out << "\n";
  for (int i = 0; i < n; ++i) {
    out << (i + 1);
    for (int j = 0; j < n; ++j) out << "," << format_double(matrix.prob(i, j));
    out << "\n";
  }
}

}  // namespace capgm
