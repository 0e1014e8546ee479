#include "ivgl/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace ivgl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_g(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

double parse_double(const std::string& s, const std::string& path, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                             ": not a number: '" + s + "'");
  }
}

long parse_int(const std::string& s, const std::string& path, std::size_t lineno) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ": line " + std::to_string(lineno) +
                             ": not an integer: '" + s + "'");
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  std::string text = read_text_file(path);
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

}  // namespace

std::string format_full(double v) { return format_g(v, 17); }

std::string format_stat(double v) {
  if (std::isnan(v)) return "";
  return format_g(v, 12);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw std::runtime_error(path + ": read failed");
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << content;
  if (!out) throw std::runtime_error(path + ": write failed");
}

NamedMatrix read_matrix_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  NamedMatrix out;
  out.names = split(lines[0], ',');
  const std::size_t width = out.names.size();
  if (width == 0) throw std::runtime_error(path + ": empty header");
  const std::size_t rows = lines.size() - 1;
  if (rows == 0) throw std::runtime_error(path + ": no data rows");
  out.values.resize(rows, width);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = split(lines[i], ',');
    if (fields.size() != width) {
      throw std::runtime_error(path + ": line " + std::to_string(i + 1) + ": expected " +
                               std::to_string(width) + " fields, got " +
                               std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < width; ++j) {
      out.values(i - 1, j) = parse_double(fields[j], path, i + 1);
    }
  }
  return out;
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& names) {
  if (static_cast<Eigen::Index>(names.size()) != m.cols()) {
    throw std::invalid_argument("matrix_csv: header width does not match columns");
  }
  std::string out;
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out += ',';
    out += names[j];
  }
  out += '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_full(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::VectorXd read_vector_csv(const std::string& path, std::string* name) {
  NamedMatrix m = read_matrix_csv(path);
  if (m.values.cols() != 1) {
    throw std::runtime_error(path + ": expected a single column, got " +
                             std::to_string(m.values.cols()));
  }
  if (name != nullptr) *name = m.names[0];
  return m.values.col(0);
}

std::string vector_csv(const Eigen::VectorXd& v, const std::string& name) {
  std::string out = name + "\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    out += format_full(v[i]);
    out += '\n';
  }
  return out;
}

Graph read_edges_tsv(const std::string& path, int node_count) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path + ": empty file");
  std::vector<std::string> header = split(lines[0], '\t');
  if (header.size() != 3 || header[0] != "src" || header[1] != "dst" ||
      header[2] != "weight") {
    throw std::runtime_error(path + ": expected header 'src\\tdst\\tweight'");
  }
  std::vector<Edge> edges;
  long max_index = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> fields = split(lines[i], '\t');
    if (fields.size() != 3) {
      throw std::runtime_error(path + ": line " + std::to_string(i + 1) +
                               ": expected 3 tab-separated fields");
    }
    long src = parse_int(fields[0], path, i + 1);
    long dst = parse_int(fields[1], path, i + 1);
    double w = parse_double(fields[2], path, i + 1);
    if (src < 1 || dst < 1 || (node_count > 0 && (src > node_count || dst > node_count))) {
      throw std::runtime_error(path + ": line " + std::to_string(i + 1) +
                               ": node index out of range 1.." +
                               std::to_string(node_count));
    }
    max_index = std::max(max_index, std::max(src, dst));
    edges.push_back({static_cast<int>(src - 1), static_cast<int>(dst - 1), w});
  }
  if (node_count <= 0) node_count = static_cast<int>(max_index);
  try {
    return Graph(node_count, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

std::string edges_tsv(const Graph& g) {
  std::string out = "src\tdst\tweight\n";
  for (const Edge& e : g.edges()) {
    out += std::to_string(e.src + 1);
    out += '\t';
    out += std::to_string(e.dst + 1);
    out += '\t';
    out += format_full(e.weight);
    out += '\n';
  }
  return out;
}

std::string laplacian_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_full(m(i, j));
    }
    out += '\n';
  }
  return out;
}

std::string fit_json(const FitResult& fit, const std::vector<std::string>& node_names,
                     const std::vector<std::string>& instrument_names) {
  if (static_cast<Eigen::Index>(node_names.size()) != fit.beta.size()) {
    throw std::invalid_argument("fit_json: node names do not match beta length");
  }
  ordered_json j;
  j["schema"] = 1;
  j["method"] = method_tag(fit.method);
  j["seed"] = fit.seed;
  j["n_exposures"] = fit.beta.size();
  j["lambda1"] = fit.lambda1;
  j["lambda2"] = fit.lambda2;
  j["lambda3"] = fit.lambda3;
  j["intercept"] = fit.intercept;
  ordered_json beta = ordered_json::object();
  for (Eigen::Index i = 0; i < fit.beta.size(); ++i) beta[node_names[i]] = fit.beta[i];
  j["beta"] = std::move(beta);
  ordered_json support = ordered_json::array();
  for (int idx : fit.support) support.push_back(idx + 1);
  j["support"] = std::move(support);
  if (fit.method == Method::IVGLS) {
    if (static_cast<Eigen::Index>(instrument_names.size()) != fit.alpha.size()) {
      throw std::invalid_argument("fit_json: instrument names do not match alpha length");
    }
    ordered_json alpha = ordered_json::object();
    ordered_json invalid = ordered_json::array();
    for (Eigen::Index i = 0; i < fit.alpha.size(); ++i) {
      if (fit.alpha[i] != 0.0) {
        alpha[instrument_names[i]] = fit.alpha[i];
        invalid.push_back(i + 1);
      }
    }
    j["alpha"] = std::move(alpha);
    j["invalid_instruments"] = std::move(invalid);
    j["alt_iterations"] = fit.alt_iterations;
  } else {
    j["invalid_instruments"] = ordered_json::array();
  }
  j["objective"] = fit.objective;
  j["converged"] = fit.converged;
  j["kkt_violation"] = fit.max_kkt;
  return j.dump(2) + "\n";
}

std::string summary_csv(const SummaryTable& table) {
  std::string out = "setup,si,s0,method,mean_mse,se_mse,median_mcc,mcc_q1,mcc_q3,n_ok\n";
  for (const CellSummary& c : table.cells) {
    out += std::to_string(c.setup);
    out += ',';
    out += format_stat(c.si);
    out += ',';
    out += std::to_string(c.s0);
    out += ',';
    out += method_tag(c.method);
    out += ',';
    out += format_stat(c.mean_mse);
    out += ',';
    out += format_stat(c.se_mse);
    out += ',';
    out += format_stat(c.median_mcc);
    out += ',';
    out += format_stat(c.mcc_q1);
    out += ',';
    out += format_stat(c.mcc_q3);
    out += ',';
    out += std::to_string(c.n_ok);
    out += '\n';
  }
  return out;
}

std::string replicates_csv(const SummaryTable& table) {
  std::string out =
      "replicate,seed,method,ok,mse,mcc,sign_recovery,support_size,lambda1,lambda2,"
      "lambda3,converged,kkt,irrepresentability,invalid_detected,runtime_sec,error\n";
  for (const ReplicateRecord& r : table.records) {
    out += std::to_string(r.replicate);
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += method_tag(r.method);
    out += ',';
    out += r.ok ? "1" : "0";
    out += ',';
    out += format_stat(r.mse);
    out += ',';
    out += format_stat(r.mcc_value);
    out += ',';
    out += r.sign_ok ? "1" : "0";
    out += ',';
    out += std::to_string(r.support_size);
    out += ',';
    out += format_stat(r.lambda1);
    out += ',';
    out += format_stat(r.lambda2);
    out += ',';
    out += format_stat(r.lambda3);
    out += ',';
    out += r.converged ? "1" : "0";
    out += ',';
    out += format_stat(r.kkt);
    out += ',';
    out += format_stat(r.irrep);
    out += ',';
    out += r.invalid_detected ? "1" : "0";
    out += ',';
    out += format_stat(r.runtime_sec);
    out += ',';
    out += r.error;  // error messages contain no commas by construction
    out += '\n';
  }
  return out;
}

std::string mcc_long_csv(const SummaryTable& table) {
  std::string out = "method,replicate,mcc\n";
  for (const ReplicateRecord& r : table.records) {
    if (!r.ok) continue;
    out += method_tag(r.method);
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += format_stat(r.mcc_value);
    out += '\n';
  }
  return out;
}

std::string screen_csv(const std::vector<int>& selected, const Eigen::VectorXd& scores,
                       const std::vector<std::string>& instrument_names) {
  std::string out = "instrument,score\n";
  for (int idx : selected) {
    out += instrument_names.at(idx);
    out += ',';
    out += format_full(scores[idx]);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fnv1a64_hex(const std::string& bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string manifest_json(const std::string& command, const SimConfig& cfg,
                          const std::vector<Method>& methods,
                          const std::vector<ManifestEntry>& inputs,
                          const std::vector<ManifestEntry>& outputs, double runtime_sec) {
  ordered_json j;
  j["schema"] = 1;
  j["tool"] = "ivgl";
  j["version"] = version_string();
  j["command"] = command;
  ordered_json config;
  config["setup"] = cfg.setup;
  config["n"] = cfg.n;
  config["p"] = cfg.p;
  config["q"] = cfg.q;
  config["s0"] = cfg.s0;
  config["si"] = cfg.si;
  config["n_replicates"] = cfg.n_replicates;
  config["base_seed"] = cfg.base_seed;
  config["first_stage_density"] = cfg.first_stage_density;
  config["gamma_min"] = cfg.gamma_min;
  config["gamma_max"] = cfg.gamma_max;
  if (cfg.setup == 2) {
    config["n_invalid"] = cfg.n_invalid;
    config["alpha_value"] = cfg.alpha_value;
    config["coord_max"] = cfg.coord_max;
    config["distance_threshold"] = cfg.distance_threshold;
  }
  ordered_json solver;
  solver["max_sweeps"] = cfg.solver.max_sweeps;
  solver["tol"] = cfg.solver.tol;
  solver["standardize"] = cfg.solver.standardize;
  solver["lambda_grid_size"] = cfg.solver.lambda_grid_size;
  solver["lambda_min_ratio"] = cfg.solver.lambda_min_ratio;
  solver["cv_folds"] = cfg.solver.cv_folds;
  config["solver"] = std::move(solver);
  ordered_json grid = ordered_json::array();
  for (double l2 : cfg.lambda2_grid) grid.push_back(l2);
  config["lambda2_grid"] = std::move(grid);
  j["config"] = std::move(config);
  ordered_json ms = ordered_json::array();
  for (Method m : methods) ms.push_back(method_tag(m));
  j["methods"] = std::move(ms);
  j["seed"] = cfg.base_seed;
  auto entry_list = [](const std::vector<ManifestEntry>& entries) {
    ordered_json arr = ordered_json::array();
    for (const ManifestEntry& e : entries) {
      ordered_json o;
      o["path"] = e.path;
      o["bytes"] = e.bytes;
      o["fnv1a64"] = e.digest;
      arr.push_back(std::move(o));
    }
    return arr;
  };
  j["inputs"] = entry_list(inputs);
  j["outputs"] = entry_list(outputs);
  j["runtime_sec"] = runtime_sec;
  return j.dump(2) + "\n";
}

std::string version_string() { return "1.0.0"; }

Method parse_method(const std::string& tag) {
  if (tag == "gl") return Method::GL;
  if (tag == "ivl") return Method::IVL;
  if (tag == "ivgl") return Method::IVGL;
  if (tag == "ivgls") return Method::IVGLS;
  throw std::invalid_argument("unknown method '" + tag + "' (expected gl, ivl, ivgl, ivgls)");
}

}  // namespace ivgl
