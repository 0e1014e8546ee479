#pragma once

// File formats: CSV matrices with headers (comma-delimited, '.' decimal),
// TSV edge lists with 1-based indices, fit/manifest JSON, and FNV-1a digests
// for the run manifest.

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ivgl/graph.hpp"
#include "ivgl/simulate.hpp"
#include "ivgl/two_stage.hpp"

namespace ivgl {

/// %.17g — shortest text that round-trips a double bit-exactly.
std::string format_full(double v);
/// %.12g — for aggregate statistics; NaN renders as an empty field.
std::string format_stat(double v);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

struct NamedMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> names;  ///< column headers
};

/// CSV with a header row; every data row must match the header width.
NamedMatrix read_matrix_csv(const std::string& path);
std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& names);

/// Single-column CSV.
Eigen::VectorXd read_vector_csv(const std::string& path, std::string* name = nullptr);
std::string vector_csv(const Eigen::VectorXd& v, const std::string& name);

/// TSV `src dst weight` with 1-based node indices. node_count is taken from
/// the caller (the number of exposure columns), so isolated trailing nodes
/// are representable; pass 0 to infer it from the largest index present.
Graph read_edges_tsv(const std::string& path, int node_count);
std::string edges_tsv(const Graph& g);

/// Headerless numeric grid, full precision.
std::string laplacian_csv(const Eigen::MatrixXd& m);

/// fit.json contents (serialized).
std::string fit_json(const FitResult& fit, const std::vector<std::string>& node_names,
                     const std::vector<std::string>& instrument_names);

/// summary.csv: setup,si,s0,method,mean_mse,se_mse,median_mcc,mcc_q1,mcc_q3,n_ok
std::string summary_csv(const SummaryTable& table);
/// replicates.csv: one row per (replicate, method).
std::string replicates_csv(const SummaryTable& table);
/// mcc_long.csv: method,replicate,mcc — boxplot-ready.
std::string mcc_long_csv(const SummaryTable& table);

/// selected.csv for instrument screening: instrument,score (descending).
std::string screen_csv(const std::vector<int>& selected, const Eigen::VectorXd& scores,
                       const std::vector<std::string>& instrument_names);

/// FNV-1a 64-bit digest, as 16 hex digits.
std::uint64_t fnv1a64(const std::string& bytes);
std::string fnv1a64_hex(const std::string& bytes);

/// One (path, digest) entry per output file.
struct ManifestEntry {
  std::string path;
  std::size_t bytes = 0;
  std::string digest;
};

/// manifest.json: command, config snapshot, seed, input/output digests, tool
/// version, wall-clock runtime. Simulation runs have no input files.
std::string manifest_json(const std::string& command, const SimConfig& cfg,
                          const std::vector<Method>& methods,
                          const std::vector<ManifestEntry>& inputs,
                          const std::vector<ManifestEntry>& outputs, double runtime_sec);

std::string version_string();

Method parse_method(const std::string& tag);  ///< accepts gl/ivl/ivgl/ivgls (lowercase)

}  // namespace ivgl
