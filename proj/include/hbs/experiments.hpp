#pragma once

#include <string>
#include <vector>

#include "hbs/common.hpp"
#include "hbs/kernels.hpp"

namespace hbs {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value configuration, '#' comments. Unknown keys are errors.
struct ExperimentConfig {
  std::string experiment;          // compress | solve | encode | exp3d
  KernelSpec kernel;
  std::string geometry = "line";   // line | starfish | starfish_panels | sphere | ball
  std::vector<Index> n_list;
  std::vector<double> p_list;      // powerlaw sweep for encode
  double tol = 1e-10;
  double f = 2.0;
  double t = 0.5;
  double alpha_tik = 0;            // 0 = default 1e-8 (c_sp s_r)^2
  bool proxy = true;
  Index leaf_size = 64;
  Index proxy_m = 0;
  std::uint64_t seed = 42;
  bool timing = true;              // off: runtime_s column written as 0 (see sidecar log)
  std::string out_dir = "out";

  static ExperimentConfig parse_file(const std::string& path);
  void validate() const;
};

struct ResultRow {
  Index N = 0;
  double runtime_s = 0;
  Index nnz = 0;
  Index s_r = 0;
  Index s_c = 0;
  double cond_ratio = 0;
  double alpha_A = 0;
  double solve_residual = 0;
  double success_prob = 0;

  void check() const;  // all finite
};

// CSV with the fixed ResultRow header, 17 significant digits, written
// atomically (temp file + rename). Wall-clock lines go to "<path>.log".
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

std::pair<PointCloud, RealVector> make_geometry(const ExperimentConfig& cfg, Index n);

std::vector<ResultRow> run_compress(const ExperimentConfig& cfg);
std::vector<ResultRow> run_solve(const ExperimentConfig& cfg);
// One CSV per exponent: encode_p<value>.csv.
std::vector<ResultRow> run_encode(const ExperimentConfig& cfg);
std::vector<ResultRow> run_3d(const ExperimentConfig& cfg);

// log-log least-squares slope of y against x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hbs
