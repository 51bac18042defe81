#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qfno/types.hpp"

namespace qfno {

/// Periodic Gaussian random field on [0, 1): mode m >= 1 has standard
/// deviation amplitude * (4 pi^2 m^2 + inv_length^2)^(-decay / 2), i.e. the
/// covariance operator amplitude^2 (-Laplacian + inv_length^2)^(-decay).
struct GrfSpec {
  int resolution = 256;
  double amplitude = 25.0;
  double inv_length = 5.0;
  double decay = 2.0;
  std::uint64_t seed = 0;
};

/// Sample `index` of the stream identified by spec.seed; zero mean.
RVector grf_sample(const GrfSpec& spec, std::uint64_t index = 0);
/// Pointwise variance of grf_sample (sum of the mode variances).
double grf_variance(const GrfSpec& spec);

struct BurgersSpec {
  double nu = 0.1;
  double t_end = 1.0;
  int fine_resolution = 0;  // 0: max(4096, 16 * output resolution)
  double dt = 1e-3;
};

int default_fine_resolution(int output_resolution);

/// Viscous Burgers u_t + (u^2/2)_x = nu u_xx on the unit torus. u0 is given
/// on the output grid x_j = j / N, lifted spectrally to the fine grid,
/// integrated with integrating-factor RK4 (2/3 dealiased), and decimated
/// back to the output grid.
RVector burgers_solve(const RVector& u0, const BurgersSpec& spec);

struct DatasetMeta {
  double nu = 0.1;
  double t_end = 1.0;
  int fine_resolution = 0;
  double dt = 1e-3;
  GrfSpec grf;
  int format_version = 1;
};

struct Dataset {
  RMatrix inputs;   // M x N, one sample per row
  RMatrix targets;  // M x N
  RVector grid;     // N
  DatasetMeta meta;

  int count() const { return static_cast<int>(inputs.rows()); }
  int resolution() const { return static_cast<int>(inputs.cols()); }
  void check() const;
  /// Rows [begin, begin + count).
  Dataset slice(int begin, int count) const;
};

RVector unit_grid(int resolution);

/// Sample i uses grf_sample(grf, i). threads <= 1 runs serially; results do
/// not depend on the thread count.
Dataset make_dataset(int count, const GrfSpec& grf, const BurgersSpec& burgers, int threads = 1);

void write_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
void export_csv(const Dataset& d, const std::filesystem::path& path);
Dataset import_csv(const std::filesystem::path& path);

}  // namespace qfno
