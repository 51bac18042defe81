#include "qfno/pde.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "qfno/error.hpp"

namespace qfno {
namespace {

using json = nlohmann::json;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

// Real <-> half-complex transform pair of one length on owned buffers.
// Unnormalised, FFTW sign conventions: forward exp(-i), backward exp(+i).
class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    real_ = fftw_alloc_real(static_cast<std::size_t>(n));
    spec_ = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    std::lock_guard lock(planner_mutex());
    forward_ = fftw_plan_dft_r2c_1d(n, real_, spec_, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_c2r_1d(n, spec_, real_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard lock(planner_mutex());
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(backward_);
    }
    fftw_free(real_);
    fftw_free(spec_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int n() const { return n_; }
  int half() const { return n_ / 2 + 1; }
  double* real() { return real_; }
  Complex* spec() { return reinterpret_cast<Complex*>(spec_); }
  void forward() { fftw_execute(forward_); }
  // Note: c2r overwrites the spectrum buffer.
  void backward() { fftw_execute(backward_); }

 private:
  int n_;
  double* real_;
  fftw_complex* spec_;
  fftw_plan forward_;
  fftw_plan backward_;
};

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double mode_std(const GrfSpec& spec, int m) {
  const double k2 = 4.0 * kPi * kPi * m * m;
  return spec.amplitude * std::pow(k2 + spec.inv_length * spec.inv_length, -spec.decay / 2.0);
}

void require_resolution(int n, const char* what) {
  if (!is_power_of_two(n) || n < 2) {
    throw Error(ErrorCode::BadResolution, std::string(what) + " must be a power of two >= 2");
  }
}

// Burgers right-hand side in Fourier space: -(i k / 2) FFT(u^2), dealiased.
class BurgersRhs {
 public:
  explicit BurgersRhs(int n) : fft_(n), k_(static_cast<std::size_t>(fft_.half())) {
    const int cutoff = n / 3;
    for (int m = 0; m < fft_.half(); ++m) {
      k_[static_cast<std::size_t>(m)] = m <= cutoff ? 2.0 * kPi * m : 0.0;
    }
  }

  // out = N(v); returns max |u| of the physical field behind v.
  double operator()(const std::vector<Complex>& v, std::vector<Complex>& out) {
    const int n = fft_.n();
    std::copy(v.begin(), v.end(), fft_.spec());
    fft_.backward();
    double umax = 0.0;
    double* u = fft_.real();
    const double inv_n = 1.0 / n;
    for (int j = 0; j < n; ++j) {
      const double x = u[j] * inv_n;
      umax = std::max(umax, std::abs(x));
      u[j] = x * x;
    }
    fft_.forward();
    const Complex* s = fft_.spec();
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = Complex{0.0, -0.5 * k_[m]} * s[m];
    return umax;
  }

  RealFft& fft() { return fft_; }

 private:
  RealFft fft_;
  std::vector<double> k_;  // angular wavenumber, zeroed above the 2/3 cutoff
};

void write_le_doubles(std::ostream& os, const double* data, std::size_t n) {
  if constexpr (std::endian::native == std::endian::little) {
    os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      auto bits = std::bit_cast<std::uint64_t>(data[i]);
      char b[8];
      for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
      os.write(b, 8);
    }
  }
}

void read_le_doubles(std::istream& is, double* data, std::size_t n) {
  std::vector<unsigned char> buf(n * 8);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size()) {
    throw Error(ErrorCode::LengthMismatch, "dataset payload is shorter than its header says");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(buf[i * 8 + static_cast<std::size_t>(k)]) << (8 * k);
    data[i] = std::bit_cast<double>(bits);
  }
}

json meta_to_json(const DatasetMeta& m) {
  return json{{"nu", m.nu},
              {"t_end", m.t_end},
              {"fine_resolution", m.fine_resolution},
              {"dt", m.dt},
              {"format_version", m.format_version},
              {"grf",
               {{"resolution", m.grf.resolution},
                {"amplitude", m.grf.amplitude},
                {"inv_length", m.grf.inv_length},
                {"decay", m.grf.decay},
                {"seed", m.grf.seed}}}};
}

DatasetMeta meta_from_json(const json& j) {
  DatasetMeta m;
  m.nu = j.at("nu").get<double>();
  m.t_end = j.at("t_end").get<double>();
  m.fine_resolution = j.at("fine_resolution").get<int>();
  m.dt = j.at("dt").get<double>();
  m.format_version = j.at("format_version").get<int>();
  const auto& g = j.at("grf");
  m.grf.resolution = g.at("resolution").get<int>();
  m.grf.amplitude = g.at("amplitude").get<double>();
  m.grf.inv_length = g.at("inv_length").get<double>();
  m.grf.decay = g.at("decay").get<double>();
  m.grf.seed = g.at("seed").get<std::uint64_t>();
  return m;
}

constexpr int kDatasetSchema = 1;

}  // namespace

RVector grf_sample(const GrfSpec& spec, std::uint64_t index) {
  require_resolution(spec.resolution, "resolution");
  const int n = spec.resolution;
  auto rng = sample_rng(spec.seed, index);
  std::normal_distribution<double> gauss;
  RealFft fft(n);
  Complex* c = fft.spec();
  c[0] = 0.0;
  c[n / 2] = 0.0;
  // u(x) = sum_m sqrt(2) sigma_m (xi cos 2 pi m x + eta sin 2 pi m x).
  for (int m = 1; m < n / 2; ++m) {
    const double xi = gauss(rng);
    const double eta = gauss(rng);
    c[m] = mode_std(spec, m) / std::sqrt(2.0) * Complex{xi, -eta};
  }
  fft.backward();
  return Eigen::Map<const RVector>(fft.real(), n);
}

double grf_variance(const GrfSpec& spec) {
  double v = 0.0;
  for (int m = 1; m < spec.resolution / 2; ++m) {
    const double s = mode_std(spec, m);
    v += 2.0 * s * s;
  }
  return v;
}

int default_fine_resolution(int output_resolution) { return std::max(4096, 16 * output_resolution); }

RVector burgers_solve(const RVector& u0, const BurgersSpec& spec) {
  const int out_n = static_cast<int>(u0.size());
  require_resolution(out_n, "output resolution");
  const int n = spec.fine_resolution > 0 ? spec.fine_resolution : default_fine_resolution(out_n);
  require_resolution(n, "fine resolution");
  if (n < out_n) throw Error(ErrorCode::BadResolution, "fine resolution is below the output resolution");
  if (!(spec.nu > 0.0) || !(spec.t_end >= 0.0) || !(spec.dt > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "need nu > 0, t_end >= 0 and dt > 0");
  }

  // Spectral lift of u0 onto the fine grid.
  const int half = n / 2 + 1;
  std::vector<Complex> v(static_cast<std::size_t>(half), Complex{0.0, 0.0});
  {
    RealFft coarse(out_n);
    std::copy(u0.data(), u0.data() + out_n, coarse.real());
    coarse.forward();
    const double scale = static_cast<double>(n) / out_n;
    for (int m = 0; m < out_n / 2; ++m) v[static_cast<std::size_t>(m)] = coarse.spec()[m] * scale;
    // Split the coarse Nyquist mode evenly between +-N/2.
    v[static_cast<std::size_t>(out_n / 2)] = coarse.spec()[out_n / 2] * (0.5 * scale);
    if (out_n == n) v[static_cast<std::size_t>(n / 2)] *= 2.0;
  }

  const auto steps = static_cast<long>(std::ceil(spec.t_end / spec.dt - 1e-9));
  const double dt = steps > 0 ? spec.t_end / static_cast<double>(steps) : 0.0;
  std::vector<Complex> e(static_cast<std::size_t>(half));
  std::vector<Complex> e2(static_cast<std::size_t>(half));
  for (int m = 0; m < half; ++m) {
    const double k = 2.0 * kPi * m;
    e[static_cast<std::size_t>(m)] = std::exp(-spec.nu * k * k * dt / 2.0);
    e2[static_cast<std::size_t>(m)] = e[static_cast<std::size_t>(m)] * e[static_cast<std::size_t>(m)];
  }

  BurgersRhs rhs(n);
  std::vector<Complex> a(v.size()), b(v.size()), c(v.size()), d(v.size()), w(v.size());
  const double u0max = u0.cwiseAbs().maxCoeff();
  const double limit = 2.0 * u0max;
  for (long step = 0; step < steps; ++step) {
    const double umax = rhs(v, a);
    if (!std::isfinite(umax) || (u0max > 0.0 && umax > limit)) {
      throw Error(ErrorCode::UnstableStep, "max |u| left the stable range at step " + std::to_string(step));
    }
    for (std::size_t m = 0; m < v.size(); ++m) w[m] = e[m] * (v[m] + 0.5 * dt * a[m]);
    rhs(w, b);
    for (std::size_t m = 0; m < v.size(); ++m) w[m] = e[m] * v[m] + 0.5 * dt * b[m];
    rhs(w, c);
    for (std::size_t m = 0; m < v.size(); ++m) w[m] = e2[m] * v[m] + dt * e[m] * c[m];
    rhs(w, d);
    for (std::size_t m = 0; m < v.size(); ++m) {
      v[m] = e2[m] * v[m] + dt / 6.0 * (e2[m] * a[m] + 2.0 * e[m] * (b[m] + c[m]) + d[m]);
    }
  }

  RealFft& fft = rhs.fft();
  std::copy(v.begin(), v.end(), fft.spec());
  fft.backward();
  const int stride = n / out_n;
  RVector out(out_n);
  for (int j = 0; j < out_n; ++j) out[j] = fft.real()[j * stride] / n;
  if (!out.allFinite()) throw Error(ErrorCode::UnstableStep, "solution is not finite");
  return out;
}

void Dataset::check() const {
  if (inputs.rows() != targets.rows() || inputs.cols() != targets.cols() || grid.size() != inputs.cols()) {
    throw Error(ErrorCode::LengthMismatch, "dataset arrays disagree in shape");
  }
}

Dataset Dataset::slice(int begin, int n) const {
  if (begin < 0 || n < 0 || begin + n > count()) throw Error(ErrorCode::IndexOutOfRange, "dataset slice out of range");
  Dataset d;
  d.inputs = inputs.middleRows(begin, n);
  d.targets = targets.middleRows(begin, n);
  d.grid = grid;
  d.meta = meta;
  return d;
}

RVector unit_grid(int resolution) {
  RVector g(resolution);
  for (int j = 0; j < resolution; ++j) g[j] = static_cast<double>(j) / resolution;
  return g;
}

Dataset make_dataset(int count, const GrfSpec& grf, const BurgersSpec& burgers, int threads) {
  if (count < 0) throw Error(ErrorCode::InvalidArgument, "count must be non-negative");
  require_resolution(grf.resolution, "resolution");
  Dataset d;
  const int n = grf.resolution;
  d.inputs.resize(count, n);
  d.targets.resize(count, n);
  d.grid = unit_grid(n);
  d.meta.nu = burgers.nu;
  d.meta.t_end = burgers.t_end;
  d.meta.fine_resolution = burgers.fine_resolution > 0 ? burgers.fine_resolution : default_fine_resolution(n);
  d.meta.dt = burgers.dt;
  d.meta.grf = grf;

  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        const RVector u0 = grf_sample(grf, static_cast<std::uint64_t>(i));
        const RVector u = burgers_solve(u0, burgers);
        d.inputs.row(i) = u0.transpose();
        d.targets.row(i) = u.transpose();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return d;
}

void write_dataset(const Dataset& d, const std::filesystem::path& path) {
  d.check();
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const json header{{"schema_version", kDatasetSchema},
                    {"count", d.count()},
                    {"resolution", d.resolution()},
                    {"meta", meta_to_json(d.meta)}};
  os << header.dump() << '\n';
  // Row-major payload.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> in = d.inputs;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out = d.targets;
  write_le_doubles(os, in.data(), static_cast<std::size_t>(in.size()));
  write_le_doubles(os, out.data(), static_cast<std::size_t>(out.size()));
  write_le_doubles(os, d.grid.data(), static_cast<std::size_t>(d.grid.size()));
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::MalformedHeader, "missing dataset header");
  Dataset d;
  int m = 0;
  int n = 0;
  try {
    const json h = json::parse(line);
    const int version = h.at("schema_version").get<int>();
    if (version != kDatasetSchema) {
      throw Error(ErrorCode::SchemaVersionMismatch, "dataset schema " + std::to_string(version) +
                                                        ", this build reads " + std::to_string(kDatasetSchema));
    }
    m = h.at("count").get<int>();
    n = h.at("resolution").get<int>();
    d.meta = meta_from_json(h.at("meta"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("bad dataset header: ") + e.what());
  }
  if (m < 0 || n < 1) throw Error(ErrorCode::MalformedHeader, "bad dataset dimensions");

  const auto payload_start = is.tellg();
  is.seekg(0, std::ios::end);
  const auto payload = static_cast<std::uint64_t>(is.tellg() - payload_start);
  const std::uint64_t expected = (2ULL * m * n + n) * 8ULL;
  if (payload != expected) {
    throw Error(ErrorCode::LengthMismatch, "payload holds " + std::to_string(payload) + " bytes, header implies " +
                                               std::to_string(expected));
  }
  is.seekg(payload_start);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> in(m, n), out(m, n);
  read_le_doubles(is, in.data(), static_cast<std::size_t>(in.size()));
  read_le_doubles(is, out.data(), static_cast<std::size_t>(out.size()));
  d.grid.resize(n);
  read_le_doubles(is, d.grid.data(), static_cast<std::size_t>(n));
  d.inputs = in;
  d.targets = out;
  return d;
}

void export_csv(const Dataset& d, const std::filesystem::path& path) {
  d.check();
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  const int n = d.resolution();
  for (int j = 0; j < n; ++j) os << (j ? "," : "") << "u0_" << j;
  for (int j = 0; j < n; ++j) os << ",u_" << j;
  os << '\n';
  os.precision(17);
  for (int i = 0; i < d.count(); ++i) {
    for (int j = 0; j < n; ++j) os << (j ? "," : "") << d.inputs(i, j);
    for (int j = 0; j < n; ++j) os << ',' << d.targets(i, j);
    os << '\n';
  }
  if (!os) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Dataset import_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::MalformedHeader, "empty CSV");
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  if (cols.empty() || cols.size() % 2 != 0) throw Error(ErrorCode::MalformedHeader, "CSV needs u0_* and u_* columns");
  const int n = static_cast<int>(cols.size() / 2);
  for (int j = 0; j < n; ++j) {
    if (cols[static_cast<std::size_t>(j)] != "u0_" + std::to_string(j) ||
        cols[static_cast<std::size_t>(n + j)] != "u_" + std::to_string(j)) {
      throw Error(ErrorCode::MalformedHeader, "unexpected CSV column '" + cols[static_cast<std::size_t>(j)] + "'");
    }
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.c_str();
    char* end = nullptr;
    while (*p) {
      row.push_back(std::strtod(p, &end));
      if (end == p) throw Error(ErrorCode::MalformedDocument, "bad number in CSV row " + std::to_string(rows.size() + 1));
      p = end;
      if (*p == ',') ++p;
    }
    if (row.size() != cols.size()) {
      throw Error(ErrorCode::LengthMismatch, "CSV row " + std::to_string(rows.size() + 1) + " has the wrong width");
    }
    rows.push_back(std::move(row));
  }
  Dataset d;
  const int m = static_cast<int>(rows.size());
  d.inputs.resize(m, n);
  d.targets.resize(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) {
      d.inputs(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      d.targets(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + j)];
    }
  d.grid = unit_grid(n);
  d.meta.grf.resolution = n;
  return d;
}

}  // namespace qfno
