#include "qfno/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace qfno {
namespace {

// FFTW planning is not thread-safe; execution on new arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  // Plans a batch of `howmany` transforms of length n over a column-major
  // rows x n matrix, i.e. elements of one row are `rows` apart.
  fftw_plan get(int n, int rows, int sign) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(n, rows, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    // Planned out of place, matching how it is executed.
    auto* in = fftw_alloc_complex(static_cast<std::size_t>(n) * rows);
    auto* out = fftw_alloc_complex(static_cast<std::size_t>(n) * rows);
    int dims[1] = {n};
    fftw_plan plan = fftw_plan_many_dft(1, dims, rows, in, nullptr, rows, 1, out, nullptr, rows, 1,
                                        sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

}  // namespace

CMatrix dft_rows(const CMatrix& a, bool inverse) {
  const int rows = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  CMatrix out(a.rows(), a.cols());
  if (rows == 0 || n == 0) return out;
  // FFTW_BACKWARD is the exp(+i ...) transform.
  const int sign = inverse ? FFTW_FORWARD : FFTW_BACKWARD;
  fftw_plan plan = plan_cache().get(n, rows, sign);
  auto* in_ptr = reinterpret_cast<fftw_complex*>(const_cast<Complex*>(a.data()));
  auto* out_ptr = reinterpret_cast<fftw_complex*>(out.data());
  fftw_execute_dft(plan, in_ptr, out_ptr);
  out *= 1.0 / std::sqrt(static_cast<double>(n));
  return out;
}

CVector dft(const CVector& x, bool inverse) {
  CMatrix row = x.transpose();
  return dft_rows(row, inverse).transpose();
}

}  // namespace qfno
