#include "wmbridge/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "wmbridge/errors.hpp"
#include "wmbridge/parallel.hpp"

namespace wmb {

namespace {

struct PlanKey {
  std::size_t n;
  std::size_t outer;
  std::size_t inner;
  int sign;
  auto operator<=>(const PlanKey&) const = default;
};

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key) {
    std::lock_guard lock(mutex_);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;

    const std::size_t total = key.n * key.outer * key.inner;
    auto* scratch = fftw_alloc_complex(total);
    fftw_iodim dim{static_cast<int>(key.n), static_cast<int>(key.inner), static_cast<int>(key.inner)};
    fftw_iodim loops[2] = {
        {static_cast<int>(key.outer), static_cast<int>(key.n * key.inner), static_cast<int>(key.n * key.inner)},
        {static_cast<int>(key.inner), 1, 1}};
    fftw_plan plan = fftw_plan_guru_dft(1, &dim, 2, loops, scratch, scratch, key.sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(std::span<cplx> data, const PlanKey& key) {
  fftw_plan plan = plan_cache().get(key);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
}

int fftw_sign(FftDirection direction) { return direction == FftDirection::forward ? FFTW_FORWARD : FFTW_BACKWARD; }

}  // namespace

void fft(std::span<cplx> data, FftDirection direction) {
  execute(data, PlanKey{data.size(), 1, 1, fftw_sign(direction)});
}

void fft_axis(std::span<cplx> data, std::span<const std::size_t> shape, std::size_t axis, FftDirection direction) {
  if (axis >= shape.size()) throw InputError("fft axis out of range");
  std::size_t outer = 1;
  std::size_t inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  if (outer * inner * shape[axis] != data.size()) throw InputError("fft shape does not match data size");
  execute(data, PlanKey{shape[axis], outer, inner, fftw_sign(direction)});
}

std::vector<cplx> spectral_derivative(std::span<const cplx> values, const Grid1D& grid, int order) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw GridMismatch("spectral_derivative: size mismatch");
  std::vector<cplx> work(values.begin(), values.end());
  if (order == 0) return work;
  fft(work, FftDirection::forward);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t q = 0; q < n; ++q) {
    if (q == n / 2 && order % 2 != 0) {
      work[q] = 0.0;
      continue;
    }
    work[q] *= std::pow(cplx(0.0, grid.wavenumber(q)), order) * inv_n;
  }
  fft(work, FftDirection::backward);
  return work;
}

std::vector<double> spectral_derivative(std::span<const double> values, const Grid1D& grid, int order) {
  std::vector<cplx> c(values.begin(), values.end());
  auto d = spectral_derivative(std::span<const cplx>(c), grid, order);
  std::vector<double> out(d.size());
  std::transform(d.begin(), d.end(), out.begin(), [](cplx z) { return z.real(); });
  return out;
}

std::vector<cplx> fourier_shift(std::span<const cplx> values, const Grid1D& grid, double shift) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw GridMismatch("fourier_shift: size mismatch");
  std::vector<cplx> work(values.begin(), values.end());
  fft(work, FftDirection::forward);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t q = 0; q < n; ++q) {
    const double k = grid.wavenumber(q);
    // The Nyquist bin is its own partner; a real factor keeps real data real.
    work[q] *= (q == n / 2 ? cplx(std::cos(k * shift), 0.0) : std::polar(1.0, k * shift)) * inv_n;
  }
  fft(work, FftDirection::backward);
  return work;
}

void centered_dft(std::span<const cplx> in, std::span<cplx> out, int sign) {
  const std::size_t n = in.size();
  if (out.size() != n) throw InputError("centered_dft: size mismatch");
  const std::size_t half = n / 2;
  std::vector<cplx> work(n);
  for (std::size_t k = 0; k < n; ++k) work[k] = in[(k + half) % n];
  fft(work, sign > 0 ? FftDirection::backward : FftDirection::forward);
  for (std::size_t m = 0; m < n; ++m) out[(m + half) % n] = work[m];
}

}  // namespace wmb
