#include "chaosqfc/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace chaosqfc::fft {

namespace {

enum class Kind { forward, inverse, real };

std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

// Plans are made once per (size, kind) and reused with the new-array execute
// functions, which are thread safe.
fftw_plan plan_for(std::size_t n, Kind kind) {
  static std::map<std::pair<std::size_t, Kind>, fftw_plan> cache;
  std::lock_guard lock(plan_mutex());
  auto key = std::make_pair(n, kind);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const int ni = static_cast<int>(n);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = nullptr;
  if (kind == Kind::real) {
    double* in = fftw_alloc_real(n);
    fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
    p = fftw_plan_dft_r2c_1d(ni, in, out, flags);
    fftw_free(in);
    fftw_free(out);
  } else {
    fftw_complex* buf = fftw_alloc_complex(n);
    p = fftw_plan_dft_1d(ni, buf, buf, kind == Kind::forward ? FFTW_FORWARD : FFTW_BACKWARD, flags);
    fftw_free(buf);
  }
  cache.emplace(key, p);
  return p;
}

fftw_complex* as_fftw(std::complex<double>* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void forward(std::span<std::complex<double>> data) {
  if (data.size() < 2) return;
  fftw_execute_dft(plan_for(data.size(), Kind::forward), as_fftw(data.data()), as_fftw(data.data()));
}

void inverse(std::span<std::complex<double>> data) {
  if (data.size() < 2) return;
  fftw_execute_dft(plan_for(data.size(), Kind::inverse), as_fftw(data.data()), as_fftw(data.data()));
  const double s = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= s;
}

void forward_real(std::span<const double> in, std::span<std::complex<double>> out) {
  // FFTW does not write to the input of an out-of-place r2c plan.
  fftw_execute_dft_r2c(plan_for(in.size(), Kind::real), const_cast<double*>(in.data()), as_fftw(out.data()));
}

}  // namespace chaosqfc::fft
