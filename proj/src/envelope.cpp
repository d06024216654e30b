#include "chaosqfc/envelope.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "chaosqfc/errors.hpp"
#include "chaosqfc/stats.hpp"

namespace chaosqfc {

ComplexEnvelope ComplexEnvelope::zeros(std::size_t n, double dt, double carrier) {
  return ComplexEnvelope(std::vector<cplx>(n), dt, carrier);
}

double ComplexEnvelope::mean_flux() const { return mean_power(samples); }

void ComplexEnvelope::validate() const {
  if (samples.size() < 2) throw InvalidArgument("envelope: need at least 2 samples");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("envelope: dt must be positive");
  if (!std::isfinite(carrier_offset)) throw InvalidArgument("envelope: carrier offset not finite");
  if (!std::isfinite(mean_flux())) throw InvalidArgument("envelope: flux not finite");
}

bool same_grid(const ComplexEnvelope& a, const ComplexEnvelope& b) noexcept {
  return a.size() == b.size() && a.dt == b.dt && a.carrier_offset == b.carrier_offset;
}

void require_same_grid(const ComplexEnvelope& a, const ComplexEnvelope& b, const char* where) {
  if (!same_grid(a, b)) throw InvalidArgument(std::string(where) + ": envelopes are on different grids");
}

void require_common_grid(std::span<const ComplexEnvelope> ensemble, const char* where) {
  if (ensemble.empty()) throw InvalidArgument(std::string(where) + ": empty ensemble");
  for (const auto& e : ensemble) {
    e.validate();
    require_same_grid(ensemble.front(), e, where);
  }
}

std::vector<double> fft_frequencies(std::size_t n, double dt) {
  std::vector<double> f(n);
  const double df = 1.0 / (static_cast<double>(n) * dt);
  for (std::size_t k = 0; k < n; ++k) f[k] = static_cast<double>(signed_bin(k, n)) * df;
  return f;
}

double mean_power(std::span<const cplx> x) {
  KahanSum s;
  for (const auto& v : x) s.add(std::norm(v));
  return x.empty() ? 0.0 : s.value() / static_cast<double>(x.size());
}

cplx mean_value(std::span<const cplx> x) {
  KahanSum re, im;
  for (const auto& v : x) {
    re.add(v.real());
    im.add(v.imag());
  }
  const double n = x.empty() ? 1.0 : static_cast<double>(x.size());
  return {re.value() / n, im.value() / n};
}

namespace {

constexpr std::array<char, 8> kMagic{'C', 'Q', 'F', 'C', 'E', 'N', 'V', '1'};
constexpr std::uint32_t kRealOnly = 1u;

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}
void put_u32(std::ostream& os, std::uint32_t v) {
  std::array<char, 4> b{};
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 4);
}
void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 8)) throw IoError("read_envelope: truncated stream");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
std::uint32_t get_u32(std::istream& is) {
  std::array<unsigned char, 4> b{};
  if (!is.read(reinterpret_cast<char*>(b.data()), 4)) throw IoError("read_envelope: truncated stream");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}
double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void put_header(std::ostream& os, std::uint32_t flags, double dt, double carrier, std::uint64_t count) {
  os.write(kMagic.data(), kMagic.size());
  put_u32(os, flags);
  put_u32(os, 0);
  put_f64(os, dt);
  put_f64(os, carrier);
  put_u64(os, count);
}

}  // namespace

void write_envelope(std::ostream& os, const ComplexEnvelope& env) {
  put_header(os, 0, env.dt, env.carrier_offset, env.size());
  for (const auto& v : env.samples) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
  if (!os) throw IoError("write_envelope: stream error");
}

void write_real_trace(std::ostream& os, std::span<const double> samples, double dt) {
  put_header(os, kRealOnly, dt, 0.0, samples.size());
  for (double v : samples) put_f64(os, v);
  if (!os) throw IoError("write_real_trace: stream error");
}

EnvelopeRecord read_envelope(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw IoError("read_envelope: not an envelope container");
  const std::uint32_t flags = get_u32(is);
  get_u32(is);
  EnvelopeRecord rec;
  rec.real_only = (flags & kRealOnly) != 0;
  rec.envelope.dt = get_f64(is);
  rec.envelope.carrier_offset = get_f64(is);
  const std::uint64_t count = get_u64(is);
  if (count > (std::uint64_t{1} << 34)) throw IoError("read_envelope: implausible sample count");
  rec.envelope.samples.resize(count);
  for (auto& v : rec.envelope.samples) {
    const double re = get_f64(is);
    const double im = rec.real_only ? 0.0 : get_f64(is);
    v = {re, im};
  }
  return rec;
}

void write_envelope_csv(std::ostream& os, const ComplexEnvelope& env) {
  os << "t,re,im\n";
  char line[96];
  for (std::size_t j = 0; j < env.size(); ++j) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", static_cast<double>(j) * env.dt,
                  env.samples[j].real(), env.samples[j].imag());
    os << line;
  }
  if (!os) throw IoError("write_envelope_csv: stream error");
}

}  // namespace chaosqfc
