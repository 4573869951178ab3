#pragma once

#include <map>
#include <memory>

#include "losref/common.hpp"

namespace losref {

namespace detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Precomputed twiddles and bit-reversal permutation for a power-of-two
/// size. Twiddles are stored per stage, contiguously, so the butterfly loops
/// stream through memory.
struct Radix2Plan {
  explicit Radix2Plan(std::size_t n) : size(n), bitrev(n) {
    for (std::size_t len = 2; len <= n; len <<= 1) {
      stage_offset.push_back(twiddle.size());
      const std::size_t half = len / 2;
      for (std::size_t k = 0; k < half; ++k) {
        const double a = -kTwoPi * static_cast<double>(k) / static_cast<double>(len);
        twiddle.push_back({std::cos(a), std::sin(a)});
      }
    }
    std::size_t bits = 0;
    while ((std::size_t{1} << bits) < n) ++bits;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      bitrev[i] = r;
    }
  }

  std::size_t size;
  std::vector<cdouble> twiddle;            // concatenated per-stage tables
  std::vector<std::size_t> stage_offset;   // one entry per stage (len = 2, 4, ...)
  std::vector<std::size_t> bitrev;
};

inline std::shared_ptr<const Radix2Plan> radix2_plan(std::size_t n) {
  static std::map<std::size_t, std::shared_ptr<const Radix2Plan>> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<Radix2Plan>(n);
  return slot;
}

/// In-place iterative radix-2 DIT. inverse selects conjugate twiddles; no
/// scaling is applied here.
inline void radix2_transform(std::vector<cdouble>& x, bool inverse) {
  const std::size_t n = x.size();
  const auto plan = radix2_plan(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = plan->bitrev[i];
    if (i < j) std::swap(x[i], x[j]);
  }
  std::size_t stage = 0;
  for (std::size_t len = 2; len <= n; len <<= 1, ++stage) {
    const std::size_t half = len / 2;
    const cdouble* tw = plan->twiddle.data() + plan->stage_offset[stage];
    for (std::size_t start = 0; start < n; start += len) {
      cdouble* lo = x.data() + start;
      cdouble* hi = lo + half;
      for (std::size_t k = 0; k < half; ++k) {
        const cdouble w = inverse ? std::conj(tw[k]) : tw[k];
        const cdouble odd = hi[k] * w;
        const cdouble even = lo[k];
        lo[k] = even + odd;
        hi[k] = even - odd;
      }
    }
  }
}

/// Bluestein chirp-z transform for arbitrary sizes, built on the radix-2
/// core. Chirp exponents are reduced mod 2n before the complex exponential
/// to keep precision at large n.
inline void bluestein_transform(std::vector<cdouble>& x, bool inverse) {
  const std::size_t n = x.size();
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  std::vector<cdouble> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t k2 = (static_cast<std::uint64_t>(k) * k) % (2 * n);
    double a = -kPi * static_cast<double>(k2) / static_cast<double>(n);
    if (inverse) a = -a;
    chirp[k] = {std::cos(a), std::sin(a)};
  }

  std::vector<cdouble> a(m, cdouble{0.0, 0.0});
  std::vector<cdouble> b(m, cdouble{0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  radix2_transform(a, false);
  radix2_transform(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2_transform(a, true);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * scale * chirp[k];
}

}  // namespace detail

/// In-place DFT, X[q] = sum_i x[i] e^{-j 2 pi q i / n}. Any length >= 1.
inline void fft_inplace(std::vector<cdouble>& x) {
  if (x.size() <= 1) return;
  if (detail::is_power_of_two(x.size())) {
    detail::radix2_transform(x, false);
  } else {
    detail::bluestein_transform(x, false);
  }
}

/// In-place inverse DFT with 1/n scaling: x[i] = (1/n) sum_q X[q] e^{+j 2 pi q i / n}.
inline void ifft_inplace(std::vector<cdouble>& x) {
  const std::size_t n = x.size();
  if (n <= 1) return;
  if (detail::is_power_of_two(n)) {
    detail::radix2_transform(x, true);
  } else {
    detail::bluestein_transform(x, true);
  }
  const double scale = 1.0 / static_cast<double>(n);
  for (auto& v : x) v *= scale;
}

inline std::vector<cdouble> fft(std::vector<cdouble> x) {
  fft_inplace(x);
  return x;
}

inline std::vector<cdouble> ifft(std::vector<cdouble> x) {
  ifft_inplace(x);
  return x;
}

}  // namespace losref
