#include "losref/fft.hpp"

#include <gtest/gtest.h>

namespace {

using losref::cdouble;
using losref::kTwoPi;

// Independent O(n^2) reference transform.
std::vector<cdouble> naive_dft(const std::vector<cdouble>& x, bool inverse) {
  const std::size_t n = x.size();
  std::vector<cdouble> out(n, cdouble{0.0, 0.0});
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t q = 0; q < n; ++q) {
    cdouble acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      const double a = sign * kTwoPi * static_cast<double>(q) * static_cast<double>(i) /
                       static_cast<double>(n);
      acc += x[i] * cdouble{std::cos(a), std::sin(a)};
    }
    out[q] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

std::vector<cdouble> random_signal(std::size_t n, std::uint64_t seed) {
  losref::Rng rng(seed);
  std::vector<cdouble> x(n);
  for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  return x;
}

double max_abs_diff(const std::vector<cdouble>& a, const std::vector<cdouble>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

TEST(Fft, MatchesNaiveDftPowerOfTwo) {
  for (std::size_t n : {2u, 8u, 64u, 256u}) {
    const auto x = random_signal(n, 42 + n);
    EXPECT_LT(max_abs_diff(losref::fft(x), naive_dft(x, false)), 1e-10 * static_cast<double>(n));
    EXPECT_LT(max_abs_diff(losref::ifft(x), naive_dft(x, true)), 1e-12);
  }
}

TEST(Fft, MatchesNaiveDftArbitrarySizes) {
  for (std::size_t n : {3u, 5u, 12u, 100u, 127u}) {
    const auto x = random_signal(n, 7 + n);
    EXPECT_LT(max_abs_diff(losref::fft(x), naive_dft(x, false)), 1e-9 * static_cast<double>(n))
        << "n=" << n;
    EXPECT_LT(max_abs_diff(losref::ifft(x), naive_dft(x, true)), 1e-11) << "n=" << n;
  }
}

TEST(Fft, RoundTripLargeSize) {
  const auto x = random_signal(65536, 9);
  auto y = losref::fft(x);
  const auto back = losref::ifft(y);
  EXPECT_LT(max_abs_diff(back, x), 1e-11);
}

TEST(Fft, ParsevalHolds) {
  const auto x = random_signal(2048, 3);
  const auto y = losref::fft(x);
  double ex = 0.0, ey = 0.0;
  for (const auto& v : x) ex += std::norm(v);
  for (const auto& v : y) ey += std::norm(v);
  EXPECT_NEAR(ey / static_cast<double>(x.size()), ex, 1e-9 * ex);
}

TEST(Fft, ImpulseGivesFlatSpectrum) {
  std::vector<cdouble> x(16, cdouble{0.0, 0.0});
  x[0] = {1.0, 0.0};
  for (const auto& v : losref::fft(x)) EXPECT_NEAR(std::abs(v), 1.0, 1e-12);
}

}  // namespace
