#include <cmath>
#include <cstdlib>
#include <string>
#include <random>
#include <vector>

#include "doctest.h"
#include "tlforge/kernels.hpp"

using namespace tlforge::kernels;

namespace {

std::vector<double> randn(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

// Relative closeness with a floor, for results that reassociate sums.
bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-12 * std::max(1.0, scale); }

void check_table(const KernelTable& k) {
  std::mt19937_64 rng(11);
  for (std::size_t rows : {0u, 1u, 3u, 4u, 5u, 8u, 13u, 64u}) {
    for (std::size_t cols : {0u, 1u, 2u, 3u, 4u, 7u, 16u, 33u, 65u}) {
      const auto w = randn(rng, rows * cols);
      const auto x = randn(rng, cols);
      const auto xr = randn(rng, rows);
      const auto y0 = randn(rng, rows);
      const auto yc0 = randn(rng, cols);

      // dot vs naive sum.
      double ref = 0.0, mag = 0.0;
      for (std::size_t i = 0; i < cols; ++i) {
        ref += x[i] * yc0[i];
        mag += std::abs(x[i] * yc0[i]);
      }
      CHECK(close(k.dot(x.data(), yc0.data(), cols), ref, mag));

      // axpy
      std::vector<double> y = yc0;
      k.axpy(0.37, x.data(), y.data(), cols);
      for (std::size_t i = 0; i < cols; ++i) CHECK(close(y[i], yc0[i] + 0.37 * x[i], 1.0));

      // gemv: y += W x
      std::vector<double> g = y0;
      k.gemv(w.data(), rows, cols, x.data(), g.data());
      for (std::size_t r = 0; r < rows; ++r) {
        double s = y0[r], m = std::abs(y0[r]);
        for (std::size_t c = 0; c < cols; ++c) {
          s += w[r * cols + c] * x[c];
          m += std::abs(w[r * cols + c] * x[c]);
        }
        CHECK(close(g[r], s, m));
      }

      // gemv_t: y += W^T x
      std::vector<double> gt = yc0;
      k.gemv_t(w.data(), rows, cols, xr.data(), gt.data());
      for (std::size_t c = 0; c < cols; ++c) {
        double s = yc0[c], m = std::abs(yc0[c]);
        for (std::size_t r = 0; r < rows; ++r) {
          s += w[r * cols + c] * xr[r];
          m += std::abs(w[r * cols + c] * xr[r]);
        }
        CHECK(close(gt[c], s, m));
      }

      // ger: W += a b^T
      std::vector<double> wg = w;
      k.ger(wg.data(), rows, cols, xr.data(), x.data());
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
          CHECK(close(wg[r * cols + c], w[r * cols + c] + xr[r] * x[c], 1.0 + std::abs(w[r * cols + c])));
        }
      }
    }
  }
}

}  // namespace

TEST_CASE("scalar kernels match naive loops") { check_table(scalar_table()); }

TEST_CASE("avx2 kernels match naive loops") {
  const KernelTable* k = avx2_table();
  if (k == nullptr) {
    MESSAGE("AVX2/FMA kernels unavailable on this machine; skipped");
    return;
  }
  CHECK(k->isa == Isa::kAvx2);
  check_table(*k);
}

TEST_CASE("avx2 and scalar agree on model-sized shapes") {
  const KernelTable* k = avx2_table();
  if (k == nullptr) return;
  const KernelTable& s = scalar_table();
  std::mt19937_64 rng(5);
  for (auto [rows, cols] : {std::pair<std::size_t, std::size_t>{192, 32}, {192, 64}, {64, 64}, {16, 64}}) {
    const auto w = randn(rng, rows * cols);
    const auto x = randn(rng, cols);
    std::vector<double> y1(rows, 0.0), y2(rows, 0.0);
    s.gemv(w.data(), rows, cols, x.data(), y1.data());
    k->gemv(w.data(), rows, cols, x.data(), y2.data());
    for (std::size_t r = 0; r < rows; ++r) CHECK(close(y1[r], y2[r], 10.0 * std::sqrt(double(cols))));
  }
}

TEST_CASE("dispatch honours the environment override") {
  const char* env = std::getenv("TLFORGE_KERNELS");
  const KernelTable& a = active();
  if (env != nullptr && std::string(env) == "scalar") {
    CHECK(a.isa == Isa::kScalar);
  } else {
    CHECK(a.isa == (avx2_table() ? Isa::kAvx2 : Isa::kScalar));
  }
  MESSAGE("active kernels: " << a.name);
}
