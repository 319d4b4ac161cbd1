#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "rkbs/simd/kernels.hpp"

using namespace rkbs::simd;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

std::vector<const KernelTable*> tables() {
  std::vector<const KernelTable*> out{&detail::scalar_table()};
  if (detail::avx2_table() && backend_supported(Backend::Avx2)) out.push_back(detail::avx2_table());
  if (detail::neon_table() && backend_supported(Backend::Neon)) out.push_back(detail::neon_table());
  return out;
}

}  // namespace

TEST_CASE("backend names") {
  for (auto b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) CHECK(parse_backend(to_string(b)) == b);
  CHECK_FALSE(parse_backend("sse9").has_value());
  CHECK(backend_supported(Backend::Scalar));
}

TEST_CASE("scalar kernels") {
  const auto& s = detail::scalar_table();
  const double a[] = {1, 2, 3}, b[] = {4, -5, 6};
  CHECK(s.dot(a, b, 3) == 12.0);
  CHECK(s.sum_squares(a, 3) == 14.0);
  double y[] = {1, 1, 1};
  s.axpy(2.0, a, y, 3);
  CHECK(y[2] == 7.0);
  const double m[] = {1, 2, 3, 4, 5, 6};
  double out[2];
  s.matvec_rows(m, 2, 3, a, out);
  CHECK(out[0] == 14.0);
  CHECK(out[1] == 32.0);
  CHECK(s.dot(a, b, 0) == 0.0);
}

TEST_CASE("backends agree") {
  std::mt19937_64 rng(2024);
  const auto& ref = detail::scalar_table();
  for (const auto* t : tables()) {
    CAPTURE(to_string(t->backend));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 33u, 100u, 1023u}) {
      const auto x = random_vec(rng, n), z = random_vec(rng, n);
      auto y1 = random_vec(rng, n);
      auto y2 = y1;
      ref.axpy(0.37, x.data(), y1.data(), n);
      t->axpy(0.37, x.data(), y2.data(), n);
      CHECK(std::memcmp(y1.data(), y2.data(), n * sizeof(double)) == 0);

      double absdot = 0.0, sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        absdot += std::abs(x[i] * z[i]);
        sq += x[i] * x[i];
      }
      const double tol = 4.0 * double(n + 1) * 1.1102230246251565e-16;
      CHECK(std::abs(ref.dot(x.data(), z.data(), n) - t->dot(x.data(), z.data(), n)) <= tol * absdot + 1e-300);
      CHECK(std::abs(ref.sum_squares(x.data(), n) - t->sum_squares(x.data(), n)) <= tol * sq + 1e-300);

      const std::size_t rows = 5;
      const auto a = random_vec(rng, rows * n);
      std::vector<double> r1(rows), r2(rows);
      ref.matvec_rows(a.data(), rows, n, x.data(), r1.data());
      t->matvec_rows(a.data(), rows, n, x.data(), r2.data());
      for (std::size_t r = 0; r < rows; ++r) {
        double mag = 0.0;
        for (std::size_t c = 0; c < n; ++c) mag += std::abs(a[r * n + c] * x[c]);
        CHECK(std::abs(r1[r] - r2[r]) <= tol * mag + 1e-300);
      }
    }
  }
}

TEST_CASE("set_backend switches the active table") {
  const auto before = active_backend();
  set_backend(Backend::Scalar);
  CHECK(active_backend() == Backend::Scalar);
  const std::vector<double> a{1, 2}, b{3, 4};
  CHECK(dot(a, b) == 11.0);
  set_backend(before);
  CHECK(active_backend() == before);
}
