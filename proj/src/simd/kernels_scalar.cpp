#include <cmath>

#include "rkbs/simd/kernels.hpp"

namespace rkbs::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

double sum_squares_scalar(const double* a, std::size_t n) { return dot_scalar(a, a, n); }

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void matvec_rows_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x,
                        double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(a + r * cols, x, cols);
}

constexpr KernelTable kScalar{Backend::Scalar, dot_scalar, sum_squares_scalar, axpy_scalar,
                              matvec_rows_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace rkbs::simd::detail
