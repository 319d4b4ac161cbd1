#pragma once

// Dense double-precision kernels behind a runtime-selected backend.
//
// Every backend computes axpy with one fused multiply-add per element, so
// axpy results are bitwise identical across backends. Reductions (dot,
// sum_squares) use backend-specific summation orders and agree to within a
// few ulps times the length.

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace rkbs::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  // y[i] = fma(alpha, x[i], y[i])
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[r] = dot(A[r, :], x) for a row-major rows x cols block
  void (*matvec_rows)(const double* a, std::size_t rows, std::size_t cols, const double* x,
                      double* y);
};

std::string_view to_string(Backend b) noexcept;
std::optional<Backend> parse_backend(std::string_view name) noexcept;

bool backend_supported(Backend b) noexcept;
const KernelTable& kernels_for(Backend b);

// The active table is chosen once from the CPU (and RKBS_SIMD=scalar|avx2|neon
// when set); set_backend overrides it, mainly for tests.
const KernelTable& active() noexcept;
Backend active_backend() noexcept;
void set_backend(Backend b);

namespace detail {
const KernelTable& scalar_table() noexcept;
const KernelTable* avx2_table() noexcept;  // nullptr when not compiled in
const KernelTable* neon_table() noexcept;  // nullptr when not compiled in
}  // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sum_squares(std::span<const double> a) {
  return active().sum_squares(a.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void matvec_rows(std::span<const double> a, std::size_t rows, std::size_t cols,
                        std::span<const double> x, std::span<double> y) {
  active().matvec_rows(a.data(), rows, cols, x.data(), y.data());
}

}  // namespace rkbs::simd
