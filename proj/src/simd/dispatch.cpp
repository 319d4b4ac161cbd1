#include <atomic>
#include <cstdlib>
#include <string>

#include "rkbs/error.hpp"
#include "rkbs/simd/kernels.hpp"

namespace rkbs::simd {

namespace detail {
#if !defined(RKBS_HAVE_AVX2)
const KernelTable* avx2_table() noexcept { return nullptr; }
#endif
#if !defined(RKBS_HAVE_NEON)
const KernelTable* neon_table() noexcept { return nullptr; }
#endif
}  // namespace detail

std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) noexcept {
  if (name == "scalar") return Backend::Scalar;
  if (name == "avx2") return Backend::Avx2;
  if (name == "neon") return Backend::Neon;
  return std::nullopt;
}

bool backend_supported(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(RKBS_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::Neon: return detail::neon_table() != nullptr;
  }
  return false;
}

const KernelTable& kernels_for(Backend b) {
  require(backend_supported(b), Errc::InvalidArgument,
          "SIMD backend '" + std::string(to_string(b)) + "' is not available on this CPU");
  switch (b) {
    case Backend::Avx2: return *detail::avx2_table();
    case Backend::Neon: return *detail::neon_table();
    case Backend::Scalar: break;
  }
  return detail::scalar_table();
}

namespace {

const KernelTable* detect() noexcept {
  if (const char* env = std::getenv("RKBS_SIMD")) {
    if (auto b = parse_backend(env); b && backend_supported(*b)) return &kernels_for(*b);
  }
  if (backend_supported(Backend::Avx2)) return detail::avx2_table();
  if (backend_supported(Backend::Neon)) return detail::neon_table();
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> table{detect()};
  return table;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

Backend active_backend() noexcept { return active().backend; }

void set_backend(Backend b) { slot().store(&kernels_for(b), std::memory_order_release); }

}  // namespace rkbs::simd
