#include "splitsqp/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace splitsqp::kernels {
namespace {

bool cpu_supports_avx2() {
#if defined(__GNUC__) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* select() {
  const Ops* avx2 = avx2_ops();
  if (const char* env = std::getenv("SPLITSQP_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2) return avx2;
  }
  return avx2 ? avx2 : &scalar_ops();
}

}  // namespace

const Ops* avx2_ops() {
  const Ops* table = detail::avx2_table();
  if (!table || !cpu_supports_avx2()) return nullptr;
  return table;
}

const Ops& ops() {
  static const Ops* selected = select();
  return *selected;
}

}  // namespace splitsqp::kernels
