#include "sdsp/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>

namespace sdsp {
namespace {

std::atomic<int> g_limit{0};

int env_limit() {
  const char* v = std::getenv("SDSP_THREADS");
  if (v == nullptr) return 0;
  try {
    return std::max(0, std::stoi(v));
  } catch (...) {
    return 0;
  }
}

}  // namespace

int worker_count() {
  int n = omp_get_max_threads();
  const int cap = g_limit.load() > 0 ? g_limit.load() : env_limit();
  if (cap > 0) n = std::min(n, cap);
  return std::max(1, n);
}

void set_worker_limit(int limit) { g_limit.store(std::max(0, limit)); }

}  // namespace sdsp
