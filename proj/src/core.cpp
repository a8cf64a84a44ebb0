#include "fracmod/core.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

namespace fracmod {

namespace {

int default_threads() {
  if (const char* env = std::getenv("FRACMOD_THREADS")) {
    int v = std::atoi(env);
    if (v > 0) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  int threads) {
  if (n == 0) return;
  int nt = threads > 0 ? threads : default_threads();
  std::size_t max_useful = (n + 255) / 256;  // keep chunks >= 256 items
  nt = static_cast<int>(std::min<std::size_t>(nt, max_useful));
  if (nt <= 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::size_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t b = static_cast<std::size_t>(t) * chunk;
    std::size_t e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fracmod
