#include "codnopt/threading.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace codnopt {

int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const char* env = std::getenv("CODNOPT_THREADS");
  if (env == nullptr || *env == '\0') return hw;
  int cap = 0;
  try {
    cap = std::stoi(env);
  } catch (...) {
    return hw;
  }
  if (cap <= 0) return hw;  // 0 = auto
  return cap < hw ? cap : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(worker_count()), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace codnopt
