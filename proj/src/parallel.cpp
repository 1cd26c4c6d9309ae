#include "wavemech/parallel.hpp"
#include "wavemech/core.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wavemech {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::shape: return "shape error";
    case ErrorKind::out_of_bounds: return "out-of-bounds error";
    case ErrorKind::singularity: return "singularity error";
    case ErrorKind::superluminal: return "superluminal error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::diverged: return "propagation diverged";
    case ErrorKind::io: return "io error";
  }
  return "error";
}

namespace {

int initial_thread_count() {
  if (const char* env = std::getenv("WAVEMECH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::atomic<int>& threads_setting() {
  static std::atomic<int> n{initial_thread_count()};
  return n;
}

}  // namespace

int thread_count() { return threads_setting().load(); }

void set_thread_count(int n) { threads_setting().store(std::max(1, n)); }

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(thread_count()), n);
  if (workers <= 1 || n < 2048) {
    if (n > 0) body(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t b = w * chunk;
    const std::size_t e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(n, chunk));
  for (auto& t : pool) t.join();
}

}  // namespace wavemech
