#include "stamp/parallel.hpp"

#include <atomic>
#include <thread>

namespace stamp {

namespace {
std::atomic<int> g_threads{1};
}

void set_threads(int n) { g_threads.store(n < 0 ? 1 : n); }

int threads() { return g_threads.load(); }

int hardware_threads() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {
int resolved_threads() {
  int n = g_threads.load();
  return n == 0 ? hardware_threads() : n;
}
} // namespace detail

} // namespace stamp
