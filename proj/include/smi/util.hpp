#pragma once

#include <chrono>
#include <condition_variable>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace smi::util {

// Applies fn to every index in [0, n) using up to max_workers threads.
// Output order is by index, independent of scheduling. Exceptions are
// rethrown on the calling thread (first one wins).
template <typename Fn>
void parallel_for(std::size_t n, int max_workers, Fn fn) {
  if (max_workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::mutex mu;
  std::size_t next = 0;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (error || next >= n) return;
        i = next++;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const int workers = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(max_workers)));
  threads.reserve(workers);
  for (int t = 0; t < workers; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

// Simple token bucket; rate <= 0 disables limiting.
class TokenBucket {
 public:
  explicit TokenBucket(double per_second, double burst = 1.0)
      : rate_(per_second), capacity_(burst < 1.0 ? 1.0 : burst), tokens_(capacity_),
        last_(clock::now()) {}

  void acquire() {
    if (rate_ <= 0.0) return;
    std::unique_lock<std::mutex> lock(mu_);
    for (;;) {
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      const double missing = 1.0 - tokens_;
      lock.unlock();
      std::this_thread::sleep_for(std::chrono::duration<double>(missing / rate_));
      lock.lock();
    }
  }

 private:
  using clock = std::chrono::steady_clock;

  void refill() {
    const auto now = clock::now();
    const double dt = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    tokens_ = std::min(capacity_, tokens_ + dt * rate_);
  }

  double rate_;
  double capacity_;
  double tokens_;
  clock::time_point last_;
  std::mutex mu_;
};

// Reads a whole file; throws on failure.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace smi::util
