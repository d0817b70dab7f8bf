#pragma once

// Coordinator/worker execution.  The calling thread is the coordinator: it
// submits homogeneous batches of idempotent tasks and blocks until the batch
// is done.  Workers share no mutable state; each task writes only to its own
// output slot, so results never depend on scheduling.

#include <algorithm>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace fastecpp {

class WorkerPool {
 public:
  explicit WorkerPool(unsigned workers = 1) : size_(std::max(1u, workers)) {
    // With one worker everything runs inline on the coordinator.
    if (size_ > 1) {
      threads_.reserve(size_);
      for (unsigned i = 0; i < size_; ++i) threads_.emplace_back([this] { loop(); });
    }
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    {
      std::lock_guard lock(mu_);
      stopping_ = true;
    }
    wake_.notify_all();
    for (auto& t : threads_) t.join();
  }

  unsigned size() const { return size_; }

  /// Runs fn(i) for i in [0, n); must not be called from inside a task.
  /// Task i is executed exactly once per call; the first exception thrown by
  /// any task is rethrown here after the batch drains.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (threads_.empty() || n == 1) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    std::unique_lock lock(mu_);
    batch_ = &fn;
    batch_size_ = n;
    next_ = 0;
    pending_ = n;
    error_ = nullptr;
    ++generation_;
    wake_.notify_all();
    done_.wait(lock, [this] { return pending_ == 0; });
    batch_ = nullptr;
    if (error_) std::rethrow_exception(error_);
  }

  /// Maps fn over [0, n) into a vector, slot i holding fn(i).
  template <class Fn>
  auto map(std::size_t n, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
    std::vector<decltype(fn(std::size_t{}))> out(n);
    parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
    return out;
  }

 private:
  void loop() {
    std::uint64_t seen = 0;
    std::unique_lock lock(mu_);
    for (;;) {
      wake_.wait(lock, [&] { return stopping_ || (batch_ && generation_ != seen && next_ < batch_size_); });
      if (stopping_) return;
      while (batch_ && next_ < batch_size_) {
        const std::size_t i = next_++;
        const auto* fn = batch_;
        lock.unlock();
        try {
          (*fn)(i);
        } catch (...) {
          std::lock_guard g(err_mu_);
          if (!error_) error_ = std::current_exception();
        }
        lock.lock();
        if (--pending_ == 0) done_.notify_one();
      }
      seen = generation_;
    }
  }

  unsigned size_;
  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::mutex err_mu_;
  std::condition_variable wake_;
  std::condition_variable done_;
  const std::function<void(std::size_t)>* batch_ = nullptr;
  std::size_t batch_size_ = 0;
  std::size_t next_ = 0;
  std::size_t pending_ = 0;
  std::uint64_t generation_ = 0;
  std::exception_ptr error_;
  bool stopping_ = false;
};

/// Splits [0, n) into `parts` contiguous ranges of nearly equal length.
inline std::vector<std::pair<std::size_t, std::size_t>> even_ranges(std::size_t n, std::size_t parts) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  parts = std::max<std::size_t>(1, std::min(parts, n));
  if (n == 0) return out;
  const std::size_t base = n / parts, extra = n % parts;
  std::size_t lo = 0;
  for (std::size_t p = 0; p < parts; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    out.emplace_back(lo, lo + len);
    lo += len;
  }
  return out;
}

}  // namespace fastecpp
