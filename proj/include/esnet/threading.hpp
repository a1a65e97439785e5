#pragma once

// Minimal persistent worker pool. Work items are claimed through an atomic
// counter, so scheduling is dynamic, but callers are expected to write results
// into per-index slots and reduce them in index order afterwards — that is
// what makes every numeric result independent of the worker count.

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace esnet {

class WorkerPool {
 public:
  // workers <= 0 means hardware concurrency; 1 runs everything inline
  explicit WorkerPool(int workers = 0) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    count_ = workers;
    if (workers == 1) return;
    threads_.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) threads_.emplace_back([this] { worker(); });
  }

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  ~WorkerPool() {
    if (threads_.empty()) return;
    {
      std::scoped_lock lk(mu_);
      stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : threads_) t.join();
  }

  int size() const { return count_; }

  // Runs fn(i) for i in [0, n). Not reentrant. The first exception thrown by
  // any item is rethrown here after all workers drain.
  void for_each_index(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    if (threads_.empty()) {
      for (std::size_t i = 0; i < n; ++i) fn(i);
      return;
    }
    {
      std::scoped_lock lk(mu_);
      fn_ = &fn;
      total_ = n;
      next_.store(0, std::memory_order_relaxed);
      err_ = nullptr;
      active_ = threads_.size();
      ++generation_;
    }
    cv_work_.notify_all();
    {
      std::unique_lock lk(mu_);
      cv_done_.wait(lk, [&] { return active_ == 0; });
    }
    if (err_) std::rethrow_exception(err_);
  }

 private:
  void worker() {
    std::uint64_t seen = 0;
    std::unique_lock lk(mu_);
    while (true) {
      cv_work_.wait(lk, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
      const auto* fn = fn_;
      std::size_t total = total_;
      lk.unlock();
      while (true) {
        std::size_t i = next_.fetch_add(1, std::memory_order_relaxed);
        if (i >= total) break;
        try {
          (*fn)(i);
        } catch (...) {
          std::scoped_lock el(err_mu_);
          if (!err_) err_ = std::current_exception();
        }
      }
      lk.lock();
      if (--active_ == 0) cv_done_.notify_all();
    }
  }

  std::vector<std::thread> threads_;
  std::mutex mu_;
  std::condition_variable cv_work_, cv_done_;
  const std::function<void(std::size_t)>* fn_ = nullptr;
  std::size_t total_ = 0;
  std::atomic<std::size_t> next_{0};
  std::size_t active_ = 0;
  std::uint64_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr err_;
  std::mutex err_mu_;
  int count_ = 1;
};

}  // namespace esnet
