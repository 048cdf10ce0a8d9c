#include "pushplan/worker_pool.hpp"

#include <algorithm>

namespace pushplan {

WorkerPool::WorkerPool(int n_threads) {
  n_threads = std::max(1, n_threads);
  threads_.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) threads_.emplace_back([this] { worker_loop(); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  cv_work_.notify_all();
  for (std::thread& t : threads_) t.join();
}

void WorkerPool::parallel_for(int n, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  {
    std::lock_guard lock(mutex_);
    fn_ = &fn;
    total_ = n;
    next_ = 0;
    in_flight_ = n;
    ++generation_;
  }
  cv_work_.notify_all();
  std::unique_lock lock(mutex_);
  cv_done_.wait(lock, [this] { return in_flight_ == 0; });
  fn_ = nullptr;
}

void WorkerPool::worker_loop() {
  uint64_t seen = 0;
  while (true) {
    int index = -1;
    const std::function<void(int)>* fn = nullptr;
    {
      std::unique_lock lock(mutex_);
      cv_work_.wait(lock, [&] { return stop_ || (fn_ && (generation_ != seen || next_ < total_)); });
      if (stop_) return;
      seen = generation_;
      if (next_ >= total_) continue;
      index = next_++;
      fn = fn_;
    }
    (*fn)(index);
    {
      std::lock_guard lock(mutex_);
      if (--in_flight_ == 0) cv_done_.notify_all();
    }
  }
}

}  // namespace pushplan
