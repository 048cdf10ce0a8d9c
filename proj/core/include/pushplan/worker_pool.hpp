#pragma once

#include <condition_variable>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace pushplan {

/// Fixed-size thread pool for index-parallel loops. Tasks write to disjoint
/// output slots, so results never depend on scheduling.
class WorkerPool {
 public:
  explicit WorkerPool(int n_threads);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()); }

  /// Runs fn(i) for i in [0, n); blocks until all complete. Exceptions thrown
  /// by fn must be handled inside fn.
  void parallel_for(int n, const std::function<void(int)>& fn);

 private:
  void worker_loop();

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable cv_work_;
  std::condition_variable cv_done_;
  const std::function<void(int)>* fn_ = nullptr;
  int total_ = 0;
  int next_ = 0;
  int in_flight_ = 0;
  uint64_t generation_ = 0;
  bool stop_ = false;
};

}  // namespace pushplan
