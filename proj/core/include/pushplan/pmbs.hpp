#pragma once

#include <functional>
#include <utility>

#include "pushplan/mcts.hpp"
#include "pushplan/worker_pool.hpp"

namespace pushplan::pmbs {

using mcts::SearchConfig;
using mcts::SearchResult;
using mcts::SearchStats;
using mcts::SearchTree;
using mcts::TreeNode;

/// Raised by select_batch when no (node, action) pair is selectable; the
/// caller terminates the search (tree fully explored).
class TreeExhausted : public mcts::SearchError {
 public:
  TreeExhausted() : SearchError("no selectable (node, action) pair remains") {}
};

struct ParallelConfig : SearchConfig {
  int n_envs = 64;           // N_e, concurrent simulation environments
  int worker_threads = 1;    // pool size; behavior never depends on it
  bool leaf_parallel = true; // spread surplus environments over the batch
};

struct SelectionBatch {
  std::vector<std::pair<TreeNode*, PushAction>> pairs;  // unique by construction
};

/// Virtual-loss UCB: visit counts are inflated by the virtual counts of
/// pairs selected earlier in the same batch. With all virtual counts zero
/// this equals ucb_score exactly.
double ucb_virtual(const TreeNode& parent, const TreeNode& child, double c);

/// Collects up to cfg.n_envs unique (node, action) pairs: each draw descends
/// by argmax ucb_virtual to a node with untried actions within the depth
/// limit, pops the next untried action, and increments virtual counts on the
/// node and its ancestors. Stops early when nothing is selectable.
SelectionBatch select_batch(SearchTree& tree, const ParallelConfig& cfg);

/// Zeroes virtual counts across the whole tree.
void reset_virtual(TreeNode& root);

/// Resolves all pairs through batch_resolve and attaches one child per pair
/// in batch order. Failed resolutions become dead children. Graspable
/// children register for early stop and shrink the depth limits.
std::vector<TreeNode*> batch_expand(SearchTree& tree, const SelectionBatch& batch,
                                    const ParallelConfig& cfg, WorkerPool* pool);

/// Rollout task interface for the lockstep batch simulator; the production
/// task wraps mcts::RolloutCursor, tests may script their own.
class RolloutTask {
 public:
  virtual ~RolloutTask() = default;
  virtual bool done() const = 0;
  virtual void step() = 0;
  virtual double reward() const = 0;
  virtual bool finished_by_grasp() const = 0;
  virtual int max_remaining() const = 0;  // 0 once done
};

using TaskFactory =
    std::function<std::unique_ptr<RolloutTask>(int node_index, int env_index)>;

/// Lockstep engine: environments advance one push per round; an environment
/// whose rollout ends in graspability is re-purposed toward the node with the
/// most remaining rollout work (ties to the lowest node index). Returns the
/// per-node maximum reward. Deterministic for a fixed factory.
std::vector<double> lockstep_simulate(int n_nodes, int n_envs, bool leaf_parallel,
                                      const TaskFactory& factory, WorkerPool* pool);

/// Assigns environments to new nodes as evenly as possible (remainder to
/// earlier nodes) and runs leaf-parallel lockstep rollouts; environment e uses
/// the RNG stream keyed by (iteration, e), so results are independent of
/// worker scheduling. Per-node reward is the maximum over its rollouts.
std::vector<double> batch_simulate(SearchTree& tree, const std::vector<TreeNode*>& new_nodes,
                                   const ParallelConfig& cfg, WorkerPool* pool,
                                   uint64_t iteration);

/// One mean-style path update per (node, reward); the max-aggregation across
/// a node's rollouts already happened in batch_simulate.
void backprop_max(const std::vector<TreeNode*>& new_nodes, const std::vector<double>& rewards);

/// Parallel MCTS with batched simulations. Same termination rules and final
/// action choice as the serial search. Throws mcts::SearchError when the root
/// has no legal push.
SearchResult run_pmbs(const WorldState& state, const ParallelConfig& cfg);

}  // namespace pushplan::pmbs
