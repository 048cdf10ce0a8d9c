#include "pushplan/pmbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pushplan/rng.hpp"

namespace pushplan::pmbs {

double ucb_virtual(const TreeNode& parent, const TreeNode& child, double c) {
  const double n_child = static_cast<double>(child.visits + child.virtual_visits);
  if (n_child == 0.0) return std::numeric_limits<double>::infinity();
  const double n_parent = static_cast<double>(parent.visits + parent.virtual_visits);
  return child.q_sum / n_child + c * std::sqrt(2.0 * std::log(n_parent) / n_child);
}

namespace {

bool subtree_selectable(const TreeNode& node, int tree_depth) {
  if (node.terminal()) return false;
  if (node.depth < tree_depth && !node.fully_expanded()) return true;
  for (const auto& child : node.children) {
    if (subtree_selectable(*child, tree_depth)) return true;
  }
  return false;
}

TreeNode* descend_virtual(TreeNode& root, double c, int tree_depth) {
  if (!subtree_selectable(root, tree_depth)) return nullptr;
  TreeNode* node = &root;
  while (true) {
    if (node->depth < tree_depth && !node->terminal() && !node->fully_expanded()) return node;
    TreeNode* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& child : node->children) {
      if (!subtree_selectable(*child, tree_depth)) continue;
      const double score = ucb_virtual(*node, *child, c);
      if (score > best_score) {
        best_score = score;
        best = child.get();
      }
    }
    if (!best) return nullptr;
    node = best;
  }
}

}  // namespace

SelectionBatch select_batch(SearchTree& tree, const ParallelConfig& cfg) {
  SelectionBatch batch;
  while (static_cast<int>(batch.pairs.size()) < cfg.n_envs) {
    TreeNode* node = descend_virtual(*tree.root, cfg.c_explore, tree.tree_depth);
    if (!node) break;
    const PushAction action = node->pop_untried();
    batch.pairs.emplace_back(node, action);
    for (TreeNode* n = node; n != nullptr; n = n->parent) n->virtual_visits += 1;
  }
  if (batch.pairs.empty()) throw TreeExhausted();
  return batch;
}

void reset_virtual(TreeNode& root) {
  root.virtual_visits = 0;
  for (const auto& child : root.children) reset_virtual(*child);
}

std::vector<TreeNode*> batch_expand(SearchTree& tree, const SelectionBatch& batch,
                                    const ParallelConfig& cfg, WorkerPool* pool) {
  const int n = static_cast<int>(batch.pairs.size());
  if (n == 0) throw mcts::SearchError("batch_expand: empty batch");

  // Resolve, sample and classify in parallel; attach serially in batch order.
  struct ChildInit {
    std::optional<WorldState> state;
    std::vector<PushAction> untried;
    bool graspable = false;
  };
  std::vector<ChildInit> inits(n);
  const auto prepare = [&](int i) {
    const auto& [node, action] = batch.pairs[i];
    ChildInit& init = inits[i];
    try {
      init.state = resolve_push(node->state, action, cfg.tip, cfg.sim);
    } catch (const SimError&) {
      return;  // dead child
    }
    init.untried = sample_pushes(*init.state, cfg.pushes_per_object, cfg.tip,
                                 cfg.sim.push_distance);
    init.graspable = graspable(*init.state, cfg.grasp, cfg.margin_threshold).graspable;
  };
  if (pool && n > 1) {
    pool->parallel_for(n, prepare);
  } else {
    for (int i = 0; i < n; ++i) prepare(i);
  }

  std::vector<TreeNode*> children;
  children.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto& [node, action] = batch.pairs[i];
    ChildInit& init = inits[i];
    if (!init.state) {
      children.push_back(&mcts::attach_child(tree, *node, action, std::nullopt, cfg));
      continue;
    }
    auto child = std::make_unique<TreeNode>();
    child->action = action;
    child->parent = node;
    child->depth = node->depth + 1;
    child->state = std::move(*init.state);
    child->untried = std::move(init.untried);
    child->graspable_flag = init.graspable;
    child->dead_flag = !init.graspable && child->untried.empty();
    TreeNode& ref = *child;
    node->children.push_back(std::move(child));
    if (static_cast<size_t>(ref.depth) >= tree.levels.size()) tree.levels.resize(ref.depth + 1);
    tree.levels[ref.depth].push_back(&ref);
    if (ref.graspable_flag) {
      tree.graspable_nodes.push_back(&ref);
      if (ref.depth < tree.tree_depth) {
        tree.tree_depth = ref.depth;
        tree.rollout_depth = 0;
      }
    }
    children.push_back(&ref);
  }
  return children;
}

std::vector<double> lockstep_simulate(int n_nodes, int n_envs, bool leaf_parallel,
                                      const TaskFactory& factory, WorkerPool* pool) {
  if (n_nodes <= 0) return {};
  if (n_envs < n_nodes) throw mcts::SearchError("lockstep_simulate: fewer environments than nodes");

  const int used_envs = leaf_parallel ? n_envs : n_nodes;
  std::vector<int> env_node(used_envs);
  {
    // Even split, remainder to earlier nodes, node order preserved.
    const int base = used_envs / n_nodes;
    const int rem = used_envs % n_nodes;
    int e = 0;
    for (int i = 0; i < n_nodes; ++i) {
      const int count = base + (i < rem ? 1 : 0);
      for (int k = 0; k < count; ++k) env_node[e++] = i;
    }
  }

  std::vector<std::unique_ptr<RolloutTask>> tasks(used_envs);
  for (int e = 0; e < used_envs; ++e) tasks[e] = factory(env_node[e], e);

  std::vector<double> rewards(n_nodes, 0.0);
  std::vector<char> harvested(used_envs, 0);

  const auto remaining_work = [&](int node) {
    int total = 0;
    for (int e = 0; e < used_envs; ++e) {
      if (env_node[e] == node && !tasks[e]->done()) total += tasks[e]->max_remaining();
    }
    return total;
  };

  const auto harvest_and_repurpose = [&] {
    for (int e = 0; e < used_envs; ++e) {
      if (harvested[e] || !tasks[e]->done()) continue;
      harvested[e] = 1;
      rewards[env_node[e]] = std::max(rewards[env_node[e]], tasks[e]->reward());
      if (!leaf_parallel || !tasks[e]->finished_by_grasp()) continue;
      // Re-purpose toward the node with the most remaining rollout work.
      int best_node = -1;
      int best_work = 0;
      for (int i = 0; i < n_nodes; ++i) {
        const int w = remaining_work(i);
        if (w > best_work) {
          best_work = w;
          best_node = i;
        }
      }
      if (best_node >= 0) {
        env_node[e] = best_node;
        tasks[e] = factory(best_node, e);
        harvested[e] = 0;
      }
    }
  };

  harvest_and_repurpose();  // graspable nodes finish with zero pushes
  while (true) {
    std::vector<int> active;
    for (int e = 0; e < used_envs; ++e) {
      if (!tasks[e]->done()) active.push_back(e);
    }
    if (active.empty()) break;
    const auto advance = [&](int idx) { tasks[active[idx]]->step(); };
    if (pool && active.size() > 1) {
      pool->parallel_for(static_cast<int>(active.size()), advance);
    } else {
      for (int i = 0; i < static_cast<int>(active.size()); ++i) advance(i);
    }
    harvest_and_repurpose();
  }
  return rewards;
}

std::vector<double> batch_simulate(SearchTree& tree, const std::vector<TreeNode*>& new_nodes,
                                   const ParallelConfig& cfg, WorkerPool* pool,
                                   uint64_t iteration) {
  const int n = static_cast<int>(new_nodes.size());
  std::vector<std::mt19937_64> engines;
  engines.reserve(cfg.n_envs);
  for (int e = 0; e < cfg.n_envs; ++e) engines.push_back(keyed_rng(cfg.rng_seed, iteration, e));

  const TaskFactory factory = [&](int node_index, int env_index) -> std::unique_ptr<RolloutTask> {
    class CursorTask final : public RolloutTask {
     public:
      CursorTask(const TreeNode& node, const SearchConfig& cfg, int dt, int ds,
                 std::mt19937_64* rng)
          : cursor_(node, cfg, dt, ds, rng) {}
      bool done() const override { return cursor_.done(); }
      void step() override { cursor_.step(); }
      double reward() const override { return cursor_.reward(); }
      bool finished_by_grasp() const override { return cursor_.finished_by_grasp(); }
      int max_remaining() const override { return cursor_.max_remaining(); }

     private:
      mcts::RolloutCursor cursor_;
    };
    return std::make_unique<CursorTask>(*new_nodes[node_index], cfg, tree.tree_depth,
                                        tree.rollout_depth, &engines[env_index]);
  };
  return lockstep_simulate(n, cfg.n_envs, cfg.leaf_parallel, factory, pool);
}

void backprop_max(const std::vector<TreeNode*>& new_nodes, const std::vector<double>& rewards) {
  if (new_nodes.size() != rewards.size())
    throw mcts::SearchError("backprop_max: node and reward counts differ");
  for (size_t i = 0; i < new_nodes.size(); ++i) mcts::backprop_mean(*new_nodes[i], rewards[i]);
}

SearchResult run_pmbs(const WorldState& state, const ParallelConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  auto tree = std::make_unique<SearchTree>(SearchTree::create(state, cfg));
  if (tree->root->untried.empty()) throw mcts::SearchError("no legal push action at the root");

  std::unique_ptr<WorkerPool> pool;
  if (cfg.worker_threads > 1) pool = std::make_unique<WorkerPool>(cfg.worker_threads);

  SearchStats stats;
  long iter = 0;
  std::string stop = "explored";
  while (true) {
    SelectionBatch batch;
    try {
      batch = select_batch(*tree, cfg);
    } catch (const TreeExhausted&) {
      stop = "explored";
      break;
    }
    reset_virtual(*tree->root);
    const std::vector<TreeNode*> children = batch_expand(*tree, batch, cfg, pool.get());
    stats.expansions += static_cast<long>(children.size());
    mcts::update_es_level(*tree);
    const std::vector<double> rewards = batch_simulate(*tree, children, cfg, pool.get(), iter);
    backprop_max(children, rewards);
    ++iter;
    if (mcts::early_stop_satisfied(*tree)) {
      stop = "early_stop";
      break;
    }
    if (cfg.budget.mode == mcts::Budget::Mode::Iterations
            ? iter >= cfg.budget.max_iterations
            : elapsed() >= cfg.budget.max_seconds) {
      stop = "budget";
      break;
    }
  }

  SearchResult result;
  result.action = mcts::best_root_child(*tree, cfg).action;
  stats.iterations = iter;
  stats.elapsed_s = elapsed();
  stats.stop_reason = stop;
  result.stats = stats;
  result.tree = std::move(tree);
  return result;
}

}  // namespace pushplan::pmbs
