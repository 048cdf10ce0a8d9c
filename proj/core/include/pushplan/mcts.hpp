#pragma once

#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pushplan/actions.hpp"
#include "pushplan/push_sim.hpp"
#include "pushplan/world.hpp"

namespace pushplan::mcts {

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Budget {
  enum class Mode { Seconds, Iterations };
  Mode mode = Mode::Seconds;
  double max_seconds = 60.0;
  long max_iterations = 0;

  static Budget seconds(double s) { return {Mode::Seconds, s, 0}; }
  static Budget iterations(long n) { return {Mode::Iterations, 0.0, n}; }
};

struct SearchConfig {
  double gamma = 0.8;          // discount per push
  double c_explore = 0.3;      // UCB exploration weight
  int tree_depth = 7;          // d_T, max tree depth
  int rollout_depth = 3;       // d_s, max rollout pushes beyond the tree
  Budget budget = Budget::seconds(60.0);
  int pushes_per_object = 16;  // N_a
  double margin_threshold = 0.003;
  uint64_t rng_seed = 0;
  bool rank_by_ucb = false;    // final action by UCB score instead of mean reward

  GripperTip tip;
  GraspGeometry grasp;
  SimParams sim;
};

struct TreeNode {
  WorldState state;
  PushAction action;  // action that produced this node; unset at the root
  TreeNode* parent = nullptr;
  int depth = 0;
  double q_sum = 0.0;
  long visits = 0;
  long virtual_visits = 0;  // used only by the parallel planner
  std::vector<PushAction> untried;
  size_t untried_head = 0;  // actions before this index were consumed
  std::vector<std::unique_ptr<TreeNode>> children;
  bool graspable_flag = false;
  bool dead_flag = false;  // no legal actions and not graspable (or failed sim)

  bool terminal() const { return graspable_flag || dead_flag; }
  bool fully_expanded() const { return untried_head >= untried.size(); }
  size_t untried_count() const { return untried.size() - untried_head; }
  const PushAction& first_untried() const { return untried[untried_head]; }
  PushAction pop_untried();
  /// Removes a specific action; throws SearchError when absent.
  void remove_untried(const PushAction& a);
};

struct SearchTree {
  std::unique_ptr<TreeNode> root;
  std::vector<std::vector<TreeNode*>> levels;  // nodes grouped by depth
  std::vector<TreeNode*> graspable_nodes;
  int tree_depth = 7;     // current d_T (may shrink)
  int rollout_depth = 3;  // current d_s (may shrink to 0)
  int es_level = 1;       // early-stop level

  static SearchTree create(const WorldState& state, const SearchConfig& cfg);
};

struct SearchStats {
  long iterations = 0;
  long expansions = 0;
  double elapsed_s = 0.0;
  std::string stop_reason;  // "budget", "explored", "early_stop"
};

struct SearchResult {
  PushAction action;
  SearchStats stats;
  std::unique_ptr<SearchTree> tree;
};

/// Eq-style UCB: mean reward plus c * sqrt(2 ln N(parent) / N(child)).
/// Unvisited children score +infinity.
double ucb_score(const TreeNode& parent, const TreeNode& child, double c);

/// True when the subtree rooted at node still holds an expandable
/// (node, action) pair within the depth limit.
bool subtree_expandable(const TreeNode& node, int tree_depth);

/// Descends by argmax ucb_score (ties break toward insertion order), skipping
/// exhausted and terminal subtrees; returns the first node with untried
/// actions, or nullptr when the tree is fully explored.
TreeNode* select_leaf(TreeNode& root, double c, int tree_depth);

/// Creates a child for (node, action): removes the action from untried,
/// resolves the push, samples the child's actions and grasp flag, and
/// registers the child in the tree. A failed resolution yields a dead child.
/// Throws SearchError on precondition violations.
TreeNode& expand(SearchTree& tree, TreeNode& node, const PushAction& action,
                 const SearchConfig& cfg);

/// Attaches a child from an already-resolved state (nullopt marks a failed
/// simulation -> dead child). Registers graspable children and applies
/// dynamic depth shrinking (d_T = depth, d_s = 0) when one appears above d_T.
TreeNode& attach_child(SearchTree& tree, TreeNode& parent, const PushAction& action,
                       std::optional<WorldState> resolved, const SearchConfig& cfg);

/// Stepwise random-push rollout; the same law drives both the serial rollout
/// and the batched lockstep simulation.
class RolloutCursor {
 public:
  RolloutCursor(const TreeNode& node, const SearchConfig& cfg, int tree_depth,
                int rollout_depth, std::mt19937_64* rng);

  bool done() const { return done_; }
  double reward() const { return reward_; }
  bool finished_by_grasp() const { return by_grasp_; }
  int steps_used() const { return pushes_ - start_depth_; }
  int max_remaining() const { return done_ ? 0 : depth_cap_ - pushes_; }
  void step();  // one random push; no-op once done

 private:
  const SearchConfig* cfg_;
  WorldState state_;
  int start_depth_;
  int pushes_;     // total pushes from the search root
  int depth_cap_;  // d_T + d_s
  std::mt19937_64* rng_;
  bool done_ = false;
  bool by_grasp_ = false;
  double reward_ = 0.0;
};

/// Runs a full rollout: graspable nodes return gamma^depth immediately;
/// otherwise random pushes until graspability (gamma^k after k total pushes),
/// a dead end (0), or the depth cap d_T + d_s (0).
double rollout(const TreeNode& node, const SearchConfig& cfg, int tree_depth,
               int rollout_depth, std::mt19937_64& rng);

/// Adds reward and one visit to every node on the leaf -> root path.
void backprop_mean(TreeNode& leaf, double reward);

/// Alg-style early-stop bookkeeping: advances es_level by one when every node
/// at level es_level - 1 is fully expanded or terminal. Returns true when it
/// advanced.
bool update_es_level(SearchTree& tree);

/// True when some graspable node sits at depth <= es_level.
bool early_stop_satisfied(const SearchTree& tree);

/// Root-child choice: maximal mean reward, ties to higher visits, then
/// insertion order. With cfg.rank_by_ucb, ranks by the UCB score instead.
const TreeNode& best_root_child(const SearchTree& tree, const SearchConfig& cfg);

/// Serial depth-limited UCB search with random rollouts and mean-reward
/// backpropagation. Terminates on budget exhaustion, full exploration, or the
/// early-stop level reaching a graspable node. Throws SearchError when the
/// root has no legal push.
SearchResult run_serial_mcts(const WorldState& state, const SearchConfig& cfg);

/// Canonical text form of the tree (topology, actions, Q, N, flags) for
/// exact-equality comparisons.
std::string tree_signature(const SearchTree& tree);

}  // namespace pushplan::mcts
