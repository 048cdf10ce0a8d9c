#include "pushplan/mcts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "pushplan/rng.hpp"

namespace pushplan::mcts {

PushAction TreeNode::pop_untried() {
  if (fully_expanded()) throw SearchError("pop_untried on a fully expanded node");
  return untried[untried_head++];
}

void TreeNode::remove_untried(const PushAction& a) {
  for (size_t i = untried_head; i < untried.size(); ++i) {
    if (untried[i] == a) {
      untried.erase(untried.begin() + i);
      return;
    }
  }
  throw SearchError("expand: action is not among the node's untried actions");
}

SearchTree SearchTree::create(const WorldState& state, const SearchConfig& cfg) {
  SearchTree tree;
  tree.tree_depth = cfg.tree_depth;
  tree.rollout_depth = cfg.rollout_depth;
  tree.root = std::make_unique<TreeNode>();
  tree.root->state = state;
  tree.root->untried = sample_pushes(state, cfg.pushes_per_object, cfg.tip, cfg.sim.push_distance);
  tree.root->graspable_flag = graspable(state, cfg.grasp, cfg.margin_threshold).graspable;
  tree.root->dead_flag = !tree.root->graspable_flag && tree.root->untried.empty();
  tree.levels.push_back({tree.root.get()});
  return tree;
}

double ucb_score(const TreeNode& parent, const TreeNode& child, double c) {
  if (child.visits == 0) return std::numeric_limits<double>::infinity();
  const double mean = child.q_sum / static_cast<double>(child.visits);
  return mean + c * std::sqrt(2.0 * std::log(static_cast<double>(parent.visits)) /
                              static_cast<double>(child.visits));
}

bool subtree_expandable(const TreeNode& node, int tree_depth) {
  if (node.terminal()) return false;
  if (node.depth < tree_depth && !node.fully_expanded()) return true;
  for (const auto& child : node.children) {
    if (subtree_expandable(*child, tree_depth)) return true;
  }
  return false;
}

TreeNode* select_leaf(TreeNode& root, double c, int tree_depth) {
  if (!subtree_expandable(root, tree_depth)) return nullptr;
  TreeNode* node = &root;
  while (true) {
    if (node->depth < tree_depth && !node->terminal() && !node->fully_expanded()) return node;
    TreeNode* best = nullptr;
    double best_score = -std::numeric_limits<double>::infinity();
    for (const auto& child : node->children) {
      if (!subtree_expandable(*child, tree_depth)) continue;
      const double score = ucb_score(*node, *child, c);
      if (score > best_score) {
        best_score = score;
        best = child.get();
      }
    }
    if (!best) return nullptr;  // possible only through concurrent misuse
    node = best;
  }
}

TreeNode& attach_child(SearchTree& tree, TreeNode& parent, const PushAction& action,
                       std::optional<WorldState> resolved, const SearchConfig& cfg) {
  auto child = std::make_unique<TreeNode>();
  child->action = action;
  child->parent = &parent;
  child->depth = parent.depth + 1;
  if (resolved) {
    child->state = std::move(*resolved);
    child->untried =
        sample_pushes(child->state, cfg.pushes_per_object, cfg.tip, cfg.sim.push_distance);
    child->graspable_flag = graspable(child->state, cfg.grasp, cfg.margin_threshold).graspable;
    child->dead_flag = !child->graspable_flag && child->untried.empty();
  } else {
    child->state = parent.state;
    child->dead_flag = true;
  }
  TreeNode& ref = *child;
  parent.children.push_back(std::move(child));
  if (static_cast<size_t>(ref.depth) >= tree.levels.size()) tree.levels.resize(ref.depth + 1);
  tree.levels[ref.depth].push_back(&ref);
  if (ref.graspable_flag) {
    tree.graspable_nodes.push_back(&ref);
    if (ref.depth < tree.tree_depth) {
      tree.tree_depth = ref.depth;
      tree.rollout_depth = 0;
    }
  }
  return ref;
}

TreeNode& expand(SearchTree& tree, TreeNode& node, const PushAction& action,
                 const SearchConfig& cfg) {
  if (node.depth >= tree.tree_depth) throw SearchError("expand: node at maximum tree depth");
  if (node.terminal()) throw SearchError("expand: node is terminal");
  node.remove_untried(action);
  std::optional<WorldState> resolved;
  try {
    resolved = resolve_push(node.state, action, cfg.tip, cfg.sim);
  } catch (const SimError&) {
    resolved.reset();  // dead child, reward 0
  }
  return attach_child(tree, node, action, std::move(resolved), cfg);
}

RolloutCursor::RolloutCursor(const TreeNode& node, const SearchConfig& cfg, int tree_depth,
                             int rollout_depth, std::mt19937_64* rng)
    : cfg_(&cfg),
      state_(node.state),
      start_depth_(node.depth),
      pushes_(node.depth),
      depth_cap_(tree_depth + rollout_depth),
      rng_(rng) {
  if (node.graspable_flag) {
    done_ = true;
    by_grasp_ = true;
    reward_ = std::pow(cfg.gamma, node.depth);
  } else if (node.dead_flag) {
    done_ = true;
    reward_ = 0.0;
  } else if (pushes_ >= depth_cap_) {
    done_ = true;
    reward_ = 0.0;
  }
}

void RolloutCursor::step() {
  if (done_) return;
  const auto actions =
      sample_pushes(state_, cfg_->pushes_per_object, cfg_->tip, cfg_->sim.push_distance);
  if (actions.empty()) {
    done_ = true;
    reward_ = 0.0;
    return;
  }
  std::uniform_int_distribution<size_t> pick(0, actions.size() - 1);
  const PushAction& action = actions[pick(*rng_)];
  try {
    state_ = resolve_push(state_, action, cfg_->tip, cfg_->sim);
  } catch (const SimError&) {
    done_ = true;
    reward_ = 0.0;
    return;
  }
  ++pushes_;
  if (graspable(state_, cfg_->grasp, cfg_->margin_threshold).graspable) {
    done_ = true;
    by_grasp_ = true;
    reward_ = std::pow(cfg_->gamma, pushes_);
    return;
  }
  if (pushes_ >= depth_cap_) {
    done_ = true;
    reward_ = 0.0;
  }
}

double rollout(const TreeNode& node, const SearchConfig& cfg, int tree_depth,
               int rollout_depth, std::mt19937_64& rng) {
  RolloutCursor cursor(node, cfg, tree_depth, rollout_depth, &rng);
  while (!cursor.done()) cursor.step();
  return cursor.reward();
}

void backprop_mean(TreeNode& leaf, double reward) {
  for (TreeNode* n = &leaf; n != nullptr; n = n->parent) {
    n->q_sum += reward;
    n->visits += 1;
  }
}

namespace {

bool level_settled(const SearchTree& tree, int level) {
  if (level < 0) return true;
  if (static_cast<size_t>(level) >= tree.levels.size()) return true;  // vacuous
  for (const TreeNode* n : tree.levels[level]) {
    if (n->terminal()) continue;
    if (n->depth >= tree.tree_depth) continue;  // not expandable after a shrink
    if (!n->fully_expanded()) return false;
  }
  return true;
}

}  // namespace

bool update_es_level(SearchTree& tree) {
  if (tree.es_level > tree.tree_depth) return false;
  if (level_settled(tree, tree.es_level - 1)) {
    ++tree.es_level;
    return true;
  }
  return false;
}

bool early_stop_satisfied(const SearchTree& tree) {
  for (const TreeNode* n : tree.graspable_nodes) {
    if (n->depth <= tree.es_level) return true;
  }
  return false;
}

const TreeNode& best_root_child(const SearchTree& tree, const SearchConfig& cfg) {
  const TreeNode* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  long best_visits = -1;
  for (const auto& child : tree.root->children) {
    if (child->visits == 0) continue;
    const double score =
        cfg.rank_by_ucb ? ucb_score(*tree.root, *child, cfg.c_explore)
                        : child->q_sum / static_cast<double>(child->visits);
    if (score > best_score || (score == best_score && child->visits > best_visits)) {
      best_score = score;
      best_visits = child->visits;
      best = child.get();
    }
  }
  if (!best) throw SearchError("search produced no evaluated root child");
  return *best;
}

SearchResult run_serial_mcts(const WorldState& state, const SearchConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  auto tree = std::make_unique<SearchTree>(SearchTree::create(state, cfg));
  if (tree->root->untried.empty()) throw SearchError("no legal push action at the root");

  SearchStats stats;
  long iter = 0;
  std::string stop = "explored";
  while (true) {
    TreeNode* leaf = select_leaf(*tree->root, cfg.c_explore, tree->tree_depth);
    if (!leaf) {
      stop = "explored";
      break;
    }
    const PushAction action = leaf->first_untried();
    TreeNode& child = expand(*tree, *leaf, action, cfg);
    ++stats.expansions;
    update_es_level(*tree);
    std::mt19937_64 rng = keyed_rng(cfg.rng_seed, iter, 0);
    const double reward = rollout(child, cfg, tree->tree_depth, tree->rollout_depth, rng);
    backprop_mean(child, reward);
    ++iter;
    if (early_stop_satisfied(*tree)) {
      stop = "early_stop";
      break;
    }
    if (cfg.budget.mode == Budget::Mode::Iterations ? iter >= cfg.budget.max_iterations
                                                    : elapsed() >= cfg.budget.max_seconds) {
      stop = "budget";
      break;
    }
  }

  SearchResult result;
  result.action = best_root_child(*tree, cfg).action;
  stats.iterations = iter;
  stats.elapsed_s = elapsed();
  stats.stop_reason = stop;
  result.stats = stats;
  result.tree = std::move(tree);
  return result;
}

namespace {

void signature_walk(const TreeNode& node, std::ostringstream& out) {
  out.precision(17);
  out << node.depth << '|' << node.action.x_s << ',' << node.action.y_s << ','
      << node.action.x_e << ',' << node.action.y_e << '|' << node.visits << '|' << node.q_sum
      << '|' << (node.graspable_flag ? 'g' : '.') << (node.dead_flag ? 'd' : '.') << '\n';
  for (const auto& child : node.children) signature_walk(*child, out);
}

}  // namespace

std::string tree_signature(const SearchTree& tree) {
  std::ostringstream out;
  signature_walk(*tree.root, out);
  return out.str();
}

}  // namespace pushplan::mcts
