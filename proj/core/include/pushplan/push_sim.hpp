#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pushplan/world.hpp"

namespace pushplan {

class WorkerPool;

struct SimParams {
  double push_distance = 0.05;  // meters, fixed segment length
  int substeps = 64;            // tip sweep resolution
  int max_projection_iters = 32;
  double eps_pen = 1e-4;        // meters, max residual pairwise penetration
  double rotation_gain = 1.0;   // polygon rotation per contact, discs never rotate
};

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quasi-static push transition: sweeps the tip disc from start to end in
/// fixed substeps, projecting penetrated objects out along minimum-translation
/// vectors, then resolving object-object penetration by iterated pairwise
/// projection. Centers are clamped to the boundary. Pure and deterministic.
///
/// Throws SimError when the gripper start pose collides (caller's duty to
/// check) or when projection fails to converge; the message reports the
/// residual penetration.
WorldState resolve_push(const WorldState& state, const PushAction& push,
                        const GripperTip& tip, const SimParams& params = {});

struct PushResult {
  std::optional<WorldState> state;
  std::string error;  // empty on success

  bool ok() const { return state.has_value(); }
};

/// Element-wise resolve_push over a worker pool. Results are independent of
/// pool size and scheduling; one failing element does not abort its siblings.
/// A null pool runs inline.
std::vector<PushResult> batch_resolve(std::span<const WorldState> states,
                                      std::span<const PushAction> pushes,
                                      const GripperTip& tip, const SimParams& params,
                                      WorkerPool* pool = nullptr);

}  // namespace pushplan
