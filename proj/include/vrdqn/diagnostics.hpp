#pragma once

#include <span>

#include "vrdqn/optim.hpp"
#include "vrdqn/qnet.hpp"
#include "vrdqn/trainer.hpp"
#include "vrdqn/transition.hpp"

namespace vrdqn {

// Per-transition loss gradient restricted to the first-layer weights,
// per-element population standard deviation across the batch, summed over the
// elements. Throws when the batch holds fewer than two transitions.
double grad_std_sum(std::span<const Transition> batch,
                    const ParamVector& params, double gamma);

// Euclidean distance ||anchor - exact||. Throws on layout mismatch.
double anchor_distance(const GradVector& anchor, const GradVector& exact);

// Mean over the epoch's inner steps of the distance between the anchor in
// use (the previous recursive estimate for sarah, the frozen full-batch
// gradient for svrg) and the exact batch gradient at the inner parameters
// theta_m. Needs the report's snapshots; NaN when the epoch had no inner
// steps. Throws for sgd (no anchor) or when snapshots were not recorded.
double epoch_anchor_distance_mean(const EpochReport& report,
                                  std::span<const Transition> batch,
                                  double gamma, Algo algo);

// The anchor-quality oracle experiment. `standard` re-executes the recorded
// svrg run on its own batch/draw schedule (bit-identical to the original);
// `exact` re-executes it with every epoch's anchor computed over the whole
// recorded transition set instead of its batch. Neither arm applies the Adam
// process. Throws when the record is missing or truncated.
struct PairedRunLogs {
  RunResult standard;
  RunResult exact;
};
PairedRunLogs exact_anchor_rerun(const RunRecord& record,
                                 const TaskConfig& cfg, TaskId task);

}  // namespace vrdqn
