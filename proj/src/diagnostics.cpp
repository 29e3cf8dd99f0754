#include "vrdqn/diagnostics.hpp"

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "vrdqn/vecmath.hpp"

namespace vrdqn {

double grad_std_sum(std::span<const Transition> batch,
                    const ParamVector& params, double gamma) {
  if (batch.size() < 2)
    throw std::invalid_argument("grad_std_sum: need at least two transitions");

  const std::size_t first_w =
      static_cast<std::size_t>(params.shape.layers[0].in) *
      params.shape.layers[0].out;
  const std::size_t off = weight_offset(params.shape, 0);
  const double n = static_cast<double>(batch.size());

  // Two passes (mean, then centered squares) per element; population
  // (divide-by-n) standard deviation.
  std::vector<std::vector<double>> rows;
  rows.reserve(batch.size());
  for (const Transition& t : batch) {
    const GradVector g = td_gradient(t, params, gamma);
    rows.emplace_back(g.values.begin() + static_cast<std::ptrdiff_t>(off),
                      g.values.begin() + static_cast<std::ptrdiff_t>(off + first_w));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < first_w; ++i) {
    // shifted two-pass: variance is shift-invariant, and shifting by the
    // first row makes the zero-spread case exact
    const double shift = rows[0][i];
    double mean = 0.0;
    for (const auto& r : rows) mean += r[i] - shift;
    mean /= n;
    double var = 0.0;
    for (const auto& r : rows) {
      const double d = (r[i] - shift) - mean;
      var += d * d;
    }
    total += std::sqrt(var / n);
  }
  return total;
}

double anchor_distance(const GradVector& anchor, const GradVector& exact) {
  check_same_layout(anchor, exact);
  double acc = 0.0;
  for (std::size_t i = 0; i < anchor.values.size(); ++i) {
    const double d = anchor.values[i] - exact.values[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double epoch_anchor_distance_mean(const EpochReport& report,
                                  std::span<const Transition> batch,
                                  double gamma, Algo algo) {
  if (algo == Algo::Sgd)
    throw std::invalid_argument("sgd has no anchor to measure");
  if (report.snapshots.empty())
    throw std::invalid_argument(
        "epoch_anchor_distance_mean: report has no snapshots");

  const std::size_t inner = report.snapshots.size() - 1;  // entry 0 is m = 0
  if (inner == 0) return std::numeric_limits<double>::quiet_NaN();

  double acc = 0.0;
  for (std::size_t m = 1; m <= inner; ++m) {
    const GradVector& anchor = (algo == Algo::Svrg)
                                   ? report.snapshots[0].delta
                                   : report.snapshots[m - 1].delta;
    const GradVector exact =
        full_batch_gradient(batch, report.snapshots[m].theta, gamma);
    acc += anchor_distance(anchor, exact);
  }
  return acc / static_cast<double>(inner);
}

PairedRunLogs exact_anchor_rerun(const RunRecord& record,
                                 const TaskConfig& cfg, TaskId task) {
  if (record.transitions.empty() || record.epochs.empty())
    throw std::runtime_error("exact_anchor_rerun: record is empty");
  PairedRunLogs out;
  out.standard = run_training_replayed(cfg, Algo::Svrg, task, record,
                                       AnchorMode::Recorded);
  out.exact = run_training_replayed(cfg, Algo::Svrg, task, record,
                                    AnchorMode::WholeRecord);
  return out;
}

}  // namespace vrdqn
