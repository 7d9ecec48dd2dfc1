#pragma once

#include <Eigen/Core>

#include <cstdint>

#include "spiketext/types.hpp"

namespace spiketext {

struct PlasticityParams {
  double eta = 0.01;           // learning constant
  double tau_pre = 5.0;        // ms, presynaptic trace decay
  double tau_rate = 70.0;      // ms, postsynaptic rate trace decay
  double scaling_floor = 0.1;  // keeps synaptic scaling active at low firing rates
  double w_min = 0.0;
  double w_max = 10.0;         // numerical safety net; the rule itself bounds weights

  void validate() const;
};

struct PruneConfig {
  double theta = 0.0;  // fraction in [0,1) of weakest incoming connections removed per neuron

  void validate() const;
};

// A presynaptic spike saturates that input's trace at 1.
inline void on_presynaptic_spike(Eigen::Ref<Eigen::ArrayXd> pre_trace, Eigen::Index input_index) {
  pre_trace[input_index] = 1.0;
}

// Exponential decay of both traces over an arbitrary elapsed interval.
void decay_traces(Eigen::Ref<Eigen::ArrayXd> pre_trace, Eigen::Ref<Eigen::ArrayXd> rate_trace,
                  double elapsed_ms, const PlasticityParams& params);

// Weight update applied to one firing neuron's incoming row:
//
//   w += eta * (pre_trace - (rate + scaling_floor) * w)
//
// evaluated with the rate value from before this spike; the rate trace is
// incremented afterwards and weights are clamped to [w_min, w_max]. Recently
// active inputs (trace near 1) are potentiated, every other synapse decays
// toward zero via the scaling term. There is no post-before-pre branch.
//
// Accepts any writable row expression (e.g. weights.row(j)). keep_mask, when
// given, points at a contiguous 0/1 row of the same length; pruned synapses
// are left untouched.
template <typename Derived>
void on_postsynaptic_spike(const Eigen::MatrixBase<Derived>& weights_row,
                           const Eigen::Ref<const Eigen::ArrayXd>& pre_trace, double& rate_trace,
                           const PlasticityParams& params, const uint8_t* keep_mask = nullptr) {
  auto& row = const_cast<Eigen::MatrixBase<Derived>&>(weights_row).derived();
  const double scale = rate_trace + params.scaling_floor;
  auto current = row.array();
  auto updated = (current + params.eta * (pre_trace.transpose() - scale * current))
                     .max(params.w_min)
                     .min(params.w_max);
  if (keep_mask == nullptr) {
    row = updated.matrix();
  } else {
    Eigen::Map<const Eigen::Array<uint8_t, 1, Eigen::Dynamic>> keep(keep_mask, row.size());
    row = (keep != 0).select(updated, current).matrix();
  }
  rate_trace += 1.0;
}

// Mask of incoming connections per neuron (row): exactly floor(theta * n)
// entries with the smallest weights are zeroed, ties resolved toward the
// lower input index.
MaskMatrix prune_mask(const Eigen::MatrixXd& weights, const PruneConfig& config);

}  // namespace spiketext
