#include "spiketext/plasticity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace spiketext {

void PlasticityParams::validate() const {
  if (!(eta > 0)) throw std::invalid_argument("plasticity: eta must be > 0");
  if (!(tau_pre > 0) || !(tau_rate > 0))
    throw std::invalid_argument("plasticity: trace time constants must be > 0");
  if (!(w_min < w_max)) throw std::invalid_argument("plasticity: w_min must be < w_max");
}

void PruneConfig::validate() const {
  if (!(theta >= 0.0 && theta < 1.0))
    throw std::invalid_argument("prune: theta must be in [0, 1)");
}

void decay_traces(Eigen::Ref<Eigen::ArrayXd> pre_trace, Eigen::Ref<Eigen::ArrayXd> rate_trace,
                  double elapsed_ms, const PlasticityParams& params) {
  if (!(elapsed_ms >= 0)) throw std::invalid_argument("decay_traces: elapsed must be >= 0");
  if (elapsed_ms == 0) return;
  pre_trace *= std::exp(-elapsed_ms / params.tau_pre);
  rate_trace *= std::exp(-elapsed_ms / params.tau_rate);
}

MaskMatrix prune_mask(const Eigen::MatrixXd& weights, const PruneConfig& config) {
  config.validate();
  const Eigen::Index n_neurons = weights.rows();
  const Eigen::Index n_in = weights.cols();
  MaskMatrix mask = MaskMatrix::Ones(n_neurons, n_in);
  const auto n_prune = static_cast<Eigen::Index>(std::floor(config.theta * static_cast<double>(n_in)));
  if (n_prune == 0) return mask;

  std::vector<Eigen::Index> order(static_cast<size_t>(n_in));
  for (Eigen::Index j = 0; j < n_neurons; ++j) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const double wa = weights(j, a), wb = weights(j, b);
      return wa != wb ? wa < wb : a < b;
    });
    for (Eigen::Index k = 0; k < n_prune; ++k) mask(j, order[static_cast<size_t>(k)]) = 0;
  }
  return mask;
}

}  // namespace spiketext
