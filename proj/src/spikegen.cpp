#include "spiketext/spikegen.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "spiketext/rng.hpp"

namespace spiketext {

void SpikeGenConfig::validate() const {
  if (!(presentation_ms > 0)) throw std::invalid_argument("spikegen: presentation_ms must be > 0");
  if (!(gap_ms >= 0)) throw std::invalid_argument("spikegen: gap_ms must be >= 0");
  if (!(alpha > 0)) throw std::invalid_argument("spikegen: alpha must be > 0");
}

SpikeSchedule generate_spikes(const Eigen::SparseVector<double>& row, const SpikeGenConfig& config,
                              uint64_t stream_id) {
  config.validate();
  SpikeSchedule schedule;
  schedule.window_ms = config.presentation_ms;
  const auto n_bins = static_cast<int32_t>(std::llround(config.presentation_ms));
  const uint64_t base = mix64(config.rng_seed, stream_id);

  for (Eigen::SparseVector<double>::InnerIterator it(row); it; ++it) {
    const double w = it.value();
    if (!std::isfinite(w) || w < 0)
      throw std::invalid_argument("spikegen: weights must be finite and non-negative");
    const double p = std::min(1.0, config.alpha * w);
    if (p <= 0) continue;
    // one substream per input keeps draws independent of iteration order
    SplitMix64 rng(mix64(base, static_cast<uint64_t>(it.index())));
    for (int32_t t = 0; t < n_bins; ++t) {
      if (rng.next_double() < p)
        schedule.events.push_back({static_cast<int32_t>(it.index()), t});
    }
  }

  std::sort(schedule.events.begin(), schedule.events.end(),
            [](const SpikeEvent& a, const SpikeEvent& b) {
              return a.time_ms != b.time_ms ? a.time_ms < b.time_ms : a.input < b.input;
            });
  return schedule;
}

double expected_spike_count(double weight, const SpikeGenConfig& config) {
  config.validate();
  if (!(weight >= 0)) throw std::invalid_argument("spikegen: weight must be >= 0");
  return config.presentation_ms * std::min(1.0, config.alpha * weight);
}

void write_spike_csv(std::ostream& out, const SpikeSchedule& schedule) {
  out << "input_index,time_ms\n";
  for (const SpikeEvent& e : schedule.events) out << e.input << "," << e.time_ms << "\n";
}

}  // namespace spiketext
