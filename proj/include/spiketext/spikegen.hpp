#pragma once

#include <Eigen/SparseCore>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spiketext {

// Timing and scaling of the stochastic spike encoding: every document is
// presented for presentation_ms, followed by gap_ms of silence so the network
// state can decay before the next document.
struct SpikeGenConfig {
  double presentation_ms = 600.0;
  double gap_ms = 300.0;
  double alpha = 1.5;  // spike probability per ms = min(1, alpha * weight)
  uint64_t rng_seed = 0;

  void validate() const;
};

struct SpikeEvent {
  int32_t input = 0;
  int32_t time_ms = 0;
};

// Events on a 1 ms grid, sorted by time then input index, at most one event
// per (input, millisecond).
struct SpikeSchedule {
  double window_ms = 0.0;
  std::vector<SpikeEvent> events;
};

// Independent Bernoulli draw per (input, millisecond) with probability
// min(1, alpha * weight). Draw streams derive from (rng_seed, stream_id,
// input index), so the same triple always regenerates the same schedule and
// distinct documents/epochs get independent streams.
SpikeSchedule generate_spikes(const Eigen::SparseVector<double>& row, const SpikeGenConfig& config,
                              uint64_t stream_id);

// presentation_ms * min(1, alpha * weight)
double expected_spike_count(double weight, const SpikeGenConfig& config);

// Debug export, one "input_index,time_ms" line per event.
void write_spike_csv(std::ostream& out, const SpikeSchedule& schedule);

}  // namespace spiketext
