#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "spiketext/plasticity.hpp"
#include "spiketext/spikegen.hpp"

namespace spiketext {

// Conductance-based LIF parameters. Membrane dynamics:
//   tau_m du/dt = (u_rest - u) + g_e (u_exc - u) + g_i (u_inh - u)
// with both conductances decaying exponentially between input events.
struct NeuronParams {
  double u_rest = -65.0;  // mV
  double u_exc = 0.0;     // mV, excitatory reversal
  double u_inh = -90.0;   // mV, inhibitory reversal
  double u_th = -52.0;    // mV, firing threshold
  double tau_m = 100.0;   // ms
  double tau_e = 2.0;     // ms
  double tau_i = 2.0;     // ms
  double t_ref = 3.0;     // ms

  void validate() const;
};

// The inhibitory neuron is an instantaneous relay: whenever any output neuron
// fires, every output neuron's g_i is bumped by the inhibition level after
// loop_delay_ms (winner-take-all competition). Self-inhibition is included;
// the firing neuron is refractory anyway.
struct InhibitionConfig {
  double training_level = 10.0;
  double eval_level = 0.0;
  double loop_delay_ms = 0.0;  // <= dt means one simulation step
};

// Dynamic variables of one encoder run. Exclusively owned by that run; the
// weight matrix may be read-shared across runs when no plasticity hook is
// attached.
struct SimulationState {
  Eigen::ArrayXd u;           // membrane potential, mV
  Eigen::ArrayXd g_e;         // excitatory conductance
  Eigen::ArrayXd g_i;         // inhibitory conductance
  Eigen::ArrayXd refractory;  // ms remaining; u is pinned to u_rest while > 0
  Eigen::ArrayXd rate_trace;  // postsynaptic rate trace, one per neuron
  Eigen::ArrayXd pre_trace;   // presynaptic trace, one per input
  double now = 0.0;           // ms

  SimulationState(Eigen::Index n_neurons, Eigen::Index n_inputs, const NeuronParams& params);

  Eigen::Index neurons() const { return u.size(); }
  Eigen::Index inputs() const { return pre_trace.size(); }

  // Inputs with a nonzero presynaptic trace; keeps per-step trace decay
  // O(active) instead of O(total inputs). Traces below 1e-12 are flushed to
  // zero and retired from the list.
  std::vector<int32_t> active_inputs;
  std::vector<uint8_t> input_active;
  void mark_active(Eigen::Index input);

  // inhibition increments scheduled for future steps (small ring buffer)
  std::vector<double> pending_inhibition;
  size_t pending_cursor = 0;

  // scratch reused across steps, not part of the dynamical state
  Eigen::ArrayXd scratch_gtot, scratch_uinf;
};

// Invoked once per fired neuron. When set, the hook owns the weight update
// and the rate-trace increment (so the update sees the pre-increment rate);
// without a hook the step increments the rate trace itself.
using FireHook = std::function<void(int neuron)>;

struct StepConfig {
  double dt = 0.1;  // ms, must divide 1 ms
  double inhibition_level = 0.0;
  int inhibition_delay_steps = 1;
  NeuronParams neuron;
  PlasticityParams traces;  // only the trace time constants are used here
};

// Advances the network over [state.now, state.now + dt): applies scheduled
// inhibition and the given input events (g_e += weight column, presynaptic
// trace saturates), integrates the membrane by exponential Euler with the
// conductances held over the step, decays conductances and traces, then
// fires every non-refractory neuron at or above threshold (simultaneous
// crossers all fire). Returns the fired indices in ascending order.
// Throws on non-finite state, naming the neuron and time.
std::vector<int> step(SimulationState& state, const Eigen::MatrixXd& weights,
                      std::span<const SpikeEvent> input_events, const StepConfig& config,
                      const FireHook& on_fire = {});

struct WindowConfig {
  double gap_ms = 300.0;
  double dt = 0.1;
  double inhibition_level = 0.0;
  double loop_delay_ms = 0.0;
  NeuronParams neuron;
  PlasticityParams traces;
};

// Presents one spike schedule (schedule.window_ms of driven activity followed
// by gap_ms of input-free decay) and returns per-neuron spike counts for the
// presentation window only. State carries over between calls so consecutive
// documents interact only through the decaying gap. The optional trace sink
// receives one "time_ms,neuron,u_mv" line per neuron per step.
Eigen::ArrayXi run_window(SimulationState& state, const Eigen::MatrixXd& weights,
                          const SpikeSchedule& schedule, const WindowConfig& config,
                          const FireHook& on_fire = {}, std::ostream* trace = nullptr);

}  // namespace spiketext
