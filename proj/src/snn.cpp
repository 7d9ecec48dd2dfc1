#include "spiketext/snn.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spiketext {

namespace {

constexpr double kTraceFloor = 1e-12;  // below this a presynaptic trace is flushed to zero

int steps_per_ms(double dt) {
  if (!(dt > 0) || dt > 1.0) throw std::invalid_argument("snn: dt must be in (0, 1] ms");
  const double n = 1.0 / dt;
  const auto rounded = static_cast<int>(std::llround(n));
  if (std::abs(n - rounded) > 1e-9)
    throw std::invalid_argument("snn: dt must divide 1 ms so input events align to the grid");
  return rounded;
}

[[noreturn]] void fail_non_finite(const SimulationState& state) {
  for (Eigen::Index j = 0; j < state.neurons(); ++j) {
    if (!std::isfinite(state.u[j]) || !std::isfinite(state.g_e[j]) ||
        !std::isfinite(state.g_i[j])) {
      std::ostringstream msg;
      msg << "snn: non-finite state at neuron " << j << ", t = " << state.now << " ms"
          << " (u = " << state.u[j] << ", g_e = " << state.g_e[j] << ", g_i = " << state.g_i[j]
          << ")";
      throw std::runtime_error(msg.str());
    }
  }
  throw std::runtime_error("snn: non-finite state");
}

}  // namespace

void NeuronParams::validate() const {
  if (!(u_inh < u_rest && u_rest < u_th && u_th < u_exc))
    throw std::invalid_argument("snn: potentials must satisfy u_inh < u_rest < u_th < u_exc");
  if (!(tau_m > 0 && tau_e > 0 && tau_i > 0))
    throw std::invalid_argument("snn: time constants must be > 0");
  if (!(t_ref >= 0)) throw std::invalid_argument("snn: t_ref must be >= 0");
}

SimulationState::SimulationState(Eigen::Index n_neurons, Eigen::Index n_inputs,
                                 const NeuronParams& params)
    : u(Eigen::ArrayXd::Constant(n_neurons, params.u_rest)),
      g_e(Eigen::ArrayXd::Zero(n_neurons)),
      g_i(Eigen::ArrayXd::Zero(n_neurons)),
      refractory(Eigen::ArrayXd::Zero(n_neurons)),
      rate_trace(Eigen::ArrayXd::Zero(n_neurons)),
      pre_trace(Eigen::ArrayXd::Zero(n_inputs)),
      input_active(static_cast<size_t>(n_inputs), 0) {}

void SimulationState::mark_active(Eigen::Index input) {
  auto& flag = input_active[static_cast<size_t>(input)];
  if (!flag) {
    flag = 1;
    active_inputs.push_back(static_cast<int32_t>(input));
  }
}

std::vector<int> step(SimulationState& state, const Eigen::MatrixXd& weights,
                      std::span<const SpikeEvent> input_events, const StepConfig& config,
                      const FireHook& on_fire) {
  const double dt = config.dt;
  const NeuronParams& p = config.neuron;

  // inhibition scheduled for this step
  const size_t ring_size = static_cast<size_t>(config.inhibition_delay_steps) + 1;
  if (state.pending_inhibition.size() != ring_size) {
    state.pending_inhibition.assign(ring_size, 0.0);
    state.pending_cursor = 0;
  }
  double& due = state.pending_inhibition[state.pending_cursor];
  if (due > 0.0) {
    state.g_i += due;
    due = 0.0;
  }

  // input events: conductance bump down the weight column, trace saturates
  for (const SpikeEvent& ev : input_events) {
    state.g_e += weights.col(ev.input).array();
    on_presynaptic_spike(state.pre_trace, ev.input);
    state.mark_active(ev.input);
  }

  // exponential-Euler membrane update with conductances held over the step;
  // refractory neurons stay pinned at rest
  state.scratch_gtot = 1.0 + state.g_e + state.g_i;
  state.scratch_uinf =
      (p.u_rest + state.g_e * p.u_exc + state.g_i * p.u_inh) / state.scratch_gtot;
  state.u = (state.refractory > 0.0)
                .select(p.u_rest, state.scratch_uinf + (state.u - state.scratch_uinf) *
                                                           (-(dt / p.tau_m) * state.scratch_gtot)
                                                               .exp());

  // conductance and trace decay
  state.g_e *= std::exp(-dt / p.tau_e);
  state.g_i *= std::exp(-dt / p.tau_i);
  state.rate_trace *= std::exp(-dt / config.traces.tau_rate);
  const double f_pre = std::exp(-dt / config.traces.tau_pre);
  size_t kept = 0;
  for (const int32_t idx : state.active_inputs) {
    const double v = state.pre_trace[idx] * f_pre;
    if (v < kTraceFloor) {
      state.pre_trace[idx] = 0.0;
      state.input_active[static_cast<size_t>(idx)] = 0;
    } else {
      state.pre_trace[idx] = v;
      state.active_inputs[kept++] = idx;
    }
  }
  state.active_inputs.resize(kept);

  state.refractory = (state.refractory - dt).max(0.0);

  if (!state.u.allFinite() || !state.g_e.allFinite() || !state.g_i.allFinite())
    fail_non_finite(state);

  // threshold crossing, evaluated after the integration substep
  std::vector<int> fired;
  for (Eigen::Index j = 0; j < state.neurons(); ++j) {
    if (state.u[j] >= p.u_th && state.refractory[j] <= 0.0) {
      fired.push_back(static_cast<int>(j));
      if (on_fire)
        on_fire(static_cast<int>(j));  // hook owns the rate-trace increment
      else
        state.rate_trace[j] += 1.0;
      state.u[j] = p.u_rest;
      state.refractory[j] = p.t_ref;
    }
  }

  // one inhibition request per step with fires, landing delay_steps later
  if (!fired.empty() && config.inhibition_level > 0.0) {
    const size_t slot =
        (state.pending_cursor + static_cast<size_t>(config.inhibition_delay_steps)) % ring_size;
    state.pending_inhibition[slot] += config.inhibition_level;
  }

  state.pending_cursor = (state.pending_cursor + 1) % ring_size;
  state.now += dt;
  return fired;
}

Eigen::ArrayXi run_window(SimulationState& state, const Eigen::MatrixXd& weights,
                          const SpikeSchedule& schedule, const WindowConfig& config,
                          const FireHook& on_fire, std::ostream* trace) {
  config.neuron.validate();
  const int per_ms = steps_per_ms(config.dt);
  const auto present_ms = static_cast<int64_t>(std::llround(schedule.window_ms));
  const auto gap_ms = static_cast<int64_t>(std::llround(config.gap_ms));
  const int64_t present_steps = present_ms * per_ms;
  const int64_t total_steps = (present_ms + gap_ms) * per_ms;

  StepConfig step_config{.dt = config.dt,
                         .inhibition_level = config.inhibition_level,
                         .inhibition_delay_steps =
                             std::max(1, static_cast<int>(std::llround(config.loop_delay_ms / config.dt))),
                         .neuron = config.neuron,
                         .traces = config.traces};

  Eigen::ArrayXi counts = Eigen::ArrayXi::Zero(state.neurons());
  size_t next_event = 0;
  for (int64_t s = 0; s < total_steps; ++s) {
    std::span<const SpikeEvent> events;
    if (s % per_ms == 0) {
      const auto ms = static_cast<int32_t>(s / per_ms);
      const size_t begin = next_event;
      while (next_event < schedule.events.size() && schedule.events[next_event].time_ms == ms)
        ++next_event;
      events = std::span<const SpikeEvent>(schedule.events.data() + begin, next_event - begin);
    }
    const std::vector<int> fired = step(state, weights, events, step_config, on_fire);
    if (s < present_steps)
      for (const int j : fired) ++counts[j];
    if (trace)
      for (Eigen::Index j = 0; j < state.neurons(); ++j)
        *trace << state.now << "," << j << "," << state.u[j] << "\n";
  }
  return counts;
}

}  // namespace spiketext
