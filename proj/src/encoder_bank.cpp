#include "spiketext/encoder_bank.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "spiketext/rng.hpp"

namespace spiketext {

using nlohmann::json;

std::span<const int32_t> SubsetPlan::subset_documents(size_t subset_index) const {
  const SubsetRange& r = subsets.at(subset_index);
  return std::span<const int32_t>(order.data() + r.first, static_cast<size_t>(r.size()));
}

SubsetPlan plan_subsets(int64_t train_size, int64_t subset_size, int64_t overlap,
                        uint64_t shuffle_seed) {
  if (train_size <= 0) throw std::invalid_argument("plan_subsets: train_size must be > 0");
  if (!(overlap >= 0 && overlap < subset_size))
    throw std::invalid_argument("plan_subsets: overlap must be in [0, subset_size)");
  if (subset_size > train_size)
    std::cerr << "warning: subset_size " << subset_size << " exceeds train size " << train_size
              << "; using a single subset\n";

  SubsetPlan plan;
  plan.shuffle_seed = shuffle_seed;
  plan.subset_size = subset_size;
  plan.overlap = overlap;

  // Fisher-Yates over the document indices; hand-rolled so the permutation is
  // identical on every platform.
  plan.order.resize(static_cast<size_t>(train_size));
  for (int64_t i = 0; i < train_size; ++i) plan.order[static_cast<size_t>(i)] = static_cast<int32_t>(i);
  SplitMix64 rng(shuffle_seed);
  for (int64_t i = train_size - 1; i > 0; --i) {
    const auto j = static_cast<int64_t>(rng.next_below(static_cast<uint64_t>(i + 1)));
    std::swap(plan.order[static_cast<size_t>(i)], plan.order[static_cast<size_t>(j)]);
  }

  const int64_t stride = subset_size - overlap;
  for (int64_t first = 0;; first += stride) {
    const int64_t last = std::min(first + subset_size, train_size);
    plan.subsets.push_back({first, last});
    if (first + subset_size >= train_size) break;
  }
  return plan;
}

std::vector<int32_t> build_sub_dictionary(const SparseRowMatrix& train_weights,
                                          std::span<const int32_t> doc_indices) {
  if (doc_indices.empty()) throw std::invalid_argument("build_sub_dictionary: empty subset");
  std::vector<uint8_t> seen(static_cast<size_t>(train_weights.cols()), 0);
  for (const int32_t doc : doc_indices)
    for (SparseRowMatrix::InnerIterator it(train_weights, doc); it; ++it)
      seen[static_cast<size_t>(it.index())] = 1;
  std::vector<int32_t> sub;
  for (size_t j = 0; j < seen.size(); ++j)
    if (seen[j]) sub.push_back(static_cast<int32_t>(j));
  return sub;
}

Eigen::MatrixXd EncoderModel::effective_weights() const {
  if (!pruned()) return weights;
  return weights.cwiseProduct(prune_mask.cast<double>());
}

namespace {

// Per-document weight rows remapped into the encoder's local input space.
std::vector<Eigen::SparseVector<double>> local_rows(const SparseRowMatrix& weights,
                                                    std::span<const int32_t> doc_indices,
                                                    const std::vector<int32_t>& sub_dictionary) {
  std::vector<int32_t> global_to_local(static_cast<size_t>(weights.cols()), -1);
  for (size_t l = 0; l < sub_dictionary.size(); ++l)
    global_to_local[static_cast<size_t>(sub_dictionary[l])] = static_cast<int32_t>(l);

  std::vector<Eigen::SparseVector<double>> rows;
  rows.reserve(doc_indices.size());
  for (const int32_t doc : doc_indices) {
    Eigen::SparseVector<double> row(static_cast<Eigen::Index>(sub_dictionary.size()));
    for (SparseRowMatrix::InnerIterator it(weights, doc); it; ++it) {
      const int32_t local = global_to_local[static_cast<size_t>(it.index())];
      if (local >= 0) row.insertBack(local) = it.value();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

EncoderModel train_encoder(const SparseRowMatrix& train_weights,
                           std::span<const int32_t> doc_indices,
                           std::vector<int32_t> sub_dictionary, const EncoderTrainConfig& config,
                           const EpochObserver& observer) {
  if (config.neurons < 1) throw std::invalid_argument("train_encoder: need at least one neuron");
  if (doc_indices.empty()) throw std::invalid_argument("train_encoder: empty subset");
  config.neuron_params.validate();
  config.plasticity.validate();
  config.spikes.validate();

  EncoderModel model;
  model.sub_dictionary = std::move(sub_dictionary);
  model.neuron_params = config.neuron_params;
  model.plasticity_params = config.plasticity;
  model.spike_config = config.spikes;
  model.meta.init_seed = config.init_seed;
  model.meta.spike_seed = config.spikes.rng_seed;
  model.meta.epochs = config.epochs;
  model.meta.train_inhibition = config.inhibition.training_level;
  model.meta.dt = config.dt;
  model.meta.subset_index = config.encoder_index;

  const auto n_inputs = static_cast<Eigen::Index>(model.sub_dictionary.size());
  SplitMix64 init_rng(config.init_seed);
  model.weights.resize(config.neurons, n_inputs);
  // explicit fill order keeps the initialization reproducible
  for (Eigen::Index c = 0; c < n_inputs; ++c)
    for (Eigen::Index r = 0; r < config.neurons; ++r)
      model.weights(r, c) = init_rng.next_uniform(config.init_w_low, config.init_w_high);

  const auto rows = local_rows(train_weights, doc_indices, model.sub_dictionary);

  WindowConfig window{.gap_ms = config.spikes.gap_ms,
                      .dt = config.dt,
                      .inhibition_level = config.inhibition.training_level,
                      .loop_delay_ms = config.inhibition.loop_delay_ms,
                      .neuron = config.neuron_params,
                      .traces = config.plasticity};

  const auto encoder_id = static_cast<uint64_t>(std::max(0, config.encoder_index));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    SimulationState state(config.neurons, n_inputs, config.neuron_params);
    const FireHook hook = [&](int j) {
      on_postsynaptic_spike(model.weights.row(j), state.pre_trace,
                            state.rate_trace.coeffRef(j), config.plasticity);
    };
    for (size_t pos = 0; pos < rows.size(); ++pos) {
      const SpikeSchedule schedule =
          generate_spikes(rows[pos], config.spikes,
                          spike_stream(StreamKind::kTrain, encoder_id,
                                       static_cast<uint64_t>(epoch), static_cast<uint64_t>(pos)));
      run_window(state, model.weights, schedule, window, hook);
    }
    if (observer) observer(epoch, model.weights);
  }
  return model;
}

std::vector<EncoderModel> train_bank(const SubsetPlan& plan, const SparseRowMatrix& train_weights,
                                     const EncoderTrainConfig& config, int parallelism,
                                     std::span<const uint64_t> encoder_seeds,
                                     const std::function<void(int, const std::string&)>& progress) {
  const size_t n = plan.subsets.size();
  if (!encoder_seeds.empty() && encoder_seeds.size() != n)
    throw std::invalid_argument("train_bank: encoder_seeds size must match subset count");

  std::vector<EncoderModel> bank(n);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        EncoderTrainConfig ec = config;
        ec.encoder_index = static_cast<int>(i);
        ec.init_seed = encoder_seeds.empty() ? mix64(config.init_seed, static_cast<uint64_t>(i))
                                             : encoder_seeds[i];
        const auto docs = plan.subset_documents(i);
        std::vector<int32_t> sub = build_sub_dictionary(train_weights, docs);
        EncoderModel model = train_encoder(train_weights, docs, std::move(sub), ec);
        model.meta.subset_first = plan.subsets[i].first;
        model.meta.subset_last = plan.subsets[i].last;
        bank[i] = std::move(model);
        if (progress) progress(static_cast<int>(i), "trained");
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        if (failure.empty())
          failure = "train_bank: subset " + std::to_string(i) + " failed: " + e.what();
        return;
      }
    }
  };

  const int workers = std::max(1, std::min<int>(parallelism, static_cast<int>(n)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw std::runtime_error(failure);
  return bank;
}

EncoderModel prune(const EncoderModel& model, const PruneConfig& config) {
  EncoderModel out = model;
  out.prune_mask = prune_mask(model.weights, config);
  out.meta.pruned_theta = config.theta;
  return out;
}

namespace {

json meta_to_json(const EncoderModel& m) {
  return json{{"neuron",
               {{"u_rest", m.neuron_params.u_rest},
                {"u_exc", m.neuron_params.u_exc},
                {"u_inh", m.neuron_params.u_inh},
                {"u_th", m.neuron_params.u_th},
                {"tau_m", m.neuron_params.tau_m},
                {"tau_e", m.neuron_params.tau_e},
                {"tau_i", m.neuron_params.tau_i},
                {"t_ref", m.neuron_params.t_ref}}},
              {"plasticity",
               {{"eta", m.plasticity_params.eta},
                {"tau_pre", m.plasticity_params.tau_pre},
                {"tau_rate", m.plasticity_params.tau_rate},
                {"scaling_floor", m.plasticity_params.scaling_floor},
                {"w_min", m.plasticity_params.w_min},
                {"w_max", m.plasticity_params.w_max}}},
              {"spikes",
               {{"presentation_ms", m.spike_config.presentation_ms},
                {"gap_ms", m.spike_config.gap_ms},
                {"alpha", m.spike_config.alpha},
                {"rng_seed", m.spike_config.rng_seed}}},
              {"training",
               {{"init_seed", m.meta.init_seed},
                {"spike_seed", m.meta.spike_seed},
                {"epochs", m.meta.epochs},
                {"train_inhibition", m.meta.train_inhibition},
                {"dt", m.meta.dt},
                {"subset_index", m.meta.subset_index},
                {"subset_first", m.meta.subset_first},
                {"subset_last", m.meta.subset_last},
                {"pruned_theta", m.meta.pruned_theta},
                {"config_hash", m.meta.config_hash}}}};
}

void meta_from_json(const json& j, EncoderModel& m) {
  const json& n = j.at("neuron");
  m.neuron_params.u_rest = n.at("u_rest").get<double>();
  m.neuron_params.u_exc = n.at("u_exc").get<double>();
  m.neuron_params.u_inh = n.at("u_inh").get<double>();
  m.neuron_params.u_th = n.at("u_th").get<double>();
  m.neuron_params.tau_m = n.at("tau_m").get<double>();
  m.neuron_params.tau_e = n.at("tau_e").get<double>();
  m.neuron_params.tau_i = n.at("tau_i").get<double>();
  m.neuron_params.t_ref = n.at("t_ref").get<double>();
  const json& p = j.at("plasticity");
  m.plasticity_params.eta = p.at("eta").get<double>();
  m.plasticity_params.tau_pre = p.at("tau_pre").get<double>();
  m.plasticity_params.tau_rate = p.at("tau_rate").get<double>();
  m.plasticity_params.scaling_floor = p.at("scaling_floor").get<double>();
  m.plasticity_params.w_min = p.at("w_min").get<double>();
  m.plasticity_params.w_max = p.at("w_max").get<double>();
  const json& s = j.at("spikes");
  m.spike_config.presentation_ms = s.at("presentation_ms").get<double>();
  m.spike_config.gap_ms = s.at("gap_ms").get<double>();
  m.spike_config.alpha = s.at("alpha").get<double>();
  m.spike_config.rng_seed = s.at("rng_seed").get<uint64_t>();
  const json& t = j.at("training");
  m.meta.init_seed = t.at("init_seed").get<uint64_t>();
  m.meta.spike_seed = t.at("spike_seed").get<uint64_t>();
  m.meta.epochs = t.at("epochs").get<int>();
  m.meta.train_inhibition = t.at("train_inhibition").get<double>();
  m.meta.dt = t.at("dt").get<double>();
  m.meta.subset_index = t.at("subset_index").get<int>();
  m.meta.subset_first = t.at("subset_first").get<int64_t>();
  m.meta.subset_last = t.at("subset_last").get<int64_t>();
  m.meta.pruned_theta = t.at("pruned_theta").get<double>();
  m.meta.config_hash = t.at("config_hash").get<std::string>();
}

}  // namespace

void save_model(const std::filesystem::path& path, const EncoderModel& model) {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.emplace_back("params", meta_to_json(model).dump());

  ByteWriter sub;
  put_i32_vector(sub, model.sub_dictionary);
  sections.emplace_back("sub_dictionary", sub.take());

  ByteWriter w;
  put_dense(w, model.weights);
  sections.emplace_back("weights", w.take());

  if (model.pruned()) {
    ByteWriter m;
    put_mask(m, model.prune_mask);
    sections.emplace_back("prune_mask", m.take());
  }
  write_container(path, kModelMagic, sections);
}

EncoderModel load_model(const std::filesystem::path& path) {
  const Container c = read_container(path, kModelMagic);
  EncoderModel model;
  meta_from_json(json::parse(c.at("params")), model);

  ByteReader sub(c.at("sub_dictionary"));
  model.sub_dictionary = get_i32_vector(sub);

  ByteReader w(c.at("weights"));
  model.weights = get_dense(w);

  if (const std::string* m = c.find("prune_mask")) {
    ByteReader r(*m);
    model.prune_mask = get_mask(r);
  }
  return model;
}

void save_bank_manifest(const std::filesystem::path& path, const SubsetPlan& plan,
                        const std::vector<std::string>& member_files,
                        const std::string& config_hash) {
  json subsets = json::array();
  for (const SubsetRange& r : plan.subsets) subsets.push_back({{"first", r.first}, {"last", r.last}});
  const json manifest{{"version", 1},
                      {"plan",
                       {{"train_size", plan.order.size()},
                        {"subset_size", plan.subset_size},
                        {"overlap", plan.overlap},
                        {"shuffle_seed", plan.shuffle_seed},
                        {"subsets", subsets}}},
                      {"members", member_files},
                      {"config_hash", config_hash}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write bank manifest: " + path.string());
  out << manifest.dump(2) << "\n";
}

}  // namespace spiketext
