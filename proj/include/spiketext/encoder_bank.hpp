#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spiketext/corpus.hpp"
#include "spiketext/plasticity.hpp"
#include "spiketext/snn.hpp"
#include "spiketext/spikegen.hpp"

namespace spiketext {

struct SubsetRange {
  int64_t first = 0;
  int64_t last = 0;  // exclusive
  int64_t size() const { return last - first; }
};

// Division of the shuffled training order into overlapping subsets, one per
// encoder. Subsets start at multiples of (subset_size - overlap); the final
// subset is truncated at train_size.
struct SubsetPlan {
  std::vector<SubsetRange> subsets;
  std::vector<int32_t> order;  // shuffled document indices, size = train_size
  uint64_t shuffle_seed = 0;
  int64_t subset_size = 0;
  int64_t overlap = 0;

  std::span<const int32_t> subset_documents(size_t subset_index) const;
};

SubsetPlan plan_subsets(int64_t train_size, int64_t subset_size = 1500, int64_t overlap = 500,
                        uint64_t shuffle_seed = 0);

struct TrainingMeta {
  uint64_t init_seed = 0;
  uint64_t spike_seed = 0;
  int epochs = 0;
  double train_inhibition = 0.0;
  double dt = 0.0;
  int subset_index = -1;
  int64_t subset_first = 0;
  int64_t subset_last = 0;
  double pruned_theta = -1.0;  // < 0: not pruned
  std::string config_hash;
};

// One trained encoder: dense neurons x |sub-dictionary| weight matrix plus
// everything needed to encode documents with it later.
struct EncoderModel {
  std::vector<int32_t> sub_dictionary;  // local input index -> global term id
  Eigen::MatrixXd weights;
  MaskMatrix prune_mask;  // empty when unpruned
  NeuronParams neuron_params;
  PlasticityParams plasticity_params;
  SpikeGenConfig spike_config;
  TrainingMeta meta;

  int neuron_count() const { return static_cast<int>(weights.rows()); }
  Eigen::Index input_count() const { return weights.cols(); }
  bool pruned() const { return prune_mask.size() > 0; }
  // weights with pruned connections zeroed; equal to `weights` when unpruned
  Eigen::MatrixXd effective_weights() const;
};

// Global term ids occurring in at least one of the given documents, in
// ascending global order.
std::vector<int32_t> build_sub_dictionary(const SparseRowMatrix& train_weights,
                                          std::span<const int32_t> doc_indices);

struct EncoderTrainConfig {
  int neurons = 200;
  int epochs = 4;
  double dt = 0.1;
  NeuronParams neuron_params;
  PlasticityParams plasticity;
  SpikeGenConfig spikes;
  InhibitionConfig inhibition;
  uint64_t init_seed = 0;
  double init_w_low = 0.2;
  double init_w_high = 0.8;
  int encoder_index = 0;  // identifies this encoder's spike streams within a bank
};

// Called after each epoch with the epoch index and the weights so far.
using EpochObserver = std::function<void(int epoch, const Eigen::MatrixXd& weights)>;

// Unsupervised training of a single encoder on one subset: per epoch the
// documents are presented in subset order as regenerated spike trains, with
// training inhibition and plasticity active; dynamic state decays through the
// inter-document gap and is reset between epochs. epochs = 0 returns the
// random initialization (the untrained baseline).
EncoderModel train_encoder(const SparseRowMatrix& train_weights,
                           std::span<const int32_t> doc_indices,
                           std::vector<int32_t> sub_dictionary, const EncoderTrainConfig& config,
                           const EpochObserver& observer = {});

// Trains one encoder per subset. Encoders share nothing; per-encoder seeds
// derive from config.init_seed and the subset index (or are given
// explicitly), so results are independent of the worker count.
std::vector<EncoderModel> train_bank(const SubsetPlan& plan, const SparseRowMatrix& train_weights,
                                     const EncoderTrainConfig& config, int parallelism = 1,
                                     std::span<const uint64_t> encoder_seeds = {},
                                     const std::function<void(int subset, const std::string&)>&
                                         progress = {});

// Copy of the model with a fresh pruning mask (the weakest theta fraction of
// each neuron's incoming connections).
EncoderModel prune(const EncoderModel& model, const PruneConfig& config);

// SETM container round-trip.
void save_model(const std::filesystem::path& path, const EncoderModel& model);
EncoderModel load_model(const std::filesystem::path& path);

// Bank manifest (JSON): subset plan, member files, config hash.
void save_bank_manifest(const std::filesystem::path& path, const SubsetPlan& plan,
                        const std::vector<std::string>& member_files,
                        const std::string& config_hash);

}  // namespace spiketext
