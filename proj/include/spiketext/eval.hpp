#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "spiketext/corpus.hpp"
#include "spiketext/encoder_bank.hpp"

namespace spiketext {

// Documents x (bank neurons) spike counts; column blocks follow bank order,
// so block b equals the standalone encoding by encoder b alone.
struct FeatureMatrix {
  Eigen::MatrixXd counts;
  std::vector<int32_t> labels;

  Eigen::Index rows() const { return counts.rows(); }
  Eigen::Index cols() const { return counts.cols(); }
};

struct EncodeConfig {
  double inhibition_level = 0.0;
  double dt = 0.1;
  int passes = 1;  // > 1 averages spike counts over repeated stochastic presentations
  int parallelism = 1;
};

// Frozen-weight encoding: per document and encoder, spikes are regenerated
// on the encoder's sub-dictionary from a dedicated evaluation stream and run
// through the network (fresh state per document) at the given inhibition
// level; per-neuron counts are concatenated across encoders. Never mutates
// the models.
FeatureMatrix encode_documents(const std::vector<EncoderModel>& bank,
                               const DocumentTermMatrix& documents, const EncodeConfig& config);

// SETC export of a feature matrix for external classifiers.
void save_features(const std::filesystem::path& path, const FeatureMatrix& features,
                   const std::string& meta_json = "{}");
FeatureMatrix load_features(const std::filesystem::path& path);

struct ClassifierConfig {
  double l2_lambda = 1e-4;
  double tol = 1e-5;   // gradient max-norm stopping criterion
  int max_iter = 2000;
  bool standardize = true;
};

// Multinomial logistic regression fit by full-batch gradient descent with
// backtracking line search on the L2-penalized cross-entropy. Features are
// standardized per column (constant columns map to 0); the intercept is
// neither standardized nor penalized.
struct LogisticRegression {
  Eigen::MatrixXd coef;        // features x classes
  Eigen::RowVectorXd intercept;
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_scale;  // 0 marks a constant column
  int n_classes = 0;
  int n_iter = 0;
  double final_grad_norm = 0.0;
};

LogisticRegression train_classifier(const FeatureMatrix& train,
                                    const ClassifierConfig& config = {});
Eigen::VectorXi predict(const LogisticRegression& model, const Eigen::MatrixXd& features);
// 100 * correct / total
double evaluate_accuracy(const LogisticRegression& model, const FeatureMatrix& test);

struct SweepPoint {
  double setting = 0.0;   // inhibition level, or total bank neurons
  double setting2 = 0.0;  // pruning theta for the size x pruning grid
  double accuracy_percent = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
};

// Re-encodes train and test at every inhibition level and reports test
// accuracy per level.
SweepResult sweep_inhibition(const std::vector<EncoderModel>& bank,
                             const DocumentTermMatrix& train, const DocumentTermMatrix& test,
                             const std::vector<double>& levels, const EncodeConfig& encode,
                             const ClassifierConfig& classifier);

struct BankTrainConfig {
  int64_t subset_size = 1500;
  int64_t overlap = 500;
  uint64_t shuffle_seed = 0;
  EncoderTrainConfig encoder;  // .neurons is overridden per sweep size
  int parallelism = 1;
};

// Trains one bank per total size (neurons split evenly across subsets), then
// evaluates every pruning theta on that same trained bank. theta = 0 means
// no pruning.
SweepResult sweep_size_pruning(const CorpusArtifacts& artifacts,
                               const std::vector<int>& total_sizes,
                               const std::vector<double>& thetas, const BankTrainConfig& bank,
                               const EncodeConfig& encode, const ClassifierConfig& classifier);

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result,
                     int64_t n_train, int64_t n_test, uint64_t seed,
                     const std::string& config_hash);

}  // namespace spiketext
