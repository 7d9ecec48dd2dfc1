#include "spiketext/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <thread>

#include "spiketext/rng.hpp"

namespace spiketext {

namespace {

struct PreparedEncoder {
  const EncoderModel* model;
  Eigen::MatrixXd effective;  // pruned connections zeroed
  std::vector<int32_t> global_to_local;
  Eigen::Index feature_offset;
};

std::vector<PreparedEncoder> prepare_bank(const std::vector<EncoderModel>& bank,
                                          Eigen::Index dictionary_size) {
  std::vector<PreparedEncoder> prepared;
  prepared.reserve(bank.size());
  Eigen::Index offset = 0;
  for (const EncoderModel& model : bank) {
    PreparedEncoder p;
    p.model = &model;
    p.effective = model.effective_weights();
    p.global_to_local.assign(static_cast<size_t>(dictionary_size), -1);
    for (size_t l = 0; l < model.sub_dictionary.size(); ++l) {
      const int32_t g = model.sub_dictionary[l];
      if (g < 0 || g >= dictionary_size)
        throw std::runtime_error("encode: sub-dictionary term id out of dictionary range");
      p.global_to_local[static_cast<size_t>(g)] = static_cast<int32_t>(l);
    }
    p.feature_offset = offset;
    offset += model.weights.rows();
    prepared.push_back(std::move(p));
  }
  return prepared;
}

}  // namespace

FeatureMatrix encode_documents(const std::vector<EncoderModel>& bank,
                               const DocumentTermMatrix& documents, const EncodeConfig& config) {
  if (bank.empty()) throw std::invalid_argument("encode: empty bank");
  if (config.passes < 1) throw std::invalid_argument("encode: passes must be >= 1");
  const Eigen::Index n_docs = documents.rows();
  const auto prepared = prepare_bank(bank, documents.cols());
  Eigen::Index total_neurons = 0;
  for (const EncoderModel& m : bank) total_neurons += m.weights.rows();

  FeatureMatrix features;
  features.labels = documents.labels;
  features.counts = Eigen::MatrixXd::Zero(n_docs, total_neurons);

  auto encode_doc = [&](Eigen::Index doc) {
    for (size_t b = 0; b < prepared.size(); ++b) {
      const PreparedEncoder& enc = prepared[b];
      const EncoderModel& model = *enc.model;

      Eigen::SparseVector<double> row(model.input_count());
      for (SparseRowMatrix::InnerIterator it(documents.weights, doc); it; ++it) {
        const int32_t local = enc.global_to_local[static_cast<size_t>(it.index())];
        if (local >= 0) row.insertBack(local) = it.value();
      }

      WindowConfig window{.gap_ms = model.spike_config.gap_ms,
                          .dt = config.dt,
                          .inhibition_level = config.inhibition_level,
                          .loop_delay_ms = 0.0,
                          .neuron = model.neuron_params,
                          .traces = model.plasticity_params};

      Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(model.weights.rows());
      for (int pass = 0; pass < config.passes; ++pass) {
        const SpikeSchedule schedule = generate_spikes(
            row, model.spike_config,
            spike_stream(StreamKind::kEval, static_cast<uint64_t>(b),
                         static_cast<uint64_t>(pass), static_cast<uint64_t>(doc)));
        SimulationState state(model.weights.rows(), model.input_count(), model.neuron_params);
        sum += run_window(state, enc.effective, schedule, window).cast<double>();
      }
      features.counts.row(doc).segment(enc.feature_offset, model.weights.rows()) =
          (sum / static_cast<double>(config.passes)).matrix().transpose();
    }
  };

  const int workers = std::max(1, config.parallelism);
  if (workers == 1 || n_docs < 2) {
    for (Eigen::Index doc = 0; doc < n_docs; ++doc) encode_doc(doc);
  } else {
    std::atomic<Eigen::Index> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;
    auto worker = [&] {
      for (;;) {
        const Eigen::Index doc = next.fetch_add(1);
        if (doc >= n_docs || failed.load()) return;
        try {
          encode_doc(doc);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          failed.store(true);
          if (failure.empty()) failure = e.what();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("encode: " + failure);
  }
  return features;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& features,
                   const std::string& meta_json) {
  std::vector<std::pair<std::string, std::string>> sections;
  ByteWriter w;
  put_dense(w, features.counts);
  sections.emplace_back("features", w.take());
  ByteWriter l;
  put_i32_vector(l, features.labels);
  sections.emplace_back("labels", l.take());
  sections.emplace_back("meta", meta_json);
  write_container(path, kCorpusMagic, sections);
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  const Container c = read_container(path, kCorpusMagic);
  FeatureMatrix f;
  ByteReader w(c.at("features"));
  f.counts = get_dense(w);
  ByteReader l(c.at("labels"));
  f.labels = get_i32_vector(l);
  return f;
}

namespace {

Eigen::MatrixXd standardized(const Eigen::MatrixXd& x, const Eigen::RowVectorXd& mean,
                             const Eigen::RowVectorXd& scale) {
  Eigen::MatrixXd out = x.rowwise() - mean;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    if (scale[j] > 0)
      out.col(j) /= scale[j];
    else
      out.col(j).setZero();  // constant columns carry no information
  }
  return out;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd p = (scores.colwise() - scores.rowwise().maxCoeff()).array().exp();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

}  // namespace

LogisticRegression train_classifier(const FeatureMatrix& train, const ClassifierConfig& config) {
  const Eigen::Index n = train.rows();
  const Eigen::Index p = train.cols();
  if (n == 0) throw std::invalid_argument("classifier: no training samples");

  int32_t max_label = 0;
  for (const int32_t y : train.labels) max_label = std::max(max_label, y);
  const int k = max_label + 1;
  {
    std::vector<int64_t> per_class(static_cast<size_t>(k), 0);
    for (const int32_t y : train.labels) ++per_class[static_cast<size_t>(y)];
    const auto populated = std::count_if(per_class.begin(), per_class.end(),
                                         [](int64_t c) { return c > 0; });
    if (populated < 2) throw std::invalid_argument("classifier: need at least two classes");
  }

  LogisticRegression model;
  model.n_classes = k;
  if (config.standardize) {
    model.feature_mean = train.counts.colwise().mean();
    Eigen::RowVectorXd var =
        (train.counts.rowwise() - model.feature_mean).array().square().colwise().mean();
    model.feature_scale = var.array().sqrt();
    for (Eigen::Index j = 0; j < p; ++j)
      if (model.feature_scale[j] < 1e-12) model.feature_scale[j] = 0.0;
  } else {
    model.feature_mean = Eigen::RowVectorXd::Zero(p);
    model.feature_scale = Eigen::RowVectorXd::Ones(p);
  }
  const Eigen::MatrixXd x = standardized(train.counts, model.feature_mean, model.feature_scale);

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, k);
  for (Eigen::Index i = 0; i < n; ++i) y(i, train.labels[static_cast<size_t>(i)]) = 1.0;

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, k);
  Eigen::RowVectorXd intercept = Eigen::RowVectorXd::Zero(k);
  const double inv_n = 1.0 / static_cast<double>(n);

  auto objective = [&](const Eigen::MatrixXd& b, const Eigen::RowVectorXd& b0) {
    Eigen::MatrixXd scores = (x * b).rowwise() + b0;
    Eigen::VectorXd row_max = scores.rowwise().maxCoeff();
    Eigen::VectorXd lse =
        row_max.array() + (scores.colwise() - row_max).array().exp().rowwise().sum().log();
    const double nll = (lse.sum() - (scores.array() * y.array()).sum()) * inv_n;
    return nll + 0.5 * config.l2_lambda * b.squaredNorm();
  };

  double obj = objective(beta, intercept);
  double step_size = 1.0;
  int iter = 0;
  double grad_norm = 0.0;
  for (; iter < config.max_iter; ++iter) {
    const Eigen::MatrixXd probs = softmax_rows((x * beta).rowwise() + intercept);
    const Eigen::MatrixXd err = (probs - y) * inv_n;
    const Eigen::MatrixXd grad = x.transpose() * err + config.l2_lambda * beta;
    const Eigen::RowVectorXd grad0 = err.colwise().sum();

    grad_norm = std::max(grad.cwiseAbs().maxCoeff(), grad0.cwiseAbs().maxCoeff());
    if (grad_norm < config.tol) break;

    // backtracking line search (Armijo)
    const double descent = grad.squaredNorm() + grad0.squaredNorm();
    double t = step_size;
    for (;;) {
      const Eigen::MatrixXd beta_try = beta - t * grad;
      const Eigen::RowVectorXd intercept_try = intercept - t * grad0;
      const double obj_try = objective(beta_try, intercept_try);
      if (obj_try <= obj - 1e-4 * t * descent || t < 1e-12) {
        beta = beta_try;
        intercept = intercept_try;
        obj = obj_try;
        break;
      }
      t *= 0.5;
    }
    step_size = std::min(t * 2.0, 1e6);
  }

  model.coef = std::move(beta);
  model.intercept = std::move(intercept);
  model.n_iter = iter;
  model.final_grad_norm = grad_norm;
  return model;
}

Eigen::VectorXi predict(const LogisticRegression& model, const Eigen::MatrixXd& features) {
  if (features.cols() != model.coef.rows())
    throw std::invalid_argument("classifier: feature dimension mismatch");
  const Eigen::MatrixXd x = standardized(features, model.feature_mean, model.feature_scale);
  const Eigen::MatrixXd scores = (x * model.coef).rowwise() + model.intercept;
  Eigen::VectorXi labels(scores.rows());
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best = 0;
    scores.row(i).maxCoeff(&best);
    labels[i] = static_cast<int>(best);
  }
  return labels;
}

double evaluate_accuracy(const LogisticRegression& model, const FeatureMatrix& test) {
  if (test.rows() == 0) throw std::invalid_argument("classifier: empty test set");
  const Eigen::VectorXi predicted = predict(model, test.counts);
  int64_t correct = 0;
  for (Eigen::Index i = 0; i < predicted.size(); ++i)
    if (predicted[i] == test.labels[static_cast<size_t>(i)]) ++correct;
  return 100.0 * static_cast<double>(correct) / static_cast<double>(test.rows());
}

SweepResult sweep_inhibition(const std::vector<EncoderModel>& bank,
                             const DocumentTermMatrix& train, const DocumentTermMatrix& test,
                             const std::vector<double>& levels, const EncodeConfig& encode,
                             const ClassifierConfig& classifier) {
  SweepResult result;
  result.axis = "inhibition";
  for (const double level : levels) {
    EncodeConfig cfg = encode;
    cfg.inhibition_level = level;
    const FeatureMatrix train_features = encode_documents(bank, train, cfg);
    const FeatureMatrix test_features = encode_documents(bank, test, cfg);
    const LogisticRegression lr = train_classifier(train_features, classifier);
    result.points.push_back({level, 0.0, evaluate_accuracy(lr, test_features)});
  }
  return result;
}

SweepResult sweep_size_pruning(const CorpusArtifacts& artifacts,
                               const std::vector<int>& total_sizes,
                               const std::vector<double>& thetas, const BankTrainConfig& bank,
                               const EncodeConfig& encode, const ClassifierConfig& classifier) {
  SweepResult result;
  result.axis = "size_pruning";
  const SubsetPlan plan = plan_subsets(artifacts.train.rows(), bank.subset_size, bank.overlap,
                                       bank.shuffle_seed);
  const auto n_subsets = static_cast<int>(plan.subsets.size());

  for (const int total : total_sizes) {
    EncoderTrainConfig ec = bank.encoder;
    ec.neurons = std::max(1, total / n_subsets);
    const std::vector<EncoderModel> trained =
        train_bank(plan, artifacts.train.weights, ec, bank.parallelism);
    const double actual_total = static_cast<double>(ec.neurons) * n_subsets;

    for (const double theta : thetas) {
      std::vector<EncoderModel> masked;
      const std::vector<EncoderModel>* use = &trained;
      if (theta > 0) {
        masked.reserve(trained.size());
        for (const EncoderModel& m : trained) masked.push_back(prune(m, PruneConfig{theta}));
        use = &masked;
      }
      const FeatureMatrix train_features = encode_documents(*use, artifacts.train, encode);
      const FeatureMatrix test_features = encode_documents(*use, artifacts.test, encode);
      const LogisticRegression lr = train_classifier(train_features, classifier);
      result.points.push_back({actual_total, theta, evaluate_accuracy(lr, test_features)});
    }
  }
  return result;
}

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& result,
                     int64_t n_train, int64_t n_test, uint64_t seed,
                     const std::string& config_hash) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write sweep csv: " + path.string());
  out.precision(10);
  out << "setting,setting2,accuracy_percent,n_train,n_test,seed,config_hash\n";
  for (const SweepPoint& p : result.points)
    out << p.setting << "," << p.setting2 << "," << p.accuracy_percent << "," << n_train << ","
        << n_test << "," << seed << "," << config_hash << "\n";
}

}  // namespace spiketext
