#include "lop/trainer.hpp"

#include <algorithm>
#include <numeric>

namespace lop::trainer {

nlohmann::json TrainingLog::to_json() const {
  auto epochs_j = nlohmann::json::array();
  for (const auto& e : epochs) {
    nlohmann::json row = {{"epoch", e.epoch}, {"reconstruction_error", e.reconstruction_error}};
    row["validation_accuracy"] = e.validation_accuracy ? nlohmann::json(*e.validation_accuracy) : nlohmann::json();
    epochs_j.push_back(std::move(row));
  }
  nlohmann::json j = {{"epochs", epochs_j}, {"best_epoch", best_epoch}, {"files_read", files_read}};
  j["best_validation_accuracy"] =
      best_validation_accuracy ? nlohmann::json(*best_validation_accuracy) : nlohmann::json();
  return j;
}

TrainingResult train(const TrainingConfig& config, Corpus& corpus, const CorpusSplit& split, Diagnostics* diag) {
  config.validate();
  if (split.train.empty()) throw std::invalid_argument("train: empty training split");

  std::vector<std::vector<score::PianoRoll>> orchestras;
  for (const auto& name : split.train) orchestras.push_back(corpus.load(name).orchestra);
  const auto layout = score::build_layout(orchestras, diag);

  const auto train_pairs = align_files(corpus, split.train, layout, diag);
  const auto val_pairs = align_files(corpus, split.validation, layout, diag);

  const auto N = static_cast<std::size_t>(config.horizon);
  const projection::ModelBinding binding(config.model_kind, layout.total_dim(), N);
  std::vector<ebm::Sample> samples;
  for (const auto& pair : train_pairs)
    for (const auto& tp : projection::make_training_pairs(pair.piano, pair.orchestra, N, config.training_granularity))
      samples.push_back(binding.training_sample(tp.target, tp.context));

  ebm::Dims dims = binding.unit_dims();
  dims.n_h = config.n_hidden;
  if (config.model_kind == ebm::ModelKind::fgcrbm) dims.n_f = dims.n_fa = dims.n_fb = config.n_factors;

  TrainingResult result;
  result.model.params = ebm::init_gaussian(config.model_kind, dims, config.init_std, config.seed);
  result.model.layout = layout;
  result.model.quantization = config.quantization;
  result.model.horizon = config.horizon;
  result.model.training_config = config.to_json();

  auto finish = [&] {
    result.log.files_read = corpus.access_log();
    return std::move(result);
  };
  if (config.max_epochs == 0 || samples.empty()) {
    if (samples.empty() && diag) diag->warn("training split produced no training pairs");
    return finish();
  }

  ebm::SamplingConfig val_sampling;
  val_sampling.gibbs_steps = config.validation_gibbs_steps;
  val_sampling.threshold = config.validation_threshold;
  val_sampling.seed = config.shuffle_seed;

  ebm::Rng rng(config.shuffle_seed);
  ebm::CdOptimizer optimizer({config.cd_k, config.learning_rate, config.momentum, config.weight_decay});
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<ebm::Sample> batch;
  Model current = result.model;
  int stale = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double recon = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(samples[order[i]]);
      try {
        recon += optimizer.update(current.params, batch, rng);
      } catch (const ebm::TrainingDivergence& e) {
        throw ebm::TrainingDivergence("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
      }
      ++batches;
    }
    EpochLog entry{epoch, recon / static_cast<double>(batches), std::nullopt};

    if (!val_pairs.empty()) {
      const double acc = eval::evaluate_model(current, val_pairs, config.validation_granularity, val_sampling).accuracy;
      entry.validation_accuracy = acc;
      if (!result.log.best_validation_accuracy || acc > *result.log.best_validation_accuracy) {
        result.log.best_validation_accuracy = acc;
        result.log.best_epoch = epoch;
        result.model = current;
        stale = 0;
      } else {
        ++stale;
      }
    } else {
      result.log.best_epoch = epoch;
      result.model = current;
    }
    result.log.epochs.push_back(entry);
    if (stale >= config.patience) break;
  }
  return finish();
}

}  // namespace lop::trainer
