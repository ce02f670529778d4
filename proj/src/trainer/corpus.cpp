#include "lop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace lop::trainer {

void TrainingConfig::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive("n_hidden", n_hidden);
  positive("n_factors", n_factors);
  positive("horizon", horizon);
  positive("quantization", quantization);
  positive("cd_k", cd_k);
  positive("batch_size", batch_size);
  positive("validation_gibbs_steps", validation_gibbs_steps);
  if (learning_rate < 0) throw std::invalid_argument("learning_rate must be >= 0");
  if (momentum < 0 || momentum >= 1) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (weight_decay < 0) throw std::invalid_argument("weight_decay must be >= 0");
  if (init_std < 0) throw std::invalid_argument("init_std must be >= 0");
  if (max_epochs < 0) throw std::invalid_argument("max_epochs must be >= 0");
  if (patience < 1) throw std::invalid_argument("patience must be >= 1");
  if (max_epochs > 0 && patience > max_epochs) throw std::invalid_argument("patience must not exceed max_epochs");
  if (!(validation_threshold > 0 && validation_threshold <= 1))
    throw std::invalid_argument("validation_threshold must lie in (0, 1]");
}

nlohmann::json TrainingConfig::to_json() const {
  return {{"model_kind", std::string(ebm::to_string(model_kind))},
          {"n_hidden", n_hidden},
          {"n_factors", n_factors},
          {"horizon", horizon},
          {"quantization", quantization},
          {"cd_k", cd_k},
          {"learning_rate", learning_rate},
          {"momentum", momentum},
          {"weight_decay", weight_decay},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"shuffle_seed", shuffle_seed},
          {"init_std", init_std},
          {"training_granularity", std::string(projection::to_string(training_granularity))},
          {"validation_granularity", std::string(projection::to_string(validation_granularity))},
          {"validation_gibbs_steps", validation_gibbs_steps},
          {"validation_threshold", validation_threshold}};
}

TrainingConfig TrainingConfig::from_json(const nlohmann::json& j) {
  TrainingConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "model_kind") c.model_kind = ebm::parse_model_kind(value.get<std::string>());
    else if (key == "n_hidden") c.n_hidden = value.get<int>();
    else if (key == "n_factors") c.n_factors = value.get<int>();
    else if (key == "horizon") c.horizon = value.get<int>();
    else if (key == "quantization") c.quantization = value.get<int>();
    else if (key == "cd_k") c.cd_k = value.get<int>();
    else if (key == "learning_rate") c.learning_rate = value.get<double>();
    else if (key == "momentum") c.momentum = value.get<double>();
    else if (key == "weight_decay") c.weight_decay = value.get<double>();
    else if (key == "batch_size") c.batch_size = value.get<int>();
    else if (key == "max_epochs") c.max_epochs = value.get<int>();
    else if (key == "patience") c.patience = value.get<int>();
    else if (key == "seed") c.seed = value.get<std::uint64_t>();
    else if (key == "shuffle_seed") c.shuffle_seed = value.get<std::uint64_t>();
    else if (key == "init_std") c.init_std = value.get<double>();
    else if (key == "training_granularity") c.training_granularity = projection::parse_granularity(value.get<std::string>());
    else if (key == "validation_granularity") c.validation_granularity = projection::parse_granularity(value.get<std::string>());
    else if (key == "validation_gibbs_steps") c.validation_gibbs_steps = value.get<int>();
    else if (key == "validation_threshold") c.validation_threshold = value.get<double>();
    else throw std::invalid_argument("unknown training config field '" + key + "'");
  }
  c.validate();
  return c;
}

CorpusSplit split_corpus(std::vector<std::string> files, std::array<double, 3> fractions, std::uint64_t seed,
                         Diagnostics* diag) {
  if (files.size() < 3) throw std::invalid_argument("split_corpus needs at least 3 files, got " + std::to_string(files.size()));
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9 || fractions[0] < 0 || fractions[1] < 0 || fractions[2] < 0)
    throw std::invalid_argument("split fractions must be non-negative and sum to 1");
  std::sort(files.begin(), files.end());
  ebm::Rng rng(seed);
  std::shuffle(files.begin(), files.end(), rng);

  const double n = static_cast<double>(files.size());
  const auto n_val = static_cast<std::size_t>(std::floor(fractions[1] * n + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(fractions[2] * n + 1e-9));
  CorpusSplit split;
  split.fractions = fractions;
  split.validation.assign(files.begin(), files.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.test.assign(files.begin() + static_cast<std::ptrdiff_t>(n_val),
                    files.begin() + static_cast<std::ptrdiff_t>(n_val + n_test));
  split.train.assign(files.begin() + static_cast<std::ptrdiff_t>(n_val + n_test), files.end());
  if (diag) {
    if (split.validation.empty()) diag->warn("validation split is empty");
    if (split.test.empty()) diag->warn("test split is empty");
  }
  return split;
}

Corpus::Corpus(std::vector<score::ScoreFile> files) {
  for (auto& f : files) {
    if (cache_.count(f.name)) throw std::invalid_argument("duplicate score name '" + f.name + "'");
    order_.push_back(f.name);
    cache_.emplace(f.name, std::move(f));
  }
}

Corpus Corpus::from_directory(const std::string& dir, int quantization) {
  namespace fs = std::filesystem;
  Corpus c;
  c.quantization_ = quantization;
  std::vector<fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".json" || ext == ".mid" || ext == ".midi")) found.push_back(entry.path());
  }
  std::sort(found.begin(), found.end());
  for (const auto& p : found) {
    const auto name = p.stem().string();
    if (c.paths_.count(name)) throw std::invalid_argument("duplicate score name '" + name + "' in " + dir);
    c.order_.push_back(name);
    c.paths_[name] = p.string();
  }
  return c;
}

std::vector<std::string> Corpus::names() const { return order_; }

const score::ScoreFile& Corpus::load(const std::string& name) {
  access_log_.push_back(name);
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  auto path = paths_.find(name);
  if (path == paths_.end()) throw std::out_of_range("no score named '" + name + "' in corpus");
  return cache_.emplace(name, score::load_score_file(path->second, quantization_)).first->second;
}

std::vector<score::AlignedPair> align_files(Corpus& corpus, const std::vector<std::string>& names,
                                            const score::OrchestraLayout& layout, Diagnostics* diag) {
  std::vector<score::AlignedPair> out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(score::align_file(corpus.load(n), layout, diag));
  return out;
}

}  // namespace lop::trainer
