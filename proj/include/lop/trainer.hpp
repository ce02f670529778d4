#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lop/eval.hpp"
#include "lop/model_io.hpp"
#include "lop/projection.hpp"
#include "lop/score_io.hpp"

namespace lop::trainer {

using projection::Granularity;

/// Every knob of a training run. Serialized field-for-field as JSON.
struct TrainingConfig {
  ebm::ModelKind model_kind = ebm::ModelKind::crbm;
  int n_hidden = 200;
  int n_factors = 50;  // fgcrbm: factors of each of the three triples
  int horizon = 4;
  int quantization = 4;
  int cd_k = 10;
  double learning_rate = 1e-3;
  double momentum = 0.5;
  double weight_decay = 1e-4;
  int batch_size = 100;
  int max_epochs = 100;
  int patience = 10;
  std::uint64_t seed = 0;          // weight initialization
  std::uint64_t shuffle_seed = 1;  // minibatch order and CD sampling
  double init_std = 0.01;
  Granularity training_granularity = Granularity::event;
  Granularity validation_granularity = Granularity::event;
  int validation_gibbs_steps = 20;
  double validation_threshold = 0.5;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainingConfig from_json(const nlohmann::json& j);
};

struct CorpusSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::array<double, 3> fractions{0.8, 0.1, 0.1};
};

/// Shuffles file names with `seed` and cuts them into train/validation/test.
/// Validation and test receive floor(fraction * n) files each; train the rest.
CorpusSplit split_corpus(std::vector<std::string> files, std::array<double, 3> fractions = {0.8, 0.1, 0.1},
                         std::uint64_t seed = 0, Diagnostics* diag = nullptr);

/// Named score files, loaded on demand. Every load is recorded so a run can be
/// audited for which files it touched.
class Corpus {
 public:
  explicit Corpus(std::vector<score::ScoreFile> files);
  static Corpus from_directory(const std::string& dir, int quantization);

  std::vector<std::string> names() const;
  const score::ScoreFile& load(const std::string& name);
  const std::vector<std::string>& access_log() const { return access_log_; }

 private:
  Corpus() = default;

  std::vector<std::string> order_;
  std::map<std::string, std::string> paths_;
  std::map<std::string, score::ScoreFile> cache_;
  std::vector<std::string> access_log_;
  int quantization_ = 0;
};

// --- Synthetic corpora ----------------------------------------------------

enum class RuleSet {
  /// Piano pitches below 60 double in cello (unison) and bassoon (octave
  /// below); pitches from 60 up double in violin (unison) and flute (octave above).
  register_split,
  /// register_split plus a horn holding, for a whole bar, the lowest piano
  /// pitch sounding on the bar's downbeat.
  sustained_chords,
};

std::string_view to_string(RuleSet rules);
RuleSet parse_rule_set(std::string_view name);

struct SyntheticOptions {
  RuleSet rules = RuleSet::register_split;
  std::size_t n_files = 40;
  std::size_t length_quarters = 64;
  double density = 1.5;  // mean piano notes per chord
  std::uint64_t seed = 0;
  int quantization = 4;
  std::vector<int> min_duration_quarters{1};  // allowed chord durations, in quarters
};

/// Piano pitches the generator draws from.
std::vector<int> synthetic_piano_pitches();

/// Orchestral parts (name, pitch) doubling one piano pitch under register_split.
std::vector<std::pair<std::string, int>> register_split_rule(int piano_pitch);

/// Applies a rule set to a piano roll, producing the orchestral parts.
std::vector<score::PianoRoll> orchestrate(RuleSet rules, const score::PianoRoll& piano);

std::vector<score::ScoreFile> generate_synthetic_corpus(const SyntheticOptions& options);

// --- Training -----------------------------------------------------------

struct EpochLog {
  int epoch;
  double reconstruction_error;
  std::optional<double> validation_accuracy;
};

struct TrainingLog {
  std::vector<EpochLog> epochs;
  int best_epoch = -1;
  std::optional<double> best_validation_accuracy;
  std::vector<std::string> files_read;

  nlohmann::json to_json() const;
};

struct TrainingResult {
  Model model;
  TrainingLog log;
};

/// Aligned pairs for `names` under `layout` at the corpus quantization.
std::vector<score::AlignedPair> align_files(Corpus& corpus, const std::vector<std::string>& names,
                                            const score::OrchestraLayout& layout, Diagnostics* diag = nullptr);

/// CD-k over shuffled minibatches; after each epoch the validation split is
/// scored and the best parameters kept. Stops after `patience` epochs without
/// improvement. Only train and validation files are read.
TrainingResult train(const TrainingConfig& config, Corpus& corpus, const CorpusSplit& split,
                     Diagnostics* diag = nullptr);

}  // namespace lop::trainer
