#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lop/projection.hpp"

namespace lop::eval {

using projection::FramePredictor;
using projection::Granularity;
using projection::ProjectionContext;

struct Tally {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  Tally& operator+=(const Tally& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Tally&, const Tally&) = default;
};

/// TP / (TP + FP + FN) in percent. An all-zero tally (nothing to predict and
/// nothing predicted) scores 100.
double accuracy_percent(const Tally& t);

struct AccuracyReport {
  std::vector<Tally> per_index;
  Tally total;
  double accuracy = 0.0;  // percent
  Granularity granularity = Granularity::frame;
  int quantization = 0;
  std::string model_id;

  /// Pools another report's tallies into this one.
  void merge(const AccuracyReport& other);

  nlohmann::json to_json() const;
  std::string to_markdown() const;
};

Tally frame_tally(const State& truth, const State& pred);

/// Tallies pooled over all indices, then divided (micro-average).
AccuracyReport accuracy(std::span<const State> truth, std::span<const State> pred);

/// Bernoulli(0.5) on every unit, independent of the context.
class RandomBaseline : public FramePredictor {
 public:
  explicit RandomBaseline(std::size_t dim) : dim_(dim) {}
  std::string id() const override { return "random"; }
  State predict(const ProjectionContext& ctx, ebm::Rng& rng) const override;

 private:
  std::size_t dim_;
};

/// Repeats the most recent past frame (silence when there is none).
class RepeatBaseline : public FramePredictor {
 public:
  explicit RepeatBaseline(std::size_t dim) : dim_(dim) {}
  std::string id() const override { return "repeat"; }
  State predict(const ProjectionContext& ctx, ebm::Rng& rng) const override;

 private:
  std::size_t dim_;
};

State baseline_random(std::size_t dim, ebm::Rng& rng);
State baseline_repeat(const std::vector<State>& past, std::size_t dim);

/// Teacher-forced evaluation of `predictor` over a split, pooled into one report.
AccuracyReport evaluate(const FramePredictor& predictor, std::span<const score::AlignedPair> split,
                        std::size_t horizon, Granularity granularity, std::uint64_t seed);

AccuracyReport evaluate_model(const Model& model, std::span<const score::AlignedPair> split,
                              Granularity granularity, const ebm::SamplingConfig& config);

/// Same split with every piano frame replaced by silence.
std::vector<score::AlignedPair> silence_piano(std::span<const score::AlignedPair> split);

struct CorruptionReport {
  AccuracyReport normal;
  AccuracyReport corrupted;

  /// (normal - corrupted) / normal; 0 when normal accuracy is 0.
  double relative_drop() const;
  nlohmann::json to_json() const;
};

CorruptionReport corrupted_piano_eval(const FramePredictor& predictor, std::span<const score::AlignedPair> split,
                                      std::size_t horizon, Granularity granularity, std::uint64_t seed);
CorruptionReport corrupted_piano_eval(const Model& model, std::span<const score::AlignedPair> split,
                                      Granularity granularity, const ebm::SamplingConfig& config);

struct BiasRow {
  std::string label;  // "frame Q=<q>" or "event"
  Granularity granularity;
  int quantization;
  double accuracy;
};

/// Repeat-baseline accuracy at frame level for each Q, followed by the
/// event-level row (computed at the first Q).
std::vector<BiasRow> bias_report(std::span<const score::ScoreFile> corpus, const score::OrchestraLayout& layout,
                                 std::span<const int> quantizations, std::size_t horizon = 1);

std::string bias_report_markdown(std::span<const BiasRow> rows);

}  // namespace lop::eval
