#include "lop/eval.hpp"

namespace lop::eval {

State baseline_random(std::size_t dim, ebm::Rng& rng) {
  return ebm::sample_bernoulli(ebm::Vec::Constant(static_cast<Eigen::Index>(dim), 0.5), rng);
}

State baseline_repeat(const std::vector<State>& past, std::size_t dim) {
  if (past.empty()) return State::Zero(static_cast<Eigen::Index>(dim));
  return past.back();
}

State RandomBaseline::predict(const ProjectionContext&, ebm::Rng& rng) const { return baseline_random(dim_, rng); }

State RepeatBaseline::predict(const ProjectionContext& ctx, ebm::Rng&) const {
  return baseline_repeat(ctx.orchestral_past, dim_);
}

AccuracyReport evaluate(const FramePredictor& predictor, std::span<const score::AlignedPair> split,
                        std::size_t horizon, Granularity granularity, std::uint64_t seed) {
  if (split.empty()) throw std::invalid_argument("evaluate: empty split");
  ebm::Rng rng(seed);
  AccuracyReport report;
  report.granularity = granularity;
  report.quantization = split.front().orchestra.quantization;
  report.model_id = predictor.id();
  for (const auto& pair : split) {
    for (const auto& tp : projection::make_training_pairs(pair.piano, pair.orchestra, horizon, granularity, true)) {
      report.per_index.push_back(frame_tally(tp.target, predictor.predict(tp.context, rng)));
      report.total += report.per_index.back();
    }
  }
  report.accuracy = accuracy_percent(report.total);
  return report;
}

AccuracyReport evaluate_model(const Model& model, std::span<const score::AlignedPair> split,
                              Granularity granularity, const ebm::SamplingConfig& config) {
  auto mf = config;
  mf.output_mode = ebm::OutputMode::mean_field;
  const projection::ModelPredictor predictor(model, mf);
  auto report = evaluate(predictor, split, static_cast<std::size_t>(model.horizon), granularity, config.seed);
  report.quantization = model.quantization;
  return report;
}

std::vector<score::AlignedPair> silence_piano(std::span<const score::AlignedPair> split) {
  std::vector<score::AlignedPair> out(split.begin(), split.end());
  for (auto& pair : out)
    for (auto& s : pair.piano.states) s.setZero();
  return out;
}

CorruptionReport corrupted_piano_eval(const FramePredictor& predictor, std::span<const score::AlignedPair> split,
                                      std::size_t horizon, Granularity granularity, std::uint64_t seed) {
  const auto corrupted = silence_piano(split);
  return {evaluate(predictor, split, horizon, granularity, seed),
          evaluate(predictor, corrupted, horizon, granularity, seed)};
}

CorruptionReport corrupted_piano_eval(const Model& model, std::span<const score::AlignedPair> split,
                                      Granularity granularity, const ebm::SamplingConfig& config) {
  const auto corrupted = silence_piano(split);
  return {evaluate_model(model, split, granularity, config), evaluate_model(model, corrupted, granularity, config)};
}

std::vector<BiasRow> bias_report(std::span<const score::ScoreFile> corpus, const score::OrchestraLayout& layout,
                                 std::span<const int> quantizations, std::size_t horizon) {
  if (quantizations.empty()) throw std::invalid_argument("bias_report: no quantization given");
  const RepeatBaseline repeat(layout.total_dim());

  auto aligned_at = [&](int q) {
    std::vector<score::AlignedPair> pairs;
    for (const auto& f : corpus) {
      score::ScoreFile rq{f.name, score::requantize(f.piano, q), {}};
      for (const auto& part : f.orchestra) rq.orchestra.push_back(score::requantize(part, q));
      pairs.push_back(score::align_file(rq, layout));
    }
    return pairs;
  };

  std::vector<BiasRow> rows;
  for (int q : quantizations) {
    const auto pairs = aligned_at(q);
    rows.push_back({"frame Q=" + std::to_string(q), Granularity::frame, q,
                    evaluate(repeat, pairs, horizon, Granularity::frame, 0).accuracy});
  }
  const int q0 = quantizations.front();
  rows.push_back({"event", Granularity::event, q0,
                  evaluate(repeat, aligned_at(q0), horizon, Granularity::event, 0).accuracy});
  return rows;
}

}  // namespace lop::eval
