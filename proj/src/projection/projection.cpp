#include "lop/projection.hpp"

#include <deque>

namespace lop::projection {

std::string_view to_string(Granularity g) { return g == Granularity::frame ? "frame" : "event"; }

Granularity parse_granularity(std::string_view name) {
  if (name == "frame") return Granularity::frame;
  if (name == "event") return Granularity::event;
  throw std::invalid_argument("unknown granularity '" + std::string(name) + "'");
}

ModelBinding::ModelBinding(ebm::ModelKind kind, std::size_t orchestra_dim, std::size_t horizon)
    : kind_(kind), orchestra_dim_(orchestra_dim), horizon_(horizon) {
  if (horizon_ < 1) throw std::invalid_argument("horizon N must be >= 1");
}

ebm::Dims ModelBinding::unit_dims() const {
  const auto D = static_cast<Eigen::Index>(orchestra_dim_);
  const auto N = static_cast<Eigen::Index>(horizon_);
  const auto P = static_cast<Eigen::Index>(score::kPianoKeys);
  ebm::Dims d;
  switch (kind_) {
    case ebm::ModelKind::rbm:
      d.n_v = P + (N + 1) * D;
      break;
    case ebm::ModelKind::crbm:
      d.n_v = D;
      d.n_x = P + N * D;
      break;
    case ebm::ModelKind::fgcrbm:
      d.n_v = D;
      d.n_x = N * D;
      d.n_z = P;
      break;
  }
  return d;
}

void ModelBinding::check(const ebm::ModelParams& params) const {
  if (ebm::kind_of(params) != kind_) throw ebm::DimensionError("model kind does not match binding");
  const auto want = unit_dims();
  const auto got = ebm::dims_of(params);
  if (got.n_v != want.n_v || got.n_x != want.n_x || got.n_z != want.n_z)
    throw ebm::DimensionError("model units (n_v=" + std::to_string(got.n_v) + ", n_x=" + std::to_string(got.n_x) +
                              ", n_z=" + std::to_string(got.n_z) + ") do not match wiring (n_v=" +
                              std::to_string(want.n_v) + ", n_x=" + std::to_string(want.n_x) +
                              ", n_z=" + std::to_string(want.n_z) + ")");
}

void ModelBinding::check_context(const ProjectionContext& ctx) const {
  if (static_cast<std::size_t>(ctx.piano_now.size()) != score::kPianoKeys)
    throw ebm::DimensionError("piano frame must have 88 entries, got " + std::to_string(ctx.piano_now.size()));
  if (ctx.orchestral_past.size() != horizon_)
    throw ebm::DimensionError("orchestral past holds " + std::to_string(ctx.orchestral_past.size()) +
                              " frames, horizon is " + std::to_string(horizon_));
  for (const auto& f : ctx.orchestral_past)
    if (static_cast<std::size_t>(f.size()) != orchestra_dim_)
      throw ebm::DimensionError("orchestra frame has dimension " + std::to_string(f.size()) + ", layout has " +
                                std::to_string(orchestra_dim_));
}

namespace {

ebm::Vec concat_past(const ProjectionContext& ctx, std::size_t dim, std::size_t lead) {
  ebm::Vec out(static_cast<Eigen::Index>(lead + ctx.orchestral_past.size() * dim));
  Eigen::Index pos = static_cast<Eigen::Index>(lead);
  for (const auto& f : ctx.orchestral_past) {
    out.segment(pos, f.size()) = f;
    pos += f.size();
  }
  return out;
}

}  // namespace

ebm::Context ModelBinding::generation_context(const ProjectionContext& ctx) const {
  check_context(ctx);
  ebm::Context out;
  switch (kind_) {
    case ebm::ModelKind::rbm:
    case ebm::ModelKind::crbm:
      out.x = concat_past(ctx, orchestra_dim_, score::kPianoKeys);
      out.x.head(score::kPianoKeys) = ctx.piano_now;
      break;
    case ebm::ModelKind::fgcrbm:
      out.x = concat_past(ctx, orchestra_dim_, 0);
      out.z = ctx.piano_now;
      break;
  }
  return out;
}

ebm::Sample ModelBinding::training_sample(const State& target, const ProjectionContext& ctx) const {
  if (static_cast<std::size_t>(target.size()) != orchestra_dim_)
    throw ebm::DimensionError("target has dimension " + std::to_string(target.size()) + ", layout has " +
                              std::to_string(orchestra_dim_));
  ebm::Context c = generation_context(ctx);
  if (kind_ != ebm::ModelKind::rbm) return {target, std::move(c)};
  ebm::Vec v(c.x.size() + target.size());
  v << c.x, target;
  return {std::move(v), {}};
}

std::vector<TrainingPair> make_training_pairs(const StateSequence& piano, const StateSequence& orchestra,
                                              std::size_t horizon, Granularity granularity,
                                              bool pad_preroll) {
  if (horizon < 1) throw std::invalid_argument("horizon N must be >= 1");
  if (piano.size() != orchestra.size())
    throw AlignmentError("piano and orchestra sequences differ in length (" + std::to_string(piano.size()) +
                         " vs " + std::to_string(orchestra.size()) + ")");
  std::vector<TrainingPair> pairs;
  if (orchestra.empty()) return pairs;
  const State silence = State::Zero(static_cast<Eigen::Index>(orchestra.dim()));

  if (granularity == Granularity::frame) {
    for (std::size_t t = pad_preroll ? 0 : horizon; t < orchestra.size(); ++t) {
      ProjectionContext ctx{piano.states[t], {}};
      for (std::size_t k = horizon; k >= 1; --k)
        ctx.orchestral_past.push_back(t >= k ? orchestra.states[t - k] : silence);
      pairs.push_back({t, orchestra.states[t], std::move(ctx)});
    }
    return pairs;
  }

  const auto events = score::extract_events(orchestra, true);
  for (std::size_t e = 0; e < events.size(); ++e) {
    const std::size_t t = events.times[e];
    ProjectionContext ctx{piano.states[t], {}};
    for (std::size_t k = horizon; k >= 1; --k) ctx.orchestral_past.push_back(e >= k ? events.states[e - k] : silence);
    pairs.push_back({t, events.states[e], std::move(ctx)});
  }
  return pairs;
}

ModelPredictor::ModelPredictor(const Model& model, ebm::SamplingConfig config, std::string id)
    : model_(model),
      config_(config),
      binding_(model.kind(), model.layout.total_dim(), static_cast<std::size_t>(model.horizon)),
      id_(id.empty() ? std::string(ebm::to_string(model.kind())) : std::move(id)) {
  config_.validate();
  binding_.check(model.params);
}

State ModelPredictor::predict(const ProjectionContext& ctx, ebm::Rng& rng) const {
  const auto out = ebm::generate_clamped(model_.params, binding_.generation_context(ctx), config_, rng);
  if (config_.output_mode == ebm::OutputMode::sample) return out;
  return ebm::binarize(out, config_.threshold);
}

std::vector<Prediction> teacher_forced_predict(const FramePredictor& predictor, const StateSequence& piano,
                                               const StateSequence& orchestra, std::size_t horizon,
                                               Granularity granularity, std::uint64_t seed) {
  ebm::Rng rng(seed);
  std::vector<Prediction> out;
  for (auto& pair : make_training_pairs(piano, orchestra, horizon, granularity, true))
    out.push_back({pair.time, predictor.predict(pair.context, rng)});
  return out;
}

std::vector<Prediction> teacher_forced_predict(const Model& model, const StateSequence& piano,
                                               const StateSequence& orchestra,
                                               const ebm::SamplingConfig& config, Granularity granularity) {
  auto mf = config;
  mf.output_mode = ebm::OutputMode::mean_field;
  const ModelPredictor predictor(model, mf);
  return teacher_forced_predict(predictor, piano, orchestra, static_cast<std::size_t>(model.horizon),
                                granularity, config.seed);
}

StateSequence project_score(const Model& model, const StateSequence& piano, const ebm::SamplingConfig& config,
                            Granularity granularity) {
  const ModelPredictor predictor(model, config);
  const std::size_t D = model.layout.total_dim();
  StateSequence out;
  out.quantization = piano.quantization;
  if (piano.empty()) return out;
  if (piano.dim() != score::kPianoKeys)
    throw ebm::DimensionError("piano sequence must have 88 keys, got " + std::to_string(piano.dim()));

  ebm::Rng rng(config.seed);
  std::deque<State> past(static_cast<std::size_t>(model.horizon), State::Zero(static_cast<Eigen::Index>(D)));
  for (std::size_t t = 0; t < piano.size(); ++t) {
    const bool regenerate =
        granularity == Granularity::frame || t == 0 || piano.states[t] != piano.states[t - 1];
    if (!regenerate) {
      out.states.push_back(out.states.back());
      continue;
    }
    ProjectionContext ctx{piano.states[t], {past.begin(), past.end()}};
    State frame = predictor.predict(ctx, rng);
    // Event-level pasts hold consecutive distinct states, as in training.
    if (granularity == Granularity::frame || frame != past.back()) {
      past.pop_front();
      past.push_back(frame);
    }
    out.states.push_back(std::move(frame));
  }
  return out;
}

}  // namespace lop::projection
