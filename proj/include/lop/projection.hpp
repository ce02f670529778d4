#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "lop/ebm.hpp"
#include "lop/model_io.hpp"
#include "lop/score_io.hpp"

namespace lop::projection {

using score::StateSequence;

enum class Granularity { frame, event };

std::string_view to_string(Granularity g);
Granularity parse_granularity(std::string_view name);

/// Conditioning bundle for one prediction: the present piano frame and the N
/// preceding orchestra frames, oldest first.
struct ProjectionContext {
  State piano_now;
  std::vector<State> orchestral_past;

  std::size_t horizon() const { return orchestral_past.size(); }
};

/// Maps (piano-now, orchestral-past, orchestra-now) onto a model's units:
///   rbm    v = [P(t), O(t-N) .. O(t)]
///   crbm   v = O(t), x = [P(t), O(t-N) .. O(t-1)]
///   fgcrbm v = O(t), x = [O(t-N) .. O(t-1)], z = P(t)
class ModelBinding {
 public:
  ModelBinding(ebm::ModelKind kind, std::size_t orchestra_dim, std::size_t horizon);

  ebm::ModelKind kind() const { return kind_; }
  std::size_t orchestra_dim() const { return orchestra_dim_; }
  std::size_t horizon() const { return horizon_; }

  /// n_v, n_x and n_z implied by the wiring; hidden and factor counts are left 0.
  ebm::Dims unit_dims() const;

  /// Throws DimensionError unless `params` has exactly the wired shapes.
  void check(const ebm::ModelParams& params) const;

  ebm::Sample training_sample(const State& target, const ProjectionContext& ctx) const;
  ebm::Context generation_context(const ProjectionContext& ctx) const;

 private:
  void check_context(const ProjectionContext& ctx) const;

  ebm::ModelKind kind_;
  std::size_t orchestra_dim_;
  std::size_t horizon_;
};

struct TrainingPair {
  std::size_t time;
  State target;
  ProjectionContext context;
};

/// One (target, context) pair per evaluation index. Frame granularity uses
/// every t >= N (every t when `pad_preroll`, with silence before the start);
/// event granularity uses each orchestra event, with the past taken from the
/// N preceding events.
std::vector<TrainingPair> make_training_pairs(const StateSequence& piano, const StateSequence& orchestra,
                                              std::size_t horizon, Granularity granularity,
                                              bool pad_preroll = true);

/// Anything that predicts O(t) from a projection context.
class FramePredictor {
 public:
  virtual ~FramePredictor() = default;
  virtual std::string id() const = 0;
  virtual State predict(const ProjectionContext& ctx, ebm::Rng& rng) const = 0;
};

/// Clamped generation from a trained model; binary output (thresholded
/// mean-field, or the final sample in sample mode).
class ModelPredictor : public FramePredictor {
 public:
  ModelPredictor(const Model& model, ebm::SamplingConfig config, std::string id = {});

  std::string id() const override { return id_; }
  State predict(const ProjectionContext& ctx, ebm::Rng& rng) const override;

  const ModelBinding& binding() const { return binding_; }

 private:
  const Model& model_;
  ebm::SamplingConfig config_;
  ModelBinding binding_;
  std::string id_;
};

struct Prediction {
  std::size_t time;
  State state;
};

/// Predictions conditioned on the ground-truth orchestral past at each
/// evaluation index of `granularity`. Randomness comes from one generator
/// seeded with `seed`.
std::vector<Prediction> teacher_forced_predict(const FramePredictor& predictor, const StateSequence& piano,
                                               const StateSequence& orchestra, std::size_t horizon,
                                               Granularity granularity, std::uint64_t seed);

/// Model form: mean-field generation thresholded at config.threshold.
std::vector<Prediction> teacher_forced_predict(const Model& model, const StateSequence& piano,
                                               const StateSequence& orchestra,
                                               const ebm::SamplingConfig& config, Granularity granularity);

/// Closed-loop orchestration of a whole piano score: the past is built from
/// previously generated frames, starting from silence. Frame granularity
/// generates at every frame; event granularity generates only where the piano
/// changes and holds the frame otherwise.
StateSequence project_score(const Model& model, const StateSequence& piano, const ebm::SamplingConfig& config,
                            Granularity granularity = Granularity::frame);

}  // namespace lop::projection
