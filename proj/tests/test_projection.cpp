#include <gtest/gtest.h>

#include <random>

#include "lop/projection.hpp"
#include "lop/trainer.hpp"
#include "oracles.hpp"

using namespace lop;
using namespace lop::projection;
using ebm::ModelKind;

namespace {

score::StateSequence random_seq(std::size_t len, Eigen::Index dim, std::uint64_t seed, double density = 0.2) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(density);
  score::StateSequence s;
  for (std::size_t t = 0; t < len; ++t) {
    State st(dim);
    for (Eigen::Index i = 0; i < dim; ++i) st[i] = b(rng);
    s.states.push_back(st);
  }
  return s;
}

score::OrchestraLayout flat_layout(std::size_t D) {
  score::LayoutPart part{"ensemble", {}, {}};
  for (std::size_t i = 0; i < D; ++i) part.range.push_back(40 + static_cast<int>(i));
  part.kept = part.range;
  return score::OrchestraLayout({part});
}

/// cRBM whose orchestra unit i copies piano key `keys[i]`, saturated.
Model copy_piano_model(const std::vector<int>& keys, int horizon) {
  const std::size_t D = keys.size();
  ModelBinding binding(ModelKind::crbm, D, static_cast<std::size_t>(horizon));
  auto d = binding.unit_dims();
  d.n_h = 1;
  auto c = std::get<ebm::CrbmParams>(ebm::zeros(ModelKind::crbm, d));
  for (std::size_t i = 0; i < D; ++i) {
    c.base.a[static_cast<Eigen::Index>(i)] = -10;
    c.A(keys[i] - score::kPianoLowest, static_cast<Eigen::Index>(i)) = 20;
  }
  Model m;
  m.params = c;
  m.layout = flat_layout(D);
  m.horizon = horizon;
  return m;
}

}  // namespace

TEST(Binding, WiringDimensionsForEveryKind) {
  for (std::size_t D : {1u, 48u}) {
    for (std::size_t N : {1u, 4u}) {
      auto r = ModelBinding(ModelKind::rbm, D, N).unit_dims();
      EXPECT_EQ(r.n_v, static_cast<Eigen::Index>(88 + (N + 1) * D));
      auto c = ModelBinding(ModelKind::crbm, D, N).unit_dims();
      EXPECT_EQ(c.n_v, static_cast<Eigen::Index>(D));
      EXPECT_EQ(c.n_x, static_cast<Eigen::Index>(88 + N * D));
      auto f = ModelBinding(ModelKind::fgcrbm, D, N).unit_dims();
      EXPECT_EQ(f.n_v, static_cast<Eigen::Index>(D));
      EXPECT_EQ(f.n_x, static_cast<Eigen::Index>(N * D));
      EXPECT_EQ(f.n_z, 88);
    }
  }
}

TEST(Binding, SamplesFollowTheWiring) {
  const std::size_t D = 3, N = 2;
  const auto piano = random_seq(1, 88, 1, 0.3).states[0];
  const auto past = random_seq(2, 3, 2, 0.5).states;
  const State target = (State(3) << 1, 0, 1).finished();
  const ProjectionContext ctx{piano, past};

  const auto rs = ModelBinding(ModelKind::rbm, D, N).training_sample(target, ctx);
  EXPECT_EQ(rs.v.head(88), piano);
  EXPECT_EQ(rs.v.segment(88, 3), past[0]);
  EXPECT_EQ(rs.v.segment(91, 3), past[1]);
  EXPECT_EQ(rs.v.tail(3), target);
  const auto rc = ModelBinding(ModelKind::rbm, D, N).generation_context(ctx);
  EXPECT_EQ(rc.x, rs.v.head(94));

  const auto cs = ModelBinding(ModelKind::crbm, D, N).training_sample(target, ctx);
  EXPECT_EQ(cs.v, target);
  EXPECT_EQ(cs.ctx.x.head(88), piano);
  EXPECT_EQ(cs.ctx.x.tail(6).head(3), past[0]);

  const auto fs = ModelBinding(ModelKind::fgcrbm, D, N).training_sample(target, ctx);
  EXPECT_EQ(fs.ctx.z, piano);
  EXPECT_EQ(fs.ctx.x.head(3), past[0]);
  EXPECT_EQ(fs.ctx.x.tail(3), past[1]);

  EXPECT_THROW(ModelBinding(ModelKind::crbm, D, N).training_sample(target, {piano, {past[0]}}), ebm::DimensionError);
  auto wrong = ebm::zeros(ModelKind::crbm, ebm::Dims{3, 2, 10});
  EXPECT_THROW(ModelBinding(ModelKind::crbm, D, N).check(wrong), ebm::DimensionError);
}

TEST(Pairs, FrameCountsWithAndWithoutPadding) {
  const auto piano = random_seq(5, 88, 3), orch = random_seq(5, 4, 4);
  EXPECT_EQ(make_training_pairs(piano, orch, 2, Granularity::frame, false).size(), 3u);
  const auto padded = make_training_pairs(piano, orch, 2, Granularity::frame, true);
  ASSERT_EQ(padded.size(), 5u);
  EXPECT_TRUE(padded[0].context.orchestral_past[0].isZero());
  EXPECT_TRUE(padded[0].context.orchestral_past[1].isZero());
  EXPECT_TRUE(padded[1].context.orchestral_past[0].isZero());
  EXPECT_EQ(padded[1].context.orchestral_past[1], orch.states[0]);
  EXPECT_EQ(padded[4].context.orchestral_past[0], orch.states[2]);
  EXPECT_TRUE(make_training_pairs({}, {}, 2, Granularity::frame).empty());
}

TEST(Pairs, EventGranularity) {
  const auto piano = random_seq(6, 88, 5);
  score::StateSequence constant;
  constant.states.assign(6, (State(2) << 1, 0).finished());
  EXPECT_EQ(make_training_pairs(piano, constant, 2, Granularity::event).size(), 1u);

  const auto orch = random_seq(40, 3, 6, 0.3);
  const auto events = score::extract_events(orch);
  const auto pairs = make_training_pairs(random_seq(40, 88, 7), orch, 2, Granularity::event);
  ASSERT_EQ(pairs.size(), events.size());
  for (std::size_t e = 2; e < pairs.size(); ++e) {
    EXPECT_EQ(pairs[e].time, events.times[e]);
    EXPECT_EQ(pairs[e].context.orchestral_past[0], events.states[e - 2]);
    EXPECT_EQ(pairs[e].context.orchestral_past[1], events.states[e - 1]);
  }
}

TEST(Pairs, SyntheticTargetsFollowTheRule) {
  trainer::SyntheticOptions opt;
  opt.n_files = 2;
  const auto files = trainer::generate_synthetic_corpus(opt);
  std::vector<std::vector<score::PianoRoll>> orchs;
  for (const auto& f : files) orchs.push_back(f.orchestra);
  const auto layout = score::build_layout(orchs);
  for (const auto& f : files) {
    const auto pair = score::align_file(f, layout);
    for (const auto& tp : make_training_pairs(pair.piano, pair.orchestra, 4, Granularity::event)) {
      State expected = State::Zero(static_cast<Eigen::Index>(layout.total_dim()));
      for (int p = score::kPianoLowest; p <= score::kPianoHighest; ++p)
        if (tp.context.piano_now[p - score::kPianoLowest] > 0)
          for (auto& [name, pitch] : trainer::register_split_rule(p))
            expected[static_cast<Eigen::Index>(*layout.index_of(*layout.part_index(name), pitch))] = 1;
      EXPECT_EQ(tp.target, expected);
    }
  }
}

TEST(Projection, CopyPianoModelTeacherForced) {
  const std::vector<int> keys{48, 55, 60, 67};
  const auto model = copy_piano_model(keys, 2);
  const auto piano = random_seq(30, 88, 8, 0.5);
  const auto orch = random_seq(30, 4, 9);
  ebm::SamplingConfig cfg;
  cfg.seed = 5;
  const auto preds = teacher_forced_predict(model, piano, orch, cfg, Granularity::frame);
  ASSERT_EQ(preds.size(), 30u);
  for (const auto& p : preds)
    for (std::size_t i = 0; i < keys.size(); ++i)
      EXPECT_EQ(p.state[static_cast<Eigen::Index>(i)], piano.states[p.time][keys[i] - score::kPianoLowest]);

  cfg.threshold = 1.0;
  for (const auto& p : teacher_forced_predict(model, piano, orch, cfg, Granularity::frame)) EXPECT_TRUE(p.state.isZero());
}

TEST(Projection, SeededRunsAreIdentical) {
  Model m;
  m.params = ebm::init_gaussian(ModelKind::fgcrbm, {5, 8, 10, 88, 4, 4, 4}, 1.0, 3);
  m.layout = flat_layout(5);
  m.horizon = 2;
  const auto piano = random_seq(20, 88, 10, 0.1), orch = random_seq(20, 5, 11);
  ebm::SamplingConfig cfg;
  cfg.seed = 8;
  const auto a = teacher_forced_predict(m, piano, orch, cfg, Granularity::event);
  const auto b = teacher_forced_predict(m, piano, orch, cfg, Granularity::event);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].state, b[i].state);
  cfg.output_mode = ebm::OutputMode::sample;
  EXPECT_EQ(project_score(m, piano, cfg).states, project_score(m, piano, cfg).states);
}

TEST(Projection, ClosedLoopMatchesTeacherForcedOnLengthOne) {
  for (auto kind : {ModelKind::rbm, ModelKind::crbm, ModelKind::fgcrbm}) {
    Model m;
    ModelBinding binding(kind, 5, 3);
    auto d = binding.unit_dims();
    d.n_h = 6;
    if (kind == ModelKind::fgcrbm) d.n_f = d.n_fa = d.n_fb = 3;
    m.params = ebm::init_gaussian(kind, d, 1.0, 12);
    m.layout = flat_layout(5);
    m.horizon = 3;
    const auto piano = random_seq(1, 88, 13, 0.2), orch = random_seq(1, 5, 14);
    ebm::SamplingConfig cfg;
    cfg.seed = 21;
    const auto closed = project_score(m, piano, cfg);
    const auto forced = teacher_forced_predict(m, piano, orch, cfg, Granularity::frame);
    ASSERT_EQ(closed.size(), 1u);
    EXPECT_EQ(closed.states[0], forced[0].state);
  }
}

TEST(Projection, EmptyAndMismatchedInputs) {
  const auto model = copy_piano_model({60}, 1);
  EXPECT_TRUE(project_score(model, {}, {}).empty());
  EXPECT_THROW(project_score(model, random_seq(3, 10, 1), {}), ebm::DimensionError);
}

TEST(Projection, EventModeHoldsFramesBetweenPianoChanges) {
  const auto model = copy_piano_model({60, 64}, 2);
  score::StateSequence piano;
  State a = State::Zero(88), b = State::Zero(88);
  a[60 - 21] = 1;
  b[64 - 21] = 1;
  piano.states = {a, a, a, b, b, a};
  const auto out = project_score(model, piano, {}, Granularity::event);
  ASSERT_EQ(out.size(), 6u);
  EXPECT_EQ(out.states[0], (State(2) << 1, 0).finished());
  EXPECT_EQ(out.states[2], out.states[0]);
  EXPECT_EQ(out.states[3], (State(2) << 0, 1).finished());
  EXPECT_EQ(out.states[5], out.states[0]);
}
