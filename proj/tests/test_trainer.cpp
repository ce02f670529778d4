#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <set>

#include "lop/trainer.hpp"

using namespace lop;
using namespace lop::trainer;

namespace {

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

TrainingConfig small_config(ebm::ModelKind kind) {
  TrainingConfig c;
  c.model_kind = kind;
  c.n_hidden = 16;
  c.n_factors = 8;
  c.horizon = 2;
  c.cd_k = 1;
  c.learning_rate = 0.01;
  c.momentum = 0.9;
  c.batch_size = 20;
  c.max_epochs = 4;
  c.patience = 4;
  return c;
}

std::vector<score::ScoreFile> small_corpus(std::size_t n = 10) {
  SyntheticOptions opt;
  opt.n_files = n;
  opt.length_quarters = 16;
  return generate_synthetic_corpus(opt);
}

}  // namespace

TEST(Config, JsonRoundTripAndStrictness) {
  TrainingConfig c = small_config(ebm::ModelKind::fgcrbm);
  c.training_granularity = Granularity::frame;
  c.shuffle_seed = 77;
  const auto j = c.to_json();
  EXPECT_EQ(j.at("model_kind"), "fgcrbm");
  const auto back = TrainingConfig::from_json(j);
  EXPECT_EQ(back.to_json(), j);

  auto extra = j;
  extra["learning_rat"] = 0.1;
  EXPECT_THROW(TrainingConfig::from_json(extra), std::invalid_argument);

  const auto partial = TrainingConfig::from_json({{"n_hidden", 500}});
  EXPECT_EQ(partial.n_hidden, 500);
  EXPECT_EQ(partial.cd_k, TrainingConfig{}.cd_k);
}

TEST(Config, Validation) {
  TrainingConfig c;
  EXPECT_NO_THROW(c.validate());
  c.patience = c.max_epochs + 1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.n_hidden = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Split, DefaultFractionsAndDeterminism) {
  const auto s = split_corpus(names(10), {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(s.train.size(), 8u);
  EXPECT_EQ(s.validation.size(), 1u);
  EXPECT_EQ(s.test.size(), 1u);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.validation.begin(), s.validation.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 10u);

  auto shuffled = names(10);
  std::reverse(shuffled.begin(), shuffled.end());
  const auto again = split_corpus(shuffled, {0.8, 0.1, 0.1}, 3);
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.test, s.test);
}

TEST(Split, BoundaryAndErrors) {
  Diagnostics diag;
  const auto s = split_corpus(names(5), {1.0, 0.0, 0.0}, 0, &diag);
  EXPECT_EQ(s.train.size(), 5u);
  EXPECT_TRUE(s.validation.empty());
  EXPECT_TRUE(s.test.empty());
  EXPECT_EQ(diag.warnings.size(), 2u);
  EXPECT_THROW(split_corpus(names(2)), std::invalid_argument);
  EXPECT_THROW(split_corpus(names(5), {0.5, 0.1, 0.1}), std::invalid_argument);
}

TEST(Synthetic, RegisterSplitRule) {
  EXPECT_EQ(register_split_rule(55), (std::vector<std::pair<std::string, int>>{{"cello", 55}, {"bassoon", 43}}));
  EXPECT_EQ(register_split_rule(62), (std::vector<std::pair<std::string, int>>{{"violin", 62}, {"flute", 74}}));

  score::PianoRoll piano("piano", {55, 62}, 4, 2);
  piano.set(0, 0, 80);
  piano.set(1, 0, 80);
  const auto parts = orchestrate(RuleSet::register_split, piano);
  std::set<std::pair<std::string, int>> active;
  for (const auto& p : parts)
    for (int pitch : p.pitches())
      if (p.intensity(pitch, 0) > 0) active.insert({p.label(), pitch});
  EXPECT_EQ(active, (std::set<std::pair<std::string, int>>{{"cello", 55}, {"bassoon", 43}, {"violin", 62}, {"flute", 74}}));
  for (const auto& p : parts)
    for (int pitch : p.pitches()) EXPECT_EQ(p.intensity(pitch, 1), 0);
}

TEST(Synthetic, SustainedHornHoldsDownbeatBass) {
  score::PianoRoll piano("piano", synthetic_piano_pitches(), 2, 16);
  auto on = [&](int pitch, std::size_t from, std::size_t to) {
    for (std::size_t t = from; t < to; ++t) piano.set(*piano.row_of(pitch), t, 80);
  };
  on(50, 0, 2);   // downbeat of bar 1
  on(64, 0, 8);
  on(48, 3, 5);   // lower, but not on a downbeat
  on(57, 8, 16);  // downbeat of bar 2
  const auto parts = orchestrate(RuleSet::sustained_chords, piano);
  const auto horn = std::find_if(parts.begin(), parts.end(), [](const auto& p) { return p.label() == "horn"; });
  ASSERT_NE(horn, parts.end());
  for (std::size_t t = 0; t < 8; ++t) EXPECT_GT(horn->intensity(50, t), 0) << t;
  for (std::size_t t = 8; t < 16; ++t) EXPECT_GT(horn->intensity(57, t), 0) << t;
  EXPECT_EQ(horn->intensity(48, 3), 0);
}

TEST(Synthetic, DeterministicSilentAndValidated) {
  SyntheticOptions opt;
  opt.n_files = 3;
  opt.seed = 5;
  const auto a = generate_synthetic_corpus(opt), b = generate_synthetic_corpus(opt);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a[i].piano, b[i].piano);
    EXPECT_EQ(a[i].orchestra, b[i].orchestra);
  }
  opt.density = 0;
  for (const auto& f : generate_synthetic_corpus(opt)) {
    for (std::size_t r = 0; r < f.piano.num_pitches(); ++r) EXPECT_FALSE(f.piano.any_sounding(r));
    for (const auto& p : f.orchestra)
      for (std::size_t r = 0; r < p.num_pitches(); ++r) EXPECT_FALSE(p.any_sounding(r));
  }
  EXPECT_THROW(parse_rule_set("serialism"), std::invalid_argument);
}

TEST(Corpus, DirectoryLoadIsLazyAndLogged) {
  const auto dir = std::filesystem::temp_directory_path() / "lop_trainer_corpus";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  for (const auto& f : small_corpus(3)) score::save_score_file(f, (dir / (f.name + ".json")).string());
  auto c = Corpus::from_directory(dir.string(), 8);
  EXPECT_EQ(c.names(), (std::vector<std::string>{"synth_000", "synth_001", "synth_002"}));
  EXPECT_TRUE(c.access_log().empty());
  EXPECT_EQ(c.load("synth_001").piano.quantization(), 8);
  EXPECT_EQ(c.access_log(), std::vector<std::string>{"synth_001"});
  EXPECT_THROW(c.load("missing"), std::out_of_range);
}

TEST(Train, ZeroEpochsReturnsInitialModel) {
  Corpus corpus(small_corpus());
  const auto split = split_corpus(corpus.names());
  auto cfg = small_config(ebm::ModelKind::crbm);
  cfg.max_epochs = 0;
  const auto r = train(cfg, corpus, split);
  EXPECT_TRUE(r.log.epochs.empty());
  const auto init = ebm::init_gaussian(ebm::ModelKind::crbm, ebm::dims_of(r.model.params), cfg.init_std, cfg.seed);
  EXPECT_EQ(std::get<ebm::CrbmParams>(r.model.params).base.W, std::get<ebm::CrbmParams>(init).base.W);
}

TEST(Train, SelectsBestEpochAndNeverReadsTest) {
  Corpus corpus(small_corpus());
  const auto split = split_corpus(corpus.names());
  auto cfg = small_config(ebm::ModelKind::fgcrbm);
  cfg.max_epochs = 6;
  cfg.patience = 6;
  const auto r = train(cfg, corpus, split);
  ASSERT_FALSE(r.log.epochs.empty());
  double best = -1;
  int best_epoch = -1;
  for (const auto& e : r.log.epochs)
    if (*e.validation_accuracy > best) {
      best = *e.validation_accuracy;
      best_epoch = e.epoch;
    }
  EXPECT_EQ(r.log.best_epoch, best_epoch);
  EXPECT_EQ(*r.log.best_validation_accuracy, best);
  // The kept parameters reproduce the logged validation score.
  std::vector<score::AlignedPair> val;
  for (const auto& n : split.validation) val.push_back(score::align_file(corpus.load(n), r.model.layout));
  ebm::SamplingConfig s;
  s.seed = cfg.shuffle_seed;
  s.gibbs_steps = cfg.validation_gibbs_steps;
  EXPECT_EQ(eval::evaluate_model(r.model, val, Granularity::event, s).accuracy, best);

  for (const auto& t : split.test)
    EXPECT_EQ(std::count(r.log.files_read.begin(), r.log.files_read.end(), t), 0) << t;
}

TEST(Train, EarlyStoppingRespectsPatience) {
  Corpus corpus(small_corpus());
  const auto split = split_corpus(corpus.names());
  auto cfg = small_config(ebm::ModelKind::crbm);
  cfg.learning_rate = 0;
  cfg.max_epochs = 20;
  cfg.patience = 2;
  const auto r = train(cfg, corpus, split);
  EXPECT_EQ(r.log.epochs.size(), 3u);
  EXPECT_EQ(r.log.best_epoch, 1);
}

TEST(Train, RunsAreDeterministic) {
  for (auto kind : {ebm::ModelKind::rbm, ebm::ModelKind::crbm, ebm::ModelKind::fgcrbm}) {
    const auto cfg = small_config(kind);
    Corpus c1(small_corpus()), c2(small_corpus());
    const auto split = split_corpus(c1.names());
    const auto a = train(cfg, c1, split), b = train(cfg, c2, split);
    EXPECT_EQ(a.log.to_json(), b.log.to_json());
    EXPECT_EQ(serialize_model(a.model), serialize_model(b.model));
  }
}

TEST(Train, DivergenceReportsEpoch) {
  Corpus corpus(small_corpus());
  const auto split = split_corpus(corpus.names());
  auto cfg = small_config(ebm::ModelKind::crbm);
  cfg.learning_rate = 1e300;
  try {
    train(cfg, corpus, split);
    FAIL() << "expected divergence";
  } catch (const ebm::TrainingDivergence& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos) << e.what();
  }
}
