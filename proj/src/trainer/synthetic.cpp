#include "lop/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lop::trainer {
namespace {

constexpr int kSplitPoint = 60;
constexpr int kLowestPianoPitch = 48;
constexpr int kHighestPianoPitch = 71;
constexpr int kIntensity = score::kDefaultIntensity;

std::vector<int> span_of(int lo, int hi) {
  std::vector<int> v(static_cast<std::size_t>(hi - lo + 1));
  std::iota(v.begin(), v.end(), lo);
  return v;
}

struct PartSpec {
  const char* name;
  int lowest;
  int highest;
};

// Declared instrument ranges; the layout later trims them to what is played.
constexpr PartSpec kViolin{"violin", 55, 103};
constexpr PartSpec kFlute{"flute", 60, 96};
constexpr PartSpec kCello{"cello", 36, 76};
constexpr PartSpec kBassoon{"bassoon", 34, 75};
constexpr PartSpec kHorn{"horn", 34, 77};

std::vector<PartSpec> parts_for(RuleSet rules) {
  std::vector<PartSpec> parts{kViolin, kFlute, kCello, kBassoon};
  if (rules == RuleSet::sustained_chords) parts.push_back(kHorn);
  return parts;
}

}  // namespace

std::string_view to_string(RuleSet rules) {
  return rules == RuleSet::register_split ? "register-split" : "sustained-chords";
}

RuleSet parse_rule_set(std::string_view name) {
  if (name == "register-split") return RuleSet::register_split;
  if (name == "sustained-chords") return RuleSet::sustained_chords;
  throw std::invalid_argument("unknown rule set '" + std::string(name) + "'");
}

std::vector<int> synthetic_piano_pitches() { return span_of(kLowestPianoPitch, kHighestPianoPitch); }

std::vector<std::pair<std::string, int>> register_split_rule(int piano_pitch) {
  if (piano_pitch < kSplitPoint) return {{"cello", piano_pitch}, {"bassoon", piano_pitch - 12}};
  return {{"violin", piano_pitch}, {"flute", piano_pitch + 12}};
}

std::vector<score::PianoRoll> orchestrate(RuleSet rules, const score::PianoRoll& piano) {
  const auto specs = parts_for(rules);
  std::vector<score::PianoRoll> parts;
  for (const auto& s : specs)
    parts.emplace_back(s.name, span_of(s.lowest, s.highest), piano.quantization(), piano.num_frames());
  auto part = [&](const std::string& name) -> score::PianoRoll& {
    for (auto& p : parts)
      if (p.label() == name) return p;
    throw std::logic_error("rule names unknown part " + name);
  };
  auto write = [&](const std::string& name, int pitch, std::size_t t) {
    auto& roll = part(name);
    auto row = roll.row_of(pitch);
    if (!row) throw std::logic_error("rule pitch " + std::to_string(pitch) + " outside " + name + " range");
    roll.set(*row, t, kIntensity);
  };

  const std::size_t bar = 4 * static_cast<std::size_t>(piano.quantization());
  std::optional<int> held;
  for (std::size_t t = 0; t < piano.num_frames(); ++t) {
    std::optional<int> lowest;
    for (std::size_t r = 0; r < piano.num_pitches(); ++r) {
      if (piano.at(r, t) == 0) continue;
      const int p = piano.pitches()[r];
      if (!lowest) lowest = p;
      for (const auto& [name, pitch] : register_split_rule(p)) write(name, pitch, t);
    }
    if (rules == RuleSet::sustained_chords) {
      if (t % bar == 0) held = lowest;
      if (held) write("horn", *held, t);
    }
  }
  return parts;
}

std::vector<score::ScoreFile> generate_synthetic_corpus(const SyntheticOptions& options) {
  if (options.quantization < 1) throw std::invalid_argument("quantization must be >= 1");
  if (options.density < 0) throw std::invalid_argument("density must be >= 0");
  if (options.min_duration_quarters.empty()) throw std::invalid_argument("no chord durations given");
  const auto pool = synthetic_piano_pitches();
  const auto q = static_cast<std::size_t>(options.quantization);

  ebm::Rng rng(options.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_duration(0, options.min_duration_quarters.size() - 1);
  std::uniform_int_distribution<int> velocity(30, 110);
  const double whole = std::floor(options.density);
  const double frac = options.density - whole;

  auto draw_chord = [&] {
    std::size_t k = static_cast<std::size_t>(whole) + (unif(rng) < frac ? 1 : 0);
    k = std::min(k, pool.size());
    std::vector<int> chord = pool;
    std::shuffle(chord.begin(), chord.end(), rng);
    chord.resize(k);
    std::sort(chord.begin(), chord.end());
    return chord;
  };

  std::vector<score::ScoreFile> corpus;
  for (std::size_t n = 0; n < options.n_files; ++n) {
    score::PianoRoll piano("piano", pool, options.quantization, options.length_quarters * q);
    std::vector<int> previous{-1};
    std::size_t quarter = 0;
    while (quarter < options.length_quarters) {
      const auto duration = static_cast<std::size_t>(options.min_duration_quarters[pick_duration(rng)]);
      std::vector<int> chord = draw_chord();
      for (int tries = 0; tries < 8 && chord == previous && options.density > 0; ++tries) chord = draw_chord();
      const std::size_t end = std::min(options.length_quarters, quarter + duration);
      for (int p : chord) {
        const auto row = *piano.row_of(p);
        const int vel = velocity(rng);
        for (std::size_t t = quarter * q; t < end * q; ++t) piano.set(row, t, vel);
      }
      previous = std::move(chord);
      quarter = end;
    }
    score::ScoreFile file;
    char name[32];
    std::snprintf(name, sizeof name, "synth_%03zu", n);
    file.name = name;
    file.orchestra = orchestrate(options.rules, piano);
    file.piano = std::move(piano);
    corpus.push_back(std::move(file));
  }
  return corpus;
}

}  // namespace lop::trainer
