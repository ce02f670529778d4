#include "lop/score_io.hpp"

#include <algorithm>

namespace lop::score {

PianoRoll::PianoRoll(std::string label, std::vector<int> pitches, int quantization,
                     std::size_t num_frames)
    : label_(std::move(label)),
      pitches_(std::move(pitches)),
      quantization_(quantization),
      num_frames_(num_frames),
      data_(pitches_.size() * num_frames, 0) {
  if (quantization_ < 1) throw std::invalid_argument("quantization must be >= 1");
  for (std::size_t i = 0; i < pitches_.size(); ++i) {
    if (pitches_[i] < 0 || pitches_[i] > 127)
      throw std::invalid_argument("pitch out of MIDI range: " + std::to_string(pitches_[i]));
    if (i > 0 && pitches_[i] <= pitches_[i - 1])
      throw std::invalid_argument("pitches must be strictly increasing");
  }
}

std::optional<std::size_t> PianoRoll::row_of(int pitch) const {
  auto it = std::lower_bound(pitches_.begin(), pitches_.end(), pitch);
  if (it == pitches_.end() || *it != pitch) return std::nullopt;
  return static_cast<std::size_t>(it - pitches_.begin());
}

void PianoRoll::set(std::size_t row, std::size_t frame, int intensity) {
  data_.at(row * num_frames_ + frame) = static_cast<std::uint8_t>(std::clamp(intensity, 0, 127));
}

int PianoRoll::intensity(int pitch, std::size_t frame) const {
  auto row = row_of(pitch);
  return row ? at(*row, frame) : 0;
}

void PianoRoll::resize_frames(std::size_t num_frames) {
  if (num_frames == num_frames_) return;
  std::vector<std::uint8_t> data(pitches_.size() * num_frames, 0);
  const std::size_t keep = std::min(num_frames, num_frames_);
  for (std::size_t r = 0; r < pitches_.size(); ++r)
    std::copy_n(data_.begin() + r * num_frames_, keep, data.begin() + r * num_frames);
  data_ = std::move(data);
  num_frames_ = num_frames;
}

bool PianoRoll::any_sounding(std::size_t row) const {
  auto first = data_.begin() + row * num_frames_;
  return std::any_of(first, first + num_frames_, [](std::uint8_t v) { return v > 0; });
}

PianoRoll requantize(const PianoRoll& roll, int quantization) {
  if (quantization < 1) throw std::invalid_argument("quantization must be >= 1");
  const int src_q = roll.quantization();
  if (src_q == quantization) return roll;
  // Length in quarters is preserved, rounding up partial quarters.
  const std::size_t frames =
      (roll.num_frames() * quantization + static_cast<std::size_t>(src_q) - 1) / src_q;
  PianoRoll out(roll.label(), roll.pitches(), quantization, frames);
  for (std::size_t r = 0; r < roll.num_pitches(); ++r)
    for (std::size_t t = 0; t < frames; ++t) {
      const std::size_t src = t * src_q / quantization;
      if (src < roll.num_frames()) out.set(r, t, roll.at(r, src));
    }
  return out;
}

State piano_frame_from_pitches(std::span<const int> pitches, Diagnostics* diag) {
  State s = State::Zero(kPianoKeys);
  for (int p : pitches) {
    if (p < kPianoLowest || p > kPianoHighest) {
      if (diag) diag->warn("piano pitch " + std::to_string(p) + " outside 88-key range, ignored");
      continue;
    }
    s[p - kPianoLowest] = 1.0;
  }
  return s;
}

StateSequence piano_states(const PianoRoll& piano, Diagnostics* diag) {
  StateSequence seq;
  seq.quantization = piano.quantization();
  seq.states.assign(piano.num_frames(), State::Zero(kPianoKeys));
  for (std::size_t r = 0; r < piano.num_pitches(); ++r) {
    const int p = piano.pitches()[r];
    const bool in_range = p >= kPianoLowest && p <= kPianoHighest;
    if (!in_range) {
      if (diag && piano.any_sounding(r))
        diag->warn("piano pitch " + std::to_string(p) + " outside 88-key range, clipped");
      continue;
    }
    for (std::size_t t = 0; t < piano.num_frames(); ++t)
      if (piano.at(r, t) > 0) seq.states[t][p - kPianoLowest] = 1.0;
  }
  return seq;
}

StateSequence orchestra_states(std::span<const PianoRoll> orchestra, const OrchestraLayout& layout,
                               Diagnostics* diag) {
  std::size_t frames = 0;
  int q = 0;
  for (const auto& part : orchestra) {
    frames = std::max(frames, part.num_frames());
    if (q == 0) q = part.quantization();
    else if (q != part.quantization())
      throw AlignmentError("orchestra parts use different quantizations");
  }
  StateSequence seq;
  seq.quantization = q == 0 ? 1 : q;
  seq.states.assign(frames, State::Zero(layout.total_dim()));
  for (const auto& part : orchestra) {
    auto pi = layout.part_index(part.label());
    if (!pi) {
      if (diag) diag->warn("part '" + part.label() + "' not in layout, ignored");
      continue;
    }
    std::size_t dropped = 0;
    for (std::size_t r = 0; r < part.num_pitches(); ++r) {
      auto idx = layout.index_of(*pi, part.pitches()[r]);
      for (std::size_t t = 0; t < part.num_frames(); ++t) {
        if (part.at(r, t) == 0) continue;
        if (idx) seq.states[t][*idx] = 1.0;
        else ++dropped;
      }
    }
    if (dropped > 0 && diag)
      diag->warn("part '" + part.label() + "': " + std::to_string(dropped) +
                 " note-frames on pitches outside the layout were dropped");
  }
  return seq;
}

std::pair<StateSequence, StateSequence> align_pair(const PianoRoll& piano,
                                                   std::span<const PianoRoll> orchestra,
                                                   const OrchestraLayout& layout,
                                                   Diagnostics* diag) {
  for (const auto& part : orchestra)
    if (part.quantization() != piano.quantization())
      throw AlignmentError("quantization mismatch: piano Q=" + std::to_string(piano.quantization()) +
                           ", part '" + part.label() + "' Q=" + std::to_string(part.quantization()));
  auto p = piano_states(piano, diag);
  auto o = orchestra_states(orchestra, layout, diag);
  o.quantization = p.quantization;
  if (p.empty() && o.empty()) throw AlignmentError("cannot align two empty scores");
  const std::size_t len = std::max(p.size(), o.size());
  p.states.resize(len, State::Zero(kPianoKeys));
  o.states.resize(len, State::Zero(layout.total_dim()));
  return {std::move(p), std::move(o)};
}

AlignedPair align_file(const ScoreFile& file, const OrchestraLayout& layout, Diagnostics* diag) {
  auto [p, o] = align_pair(file.piano, file.orchestra, layout, diag);
  return AlignedPair{file.name, std::move(p), std::move(o)};
}

EventSequence extract_events(const StateSequence& seq, bool include_first) {
  EventSequence ev;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const bool changed = t == 0 ? include_first : seq.states[t] != seq.states[t - 1];
    if (changed) {
      ev.times.push_back(t);
      ev.states.push_back(seq.states[t]);
    }
  }
  return ev;
}

std::vector<PianoRoll> states_to_rolls(const StateSequence& seq, const OrchestraLayout& layout) {
  std::vector<PianoRoll> rolls;
  for (std::size_t pi = 0; pi < layout.parts().size(); ++pi) {
    const auto& part = layout.parts()[pi];
    PianoRoll roll(part.name, part.kept, seq.quantization, seq.size());
    for (std::size_t r = 0; r < part.kept.size(); ++r)
      for (std::size_t t = 0; t < seq.size(); ++t)
        if (seq.states[t][layout.offset(pi) + r] > 0.5) roll.set(r, t, kDefaultIntensity);
    rolls.push_back(std::move(roll));
  }
  return rolls;
}

}  // namespace lop::score
