#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace lop {

/// Binary note-state vector (entries 0.0 or 1.0). Shared by every module.
using State = Eigen::VectorXd;

/// Collects non-fatal diagnostics emitted while ingesting scores.
struct Diagnostics {
  std::vector<std::string> warnings;
  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what), offset_(0) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class AlignmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace score {

/// Lowest and highest MIDI pitch of the 88-key piano keyboard (A0..C8).
inline constexpr int kPianoLowest = 21;
inline constexpr int kPianoHighest = 108;
inline constexpr std::size_t kPianoKeys = 88;

/// Intensity written for sounding notes when exporting binary states.
inline constexpr int kDefaultIntensity = 64;

/// Pitch x time matrix of note intensities for one instrument part.
///
/// Rows follow `pitches()` (strictly increasing MIDI numbers), columns are
/// frames at `quantization()` frames per quarter note. Intensity 0 is a note
/// off; values are clamped to [0, 127] on write.
class PianoRoll {
 public:
  PianoRoll() = default;
  PianoRoll(std::string label, std::vector<int> pitches, int quantization,
            std::size_t num_frames);

  const std::string& label() const { return label_; }
  const std::vector<int>& pitches() const { return pitches_; }
  int quantization() const { return quantization_; }
  std::size_t num_frames() const { return num_frames_; }
  std::size_t num_pitches() const { return pitches_.size(); }

  std::optional<std::size_t> row_of(int pitch) const;

  int at(std::size_t row, std::size_t frame) const {
    return data_[row * num_frames_ + frame];
  }
  void set(std::size_t row, std::size_t frame, int intensity);

  /// Intensity of `pitch` at `frame`, 0 when the pitch is not a row.
  int intensity(int pitch, std::size_t frame) const;

  /// Grows (or shrinks) the time axis; new frames are silent.
  void resize_frames(std::size_t num_frames);

  bool any_sounding(std::size_t row) const;

  friend bool operator==(const PianoRoll&, const PianoRoll&) = default;

 private:
  std::string label_;
  std::vector<int> pitches_;
  int quantization_ = 1;
  std::size_t num_frames_ = 0;
  std::vector<std::uint8_t> data_;  // row-major, row = pitch
};

/// Re-samples a roll to a different quantization. Frame t of the result takes
/// source frame floor(t * Q_src / Q_dst); exact whenever Q_dst is a multiple of
/// Q_src or the source durations are integral at Q_dst.
PianoRoll requantize(const PianoRoll& roll, int quantization);

struct LayoutPart {
  std::string name;
  std::vector<int> range;  // every pitch declared for the part in the corpus
  std::vector<int> kept;   // pitches actually played at least once

  friend bool operator==(const LayoutPart&, const LayoutPart&) = default;
};

/// Ordered instrument parts and the pitch subset kept for each after trimming.
/// Part order defines the meaning of every orchestra state vector.
class OrchestraLayout {
 public:
  OrchestraLayout() = default;
  explicit OrchestraLayout(std::vector<LayoutPart> parts);

  const std::vector<LayoutPart>& parts() const { return parts_; }
  std::size_t total_dim() const { return total_dim_; }
  std::size_t offset(std::size_t part) const { return offsets_[part]; }
  std::optional<std::size_t> part_index(const std::string& name) const;
  std::optional<std::size_t> index_of(std::size_t part, int pitch) const;

  /// Active pitches per part, in layout order; silent parts map to empty lists.
  std::vector<std::pair<std::string, std::vector<int>>> decode(const State& state) const;

  nlohmann::json to_json() const;
  static OrchestraLayout from_json(const nlohmann::json& j);

  friend bool operator==(const OrchestraLayout& a, const OrchestraLayout& b) {
    return a.parts_ == b.parts_;
  }

 private:
  std::vector<LayoutPart> parts_;
  std::vector<std::size_t> offsets_;
  std::size_t total_dim_ = 0;
};

/// Time-ordered binary states of a single fixed dimension.
struct StateSequence {
  std::vector<State> states;
  int quantization = 1;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  std::size_t dim() const { return states.empty() ? 0 : static_cast<std::size_t>(states.front().size()); }
};

struct EventSequence {
  std::vector<std::size_t> times;
  std::vector<State> states;

  std::size_t size() const { return times.size(); }
};

/// A piano reduction with its orchestration, as stored in one corpus file.
struct ScoreFile {
  std::string name;
  PianoRoll piano;
  std::vector<PianoRoll> orchestra;
};

/// Piano and orchestra state sequences on a shared time grid.
struct AlignedPair {
  std::string name;
  StateSequence piano;
  StateSequence orchestra;
};

// --- MIDI -----------------------------------------------------------------

/// Parses a Standard MIDI File (format 0 or 1) into one roll per track that is
/// named or carries notes. Frame index = round(tick * Q / ticks-per-quarter);
/// all rolls are padded to the longest. Only note, tempo and track-name
/// messages are interpreted.
std::vector<PianoRoll> parse_midi(std::span<const std::uint8_t> bytes, int quantization,
                                  Diagnostics* diag = nullptr);

// --- JSON piano-roll format -----------------------------------------------

nlohmann::json rolls_to_json(std::span<const PianoRoll> parts);
std::vector<PianoRoll> rolls_from_json(const nlohmann::json& j);

/// Splits a list of parts into a ScoreFile: the part named "piano" is the
/// piano score, every other part belongs to the orchestra.
ScoreFile make_score_file(std::string name, std::vector<PianoRoll> parts);

ScoreFile load_score_file(const std::string& path, int quantization, Diagnostics* diag = nullptr);
void save_score_file(const ScoreFile& file, const std::string& path);

std::vector<std::uint8_t> read_bytes(const std::string& path);

// --- Sequences ------------------------------------------------------------

/// Binary 88-key piano states; pitches outside A0..C8 are dropped with a warning.
StateSequence piano_states(const PianoRoll& piano, Diagnostics* diag = nullptr);

/// Binary orchestra states under `layout`. Parts or pitches the layout does not
/// know are dropped with a warning.
StateSequence orchestra_states(std::span<const PianoRoll> orchestra, const OrchestraLayout& layout,
                               Diagnostics* diag = nullptr);

/// Aligns a piano score with its orchestration: both sequences binarized and
/// padded with silence to the longer length.
std::pair<StateSequence, StateSequence> align_pair(const PianoRoll& piano,
                                                   std::span<const PianoRoll> orchestra,
                                                   const OrchestraLayout& layout,
                                                   Diagnostics* diag = nullptr);

AlignedPair align_file(const ScoreFile& file, const OrchestraLayout& layout,
                       Diagnostics* diag = nullptr);

/// Layout over every part seen in the corpus, in order of first appearance,
/// keeping only pitches that sound at least once.
OrchestraLayout build_layout(std::span<const std::vector<PianoRoll>> corpus,
                             Diagnostics* diag = nullptr);

/// Indices where the state differs from its predecessor. Index 0 has no
/// predecessor and is kept iff `include_first`.
EventSequence extract_events(const StateSequence& seq, bool include_first = true);

/// Converts binary orchestra states back to one roll per layout part.
std::vector<PianoRoll> states_to_rolls(const StateSequence& seq, const OrchestraLayout& layout);

State piano_frame_from_pitches(std::span<const int> pitches, Diagnostics* diag = nullptr);

}  // namespace score
}  // namespace lop
