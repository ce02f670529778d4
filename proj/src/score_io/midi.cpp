#include "lop/score_io.hpp"

#include <algorithm>
#include <map>

namespace lop::score {
namespace {

struct NoteSpan {
  int pitch;
  int velocity;
  std::uint64_t on_tick;
  std::uint64_t off_tick;
};

struct TrackNotes {
  std::string name;
  std::vector<NoteSpan> notes;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::size_t pos, std::size_t end)
      : bytes_(bytes), pos_(pos), end_(end) {}

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ >= end_; }

  std::uint8_t u8() {
    if (pos_ >= end_) throw ParseError("truncated MIDI data", pos_);
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (pos_ >= end_) throw ParseError("truncated MIDI data", pos_);
    return bytes_[pos_];
  }
  std::uint32_t be(int n) {
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | u8();
    return v;
  }
  std::uint32_t vlq() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t b = u8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw ParseError("variable-length quantity longer than 4 bytes", pos_);
  }
  void skip(std::size_t n) {
    if (n > end_ - pos_) throw ParseError("truncated MIDI event", pos_);
    pos_ += n;
  }
  std::string text(std::size_t n) {
    if (n > end_ - pos_) throw ParseError("truncated MIDI meta event", pos_);
    std::string s(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t end_;
};

TrackNotes read_track(std::span<const std::uint8_t> bytes, std::size_t begin, std::size_t end,
                      std::size_t track_no, Diagnostics* diag) {
  Reader rd(bytes, begin, end);
  TrackNotes out;
  std::map<int, std::pair<std::uint64_t, int>> active;  // pitch -> (onset tick, velocity)
  std::uint64_t tick = 0;
  std::uint8_t running = 0;

  auto close = [&](int pitch, std::uint64_t at) {
    auto it = active.find(pitch);
    if (it == active.end()) return;
    out.notes.push_back({pitch, it->second.second, it->second.first, at});
    active.erase(it);
  };

  while (!rd.done()) {
    tick += rd.vlq();
    std::uint8_t status = rd.peek();
    if (status & 0x80) {
      rd.u8();
    } else {
      if (running == 0) throw ParseError("data byte without running status", rd.pos());
      status = running;
    }
    if (status == 0xFF) {
      const std::uint8_t type = rd.u8();
      const std::uint32_t len = rd.vlq();
      if (type == 0x03) out.name = rd.text(len);
      else if (type == 0x2F) { rd.skip(len); break; }
      else rd.skip(len);  // tempo (0x51) and other meta events do not affect frame indices
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      rd.skip(rd.vlq());
      continue;
    }
    if (status >= 0xF0) throw ParseError("unsupported system message", rd.pos() - 1);
    running = status;
    const std::uint8_t kind = status & 0xF0;
    if (kind == 0x80 || kind == 0x90) {
      const int pitch = rd.u8() & 0x7F;
      const int velocity = rd.u8() & 0x7F;
      if (kind == 0x90 && velocity > 0) {
        if (active.count(pitch)) {
          if (diag)
            diag->warn("track " + std::to_string(track_no) + ": overlapping notes on pitch " +
                       std::to_string(pitch) + " at tick " + std::to_string(tick) +
                       ", later note wins");
          close(pitch, tick);
        }
        active[pitch] = {tick, velocity};
      } else {
        close(pitch, tick);
      }
    } else if (kind == 0xC0 || kind == 0xD0) {
      rd.skip(1);
    } else {
      rd.skip(2);
    }
  }
  if (!active.empty()) {
    if (diag)
      diag->warn("track " + std::to_string(track_no) + ": " + std::to_string(active.size()) +
                 " notes still sounding at end of track were closed");
    while (!active.empty()) close(active.begin()->first, tick);
  }
  return out;
}

std::uint64_t to_frame(std::uint64_t tick, int q, std::uint32_t tpq) {
  return (2 * tick * static_cast<std::uint64_t>(q) + tpq) / (2 * static_cast<std::uint64_t>(tpq));
}

}  // namespace

std::vector<PianoRoll> parse_midi(std::span<const std::uint8_t> bytes, int quantization,
                                  Diagnostics* diag) {
  if (quantization < 1) throw std::invalid_argument("quantization must be >= 1");
  Reader hdr(bytes, 0, bytes.size());
  if (bytes.size() < 14 || hdr.text(4) != "MThd") throw ParseError("missing MThd header", 0);
  const std::uint32_t hlen = hdr.be(4);
  if (hlen < 6) throw ParseError("MThd chunk too short", 4);
  const std::uint32_t format = hdr.be(2);
  const std::uint32_t ntracks = hdr.be(2);
  const std::uint32_t division = hdr.be(2);
  if (format > 1) throw ParseError("unsupported MIDI format " + std::to_string(format), 8);
  if (division & 0x8000) throw ParseError("SMPTE time division is not supported", 12);
  if (division == 0) throw ParseError("zero ticks per quarter note", 12);
  std::size_t pos = 8 + hlen;

  std::vector<TrackNotes> tracks;
  for (std::uint32_t i = 0; i < ntracks; ++i) {
    if (pos + 8 > bytes.size()) throw ParseError("truncated chunk header for track " + std::to_string(i), pos);
    Reader ch(bytes, pos, bytes.size());
    const std::string id = ch.text(4);
    const std::uint32_t len = ch.be(4);
    if (pos + 8 + len > bytes.size())
      throw ParseError("truncated track chunk " + std::to_string(i), pos);
    if (id == "MTrk") tracks.push_back(read_track(bytes, pos + 8, pos + 8 + len, i, diag));
    pos += 8 + len;
  }

  std::vector<PianoRoll> rolls;
  std::size_t longest = 0;
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& tr = tracks[i];
    if (tr.name.empty() && tr.notes.empty()) continue;  // conductor track
    std::vector<int> pitches;
    std::size_t frames = 0;
    for (const auto& n : tr.notes) {
      pitches.push_back(n.pitch);
      const std::uint64_t on = to_frame(n.on_tick, quantization, division);
      const std::uint64_t off = std::max(on + 1, to_frame(n.off_tick, quantization, division));
      frames = std::max<std::size_t>(frames, off);
    }
    std::sort(pitches.begin(), pitches.end());
    pitches.erase(std::unique(pitches.begin(), pitches.end()), pitches.end());
    PianoRoll roll(tr.name.empty() ? "track" + std::to_string(i) : tr.name, pitches, quantization, frames);
    // Notes are applied in onset order so a re-struck pitch overwrites the tail of the earlier one.
    auto notes = tr.notes;
    std::stable_sort(notes.begin(), notes.end(),
                     [](const NoteSpan& a, const NoteSpan& b) { return a.on_tick < b.on_tick; });
    for (const auto& n : notes) {
      const std::size_t row = *roll.row_of(n.pitch);
      const std::uint64_t on = to_frame(n.on_tick, quantization, division);
      const std::uint64_t off = std::max(on + 1, to_frame(n.off_tick, quantization, division));
      for (std::uint64_t t = on; t < off; ++t) roll.set(row, t, n.velocity);
    }
    longest = std::max(longest, frames);
    rolls.push_back(std::move(roll));
  }
  for (auto& r : rolls) r.resize_frames(longest);
  return rolls;
}

}  // namespace lop::score
