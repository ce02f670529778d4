#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace testing_midi {

struct Note {
  int pitch;
  int velocity;
  std::uint32_t on;   // absolute ticks
  std::uint32_t off;
};

struct Track {
  std::string name;
  std::vector<Note> notes;
};

inline void put_be(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

inline void put_vlq(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = static_cast<std::uint8_t>((v & 0x7F) | 0x80);
  while (n) out.push_back(buf[--n]);
}

/// Format-1 file. Note-offs are written as note-on with velocity 0 when
/// `zero_velocity_off` is set, exercising running status.
inline std::vector<std::uint8_t> build(const std::vector<Track>& tracks, std::uint16_t tpq,
                                       bool zero_velocity_off = false) {
  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  put_be(out, 6, 4);
  put_be(out, 1, 2);
  put_be(out, static_cast<std::uint32_t>(tracks.size()), 2);
  put_be(out, tpq, 2);
  for (const auto& t : tracks) {
    std::vector<std::uint8_t> body;
    if (!t.name.empty()) {
      put_vlq(body, 0);
      body.push_back(0xFF);
      body.push_back(0x03);
      put_vlq(body, static_cast<std::uint32_t>(t.name.size()));
      body.insert(body.end(), t.name.begin(), t.name.end());
    }
    // (tick, order, status, pitch, velocity); offs sort before ons at equal ticks
    std::vector<std::tuple<std::uint32_t, int, std::uint8_t, int, int>> ev;
    for (const auto& n : t.notes) {
      ev.emplace_back(n.on, 1, 0x90, n.pitch, n.velocity);
      if (zero_velocity_off) ev.emplace_back(n.off, 0, 0x90, n.pitch, 0);
      else ev.emplace_back(n.off, 0, 0x80, n.pitch, 64);
    }
    std::sort(ev.begin(), ev.end());
    std::uint32_t now = 0;
    std::uint8_t running = 0;
    for (auto [tick, order, status, pitch, vel] : ev) {
      put_vlq(body, tick - now);
      now = tick;
      if (status != running) body.push_back(status);
      running = status;
      body.push_back(static_cast<std::uint8_t>(pitch));
      body.push_back(static_cast<std::uint8_t>(vel));
    }
    put_vlq(body, 0);
    body.push_back(0xFF);
    body.push_back(0x2F);
    body.push_back(0x00);
    out.insert(out.end(), {'M', 'T', 'r', 'k'});
    put_be(out, static_cast<std::uint32_t>(body.size()), 4);
    out.insert(out.end(), body.begin(), body.end());
  }
  return out;
}

}  // namespace testing_midi
