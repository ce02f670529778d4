#include "lop/score_io.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

namespace lop::score {

nlohmann::json rolls_to_json(std::span<const PianoRoll> parts) {
  int q = parts.empty() ? 1 : parts.front().quantization();
  auto jparts = nlohmann::json::array();
  for (const auto& roll : parts) {
    if (roll.quantization() != q) throw std::invalid_argument("parts use different quantizations");
    auto frames = nlohmann::json::array();
    for (std::size_t r = 0; r < roll.num_pitches(); ++r) {
      std::vector<int> row(roll.num_frames());
      for (std::size_t t = 0; t < roll.num_frames(); ++t) row[t] = roll.at(r, t);
      frames.push_back(std::move(row));
    }
    jparts.push_back({{"name", roll.label()}, {"pitches", roll.pitches()}, {"frames", std::move(frames)}});
  }
  return {{"quantization", q}, {"parts", std::move(jparts)}};
}

std::vector<PianoRoll> rolls_from_json(const nlohmann::json& j) {
  try {
    const int q = j.at("quantization").get<int>();
    std::vector<PianoRoll> parts;
    for (const auto& jp : j.at("parts")) {
      auto pitches = jp.at("pitches").get<std::vector<int>>();
      const auto& frames = jp.at("frames");
      if (frames.size() != pitches.size())
        throw ParseError("part '" + jp.at("name").get<std::string>() + "': " +
                         std::to_string(frames.size()) + " frame rows for " +
                         std::to_string(pitches.size()) + " pitches");
      const std::size_t n = frames.empty() ? 0 : frames.front().size();
      PianoRoll roll(jp.at("name").get<std::string>(), std::move(pitches), q, n);
      for (std::size_t r = 0; r < frames.size(); ++r) {
        if (frames[r].size() != n) throw ParseError("ragged frame rows in part '" + roll.label() + "'");
        for (std::size_t t = 0; t < n; ++t) {
          const int v = frames[r][t].get<int>();
          if (v < 0 || v > 127) throw ParseError("intensity out of range [0,127]: " + std::to_string(v));
          roll.set(r, t, v);
        }
      }
      parts.push_back(std::move(roll));
    }
    return parts;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed piano-roll JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid piano-roll JSON: ") + e.what());
  }
}

ScoreFile make_score_file(std::string name, std::vector<PianoRoll> parts) {
  ScoreFile file;
  file.name = std::move(name);
  bool found = false;
  for (auto& roll : parts) {
    if (!found && roll.label() == "piano") {
      file.piano = std::move(roll);
      found = true;
    } else {
      file.orchestra.push_back(std::move(roll));
    }
  }
  if (!found) throw ParseError("score '" + file.name + "' has no part named \"piano\"");
  return file;
}

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ScoreFile load_score_file(const std::string& path, int quantization, Diagnostics* diag) {
  std::filesystem::path p(path);
  const auto ext = p.extension().string();
  std::vector<PianoRoll> parts;
  if (ext == ".mid" || ext == ".midi") {
    auto bytes = read_bytes(path);
    parts = parse_midi(bytes, quantization, diag);
  } else {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
    parts = rolls_from_json(j);
    if (quantization > 0)
      for (auto& r : parts) r = requantize(r, quantization);
  }
  return make_score_file(p.stem().string(), std::move(parts));
}

void save_score_file(const ScoreFile& file, const std::string& path) {
  std::vector<PianoRoll> parts{file.piano};
  parts.insert(parts.end(), file.orchestra.begin(), file.orchestra.end());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rolls_to_json(parts).dump() << '\n';
}

}  // namespace lop::score
