#include "lop/score_io.hpp"

#include <algorithm>
#include <set>

namespace lop::score {

OrchestraLayout::OrchestraLayout(std::vector<LayoutPart> parts) : parts_(std::move(parts)) {
  offsets_.reserve(parts_.size());
  for (const auto& p : parts_) {
    if (!std::is_sorted(p.kept.begin(), p.kept.end()))
      throw std::invalid_argument("layout part '" + p.name + "': kept pitches must be sorted");
    offsets_.push_back(total_dim_);
    total_dim_ += p.kept.size();
  }
}

std::optional<std::size_t> OrchestraLayout::part_index(const std::string& name) const {
  for (std::size_t i = 0; i < parts_.size(); ++i)
    if (parts_[i].name == name) return i;
  return std::nullopt;
}

std::optional<std::size_t> OrchestraLayout::index_of(std::size_t part, int pitch) const {
  const auto& kept = parts_.at(part).kept;
  auto it = std::lower_bound(kept.begin(), kept.end(), pitch);
  if (it == kept.end() || *it != pitch) return std::nullopt;
  return offsets_[part] + static_cast<std::size_t>(it - kept.begin());
}

std::vector<std::pair<std::string, std::vector<int>>> OrchestraLayout::decode(const State& state) const {
  if (static_cast<std::size_t>(state.size()) != total_dim_)
    throw std::invalid_argument("state dimension " + std::to_string(state.size()) +
                                " does not match layout dimension " + std::to_string(total_dim_));
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (std::size_t pi = 0; pi < parts_.size(); ++pi) {
    std::vector<int> active;
    for (std::size_t r = 0; r < parts_[pi].kept.size(); ++r)
      if (state[offsets_[pi] + r] > 0.5) active.push_back(parts_[pi].kept[r]);
    out.emplace_back(parts_[pi].name, std::move(active));
  }
  return out;
}

nlohmann::json OrchestraLayout::to_json() const {
  auto parts = nlohmann::json::array();
  for (const auto& p : parts_)
    parts.push_back({{"name", p.name}, {"range", p.range}, {"kept", p.kept}});
  return {{"parts", parts}, {"total_dim", total_dim_}};
}

OrchestraLayout OrchestraLayout::from_json(const nlohmann::json& j) {
  std::vector<LayoutPart> parts;
  for (const auto& p : j.at("parts"))
    parts.push_back({p.at("name").get<std::string>(), p.at("range").get<std::vector<int>>(),
                     p.at("kept").get<std::vector<int>>()});
  OrchestraLayout layout(std::move(parts));
  if (j.contains("total_dim") && j.at("total_dim").get<std::size_t>() != layout.total_dim())
    throw std::invalid_argument("layout total_dim inconsistent with its parts");
  return layout;
}

OrchestraLayout build_layout(std::span<const std::vector<PianoRoll>> corpus, Diagnostics* diag) {
  if (corpus.empty()) throw std::invalid_argument("build_layout: empty corpus");
  std::vector<std::string> order;
  std::vector<std::set<int>> declared, played;
  for (const auto& piece : corpus) {
    for (const auto& roll : piece) {
      auto it = std::find(order.begin(), order.end(), roll.label());
      std::size_t idx = static_cast<std::size_t>(it - order.begin());
      if (it == order.end()) {
        order.push_back(roll.label());
        declared.emplace_back();
        played.emplace_back();
      }
      for (std::size_t r = 0; r < roll.num_pitches(); ++r) {
        declared[idx].insert(roll.pitches()[r]);
        if (roll.any_sounding(r)) played[idx].insert(roll.pitches()[r]);
      }
    }
  }
  std::vector<LayoutPart> parts;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (played[i].empty() && diag)
      diag->warn("part '" + order[i] + "' never plays in the corpus; kept with an empty range");
    parts.push_back({order[i], {declared[i].begin(), declared[i].end()},
                     {played[i].begin(), played[i].end()}});
  }
  return OrchestraLayout(std::move(parts));
}

}  // namespace lop::score
