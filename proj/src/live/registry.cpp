#include "lop/live.hpp"

#include <algorithm>
#include <filesystem>

namespace lop::live {

void FrameRing::resize(std::size_t capacity) {
  if (capacity == slots_.size() || slots_.empty()) return;
  const auto dim = slots_.front().size();
  auto frames = ordered();
  slots_.assign(capacity, State::Zero(dim));
  head_ = 0;
  const std::size_t keep = std::min(capacity, frames.size());
  // Refill oldest first so the newest frame ends up last.
  for (std::size_t j = 0; j < keep; ++j) slots_[capacity - keep + j] = frames[frames.size() - keep + j];
}

std::vector<State> FrameRing::ordered() const {
  std::vector<State> out;
  out.reserve(slots_.size());
  for (std::size_t i = 0; i < slots_.size(); ++i) out.push_back(slots_[(head_ + i) % slots_.size()]);
  return out;
}

void ModelRegistry::add(std::string id, std::shared_ptr<const Model> model) {
  ebm::validate(model->params);
  models_[std::move(id)] = std::move(model);
}

ModelRegistry ModelRegistry::from_directory(const std::string& dir) {
  ModelRegistry reg;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".lopm")
      reg.add(entry.path().stem().string(), std::make_shared<const Model>(load_model(entry.path().string())));
  return reg;
}

std::shared_ptr<const Model> ModelRegistry::find(const std::string& id) const {
  auto it = models_.find(id);
  return it == models_.end() ? nullptr : it->second;
}

std::vector<std::string> ModelRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, _] : models_) out.push_back(id);
  return out;
}

nlohmann::json ModelRegistry::describe() const {
  auto list = nlohmann::json::array();
  for (const auto& [id, m] : models_) {
    const auto d = ebm::dims_of(m->params);
    list.push_back({{"id", id},
                    {"kind", std::string(ebm::to_string(m->kind()))},
                    {"horizon", m->horizon},
                    {"quantization", m->quantization},
                    {"n_hidden", d.n_h},
                    {"layout", m->layout.to_json()}});
  }
  return {{"models", list}};
}

void LatencyStats::record(double ms, double budget_ms) {
  constexpr std::size_t kWindow = 1024;
  last_ms = ms;
  ++ticks;
  if (ms > budget_ms) ++over_budget;
  if (recent_ms.size() == kWindow) recent_ms.erase(recent_ms.begin());
  recent_ms.push_back(ms);
}

double LatencyStats::median() const {
  if (recent_ms.empty()) return 0.0;
  auto v = recent_ms;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace lop::live
