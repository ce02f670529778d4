#include <algorithm>
#include <random>

#include "lop/live.hpp"

namespace lop::live {

using nlohmann::json;

score::OrchestraLayout synthetic_layout(std::size_t dim) {
  std::vector<score::LayoutPart> parts;
  for (std::size_t start = 0; start < dim; start += 128) {
    score::LayoutPart part;
    part.name = "part" + std::to_string(parts.size());
    for (std::size_t p = 0; p < std::min<std::size_t>(128, dim - start); ++p) part.range.push_back(static_cast<int>(p));
    part.kept = part.range;
    parts.push_back(std::move(part));
  }
  return score::OrchestraLayout(std::move(parts));
}

json LatencyBenchResult::to_json() const {
  return {{"kind", std::string(ebm::to_string(options.kind))},
          {"orchestra_dim", options.orchestra_dim},
          {"n_hidden", options.n_hidden},
          {"n_factors", options.n_factors},
          {"gibbs_steps", options.gibbs_steps},
          {"horizon", options.horizon},
          {"ticks", samples_ms.size()},
          {"median_ms", median_ms},
          {"p95_ms", p95_ms},
          {"max_ms", max_ms}};
}

LatencyBenchResult run_latency_bench(const LatencyBenchOptions& options) {
  const projection::ModelBinding binding(options.kind, options.orchestra_dim, static_cast<std::size_t>(options.horizon));
  auto dims = binding.unit_dims();
  dims.n_h = options.n_hidden;
  if (options.kind == ebm::ModelKind::fgcrbm) dims.n_f = dims.n_fa = dims.n_fb = options.n_factors;

  auto model = std::make_shared<Model>();
  model->params = ebm::init_gaussian(options.kind, dims, 0.01, options.seed);
  model->layout = synthetic_layout(options.orchestra_dim);
  model->horizon = options.horizon;

  auto registry = std::make_shared<ModelRegistry>();
  registry->add("bench", model);

  SessionOptions so;
  so.sampling.gibbs_steps = options.gibbs_steps;
  so.sampling.seed = options.seed;
  Session session(registry, so);

  std::mt19937_64 rng(options.seed + 1);
  std::uniform_int_distribution<int> pitch(36, 96);
  std::uniform_int_distribution<int> voices(1, 6);

  LatencyBenchResult result;
  result.options = options;
  for (std::size_t t = 0; t < options.warmup + options.ticks; ++t) {
    json chord = json::array();
    for (int i = voices(rng); i > 0; --i) chord.push_back(pitch(rng));
    const auto replies = session.handle({{"type", "piano_frame"}, {"pitches", chord}, {"pulse", true}});
    if (t < options.warmup) continue;
    for (const auto& r : replies)
      if (r.at("type") == "orchestra_frame") result.samples_ms.push_back(r.at("latency_ms").get<double>());
  }

  auto sorted = result.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    const auto n = sorted.size();
    result.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    result.p95_ms = sorted[std::min(n - 1, static_cast<std::size_t>(0.95 * static_cast<double>(n)))];
    result.max_ms = sorted.back();
  }
  return result;
}

}  // namespace lop::live
