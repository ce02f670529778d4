#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lop/model_io.hpp"
#include "lop/projection.hpp"

namespace lop::live {

/// Fixed-capacity ring of the most recent frames, oldest first on iteration.
class FrameRing {
 public:
  FrameRing() = default;
  FrameRing(std::size_t capacity, std::size_t dim) { reset(capacity, dim); }

  void reset(std::size_t capacity, std::size_t dim) {
    slots_.assign(capacity, State::Zero(static_cast<Eigen::Index>(dim)));
    head_ = 0;
  }
  /// Keeps the newest min(capacity, size()) frames, padding older slots with silence.
  void resize(std::size_t capacity);

  void push(State frame) {
    slots_[head_] = std::move(frame);
    head_ = (head_ + 1) % slots_.size();
  }
  std::size_t size() const { return slots_.size(); }
  std::vector<State> ordered() const;

 private:
  std::vector<State> slots_;
  std::size_t head_ = 0;  // next slot to overwrite == oldest frame
};

/// Models available to live sessions, shared read-only across them.
class ModelRegistry {
 public:
  void add(std::string id, std::shared_ptr<const Model> model);
  /// Loads every *.lopm file in `dir`; the id is the file stem.
  static ModelRegistry from_directory(const std::string& dir);

  std::shared_ptr<const Model> find(const std::string& id) const;
  std::vector<std::string> ids() const;
  bool empty() const { return models_.empty(); }
  nlohmann::json describe() const;

 private:
  std::map<std::string, std::shared_ptr<const Model>> models_;
};

struct LatencyStats {
  std::vector<double> recent_ms;  // bounded window
  double last_ms = 0.0;
  std::size_t ticks = 0;
  std::size_t over_budget = 0;

  void record(double ms, double budget_ms);
  double median() const;
};

struct SessionOptions {
  ebm::SamplingConfig sampling;
  double latency_budget_ms = 100.0;
  std::optional<std::string> initial_model;
};

/// One live performance: current piano keys, the orchestral past and the
/// active model. Not thread-safe; a session is driven by a single worker.
class Session {
 public:
  Session(std::shared_ptr<const ModelRegistry> registry, SessionOptions options = {});

  /// Applies one client message. A `pulse` (or a note/piano_frame message with
  /// "pulse": true) triggers a tick after the message is applied.
  std::vector<nlohmann::json> handle(const nlohmann::json& msg);

  /// Applies messages in order and runs at most one tick at the end if any of
  /// them asked for one, so bursts of pulses coalesce into the latest state.
  std::vector<nlohmann::json> handle_batch(std::span<const nlohmann::json> msgs);

  /// Generates the next orchestra frame from the ring buffer and the current
  /// piano vector.
  nlohmann::json tick();

  const State& piano() const { return piano_; }
  std::uint64_t frame_counter() const { return frame_counter_; }
  std::vector<State> past() const { return ring_.ordered(); }
  const LatencyStats& latency() const { return latency_; }
  const ebm::SamplingConfig& sampling() const { return sampling_; }
  std::optional<std::string> model_id() const { return model_id_; }

 private:
  struct Applied {
    std::vector<nlohmann::json> replies;
    bool pulse = false;
  };
  Applied apply(const nlohmann::json& msg);
  nlohmann::json set_model(const std::string& id);
  nlohmann::json set_sampling(const nlohmann::json& msg);

  std::shared_ptr<const ModelRegistry> registry_;
  std::shared_ptr<const Model> model_;
  std::optional<std::string> model_id_;
  ebm::SamplingConfig sampling_;
  double budget_ms_;
  ebm::Rng rng_;
  State piano_;
  FrameRing ring_;
  std::uint64_t frame_counter_ = 0;
  LatencyStats latency_;
};

nlohmann::json error_reply(const std::string& detail);

// --- Latency harness --------------------------------------------------------

struct LatencyBenchOptions {
  ebm::ModelKind kind = ebm::ModelKind::crbm;
  std::size_t orchestra_dim = 48;
  int n_hidden = 200;
  int n_factors = 50;
  int gibbs_steps = 20;
  int horizon = 4;
  std::size_t ticks = 200;
  std::size_t warmup = 5;
  std::uint64_t seed = 0;
};

struct LatencyBenchResult {
  LatencyBenchOptions options;
  std::vector<double> samples_ms;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;

  nlohmann::json to_json() const;
};

/// Layout of `dim` orchestra units spread over parts of at most 128 pitches.
score::OrchestraLayout synthetic_layout(std::size_t dim);

/// Drives a Session with a randomly initialized model of the requested size,
/// one random piano chord per tick, and reports the tick compute times.
LatencyBenchResult run_latency_bench(const LatencyBenchOptions& options);

}  // namespace lop::live
