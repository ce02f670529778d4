#include "lop/live.hpp"

#include <chrono>

namespace lop::live {

using nlohmann::json;

json error_reply(const std::string& detail) { return {{"type", "error"}, {"detail", detail}}; }

namespace {

json warning_reply(const std::string& detail) { return {{"type", "warning"}, {"detail", detail}}; }

int pitch_field(const json& msg) {
  if (!msg.contains("pitch") || !msg.at("pitch").is_number_integer())
    throw std::invalid_argument("message needs an integer \"pitch\"");
  const int pitch = msg.at("pitch").get<int>();
  if (pitch < 0 || pitch > 127) throw std::invalid_argument("pitch " + std::to_string(pitch) + " outside 0-127");
  return pitch;
}

bool in_keyboard(int pitch) { return pitch >= score::kPianoLowest && pitch <= score::kPianoHighest; }

}  // namespace

Session::Session(std::shared_ptr<const ModelRegistry> registry, SessionOptions options)
    : registry_(std::move(registry)),
      sampling_(options.sampling),
      budget_ms_(options.latency_budget_ms),
      rng_(options.sampling.seed),
      piano_(State::Zero(score::kPianoKeys)) {
  sampling_.validate();
  std::optional<std::string> initial = options.initial_model;
  if (!initial && registry_ && !registry_->empty()) initial = registry_->ids().front();
  if (initial) {
    auto reply = set_model(*initial);
    if (reply.at("type") == "error") throw std::invalid_argument(reply.at("detail").get<std::string>());
  }
}

json Session::set_model(const std::string& id) {
  auto next = registry_ ? registry_->find(id) : nullptr;
  if (!next) return error_reply("unknown model '" + id + "'");
  if (model_ && next->layout.total_dim() != model_->layout.total_dim())
    return error_reply("incompatible layout for model '" + id + "': expected orchestra dimension " +
                       std::to_string(model_->layout.total_dim()) + ", got " +
                       std::to_string(next->layout.total_dim()));
  if (model_ && !(next->layout == model_->layout))
    return error_reply("incompatible layout for model '" + id + "': part lists differ (dimension " +
                       std::to_string(next->layout.total_dim()) + ")");
  const auto N = static_cast<std::size_t>(next->horizon);
  if (!model_) ring_.reset(N, next->layout.total_dim());
  else ring_.resize(N);
  model_ = std::move(next);
  model_id_ = id;
  return {{"type", "ack"},
          {"of", "set_model"},
          {"model_id", id},
          {"kind", std::string(ebm::to_string(model_->kind()))},
          {"horizon", model_->horizon}};
}

json Session::set_sampling(const json& msg) {
  auto next = sampling_;
  if (msg.contains("gibbs_steps")) next.gibbs_steps = msg.at("gibbs_steps").get<int>();
  if (msg.contains("threshold")) next.threshold = msg.at("threshold").get<double>();
  if (msg.contains("seed")) next.seed = msg.at("seed").get<std::uint64_t>();
  if (msg.contains("mode"))
    next.output_mode = msg.at("mode").get<std::string>() == "sample" ? ebm::OutputMode::sample
                                                                    : ebm::OutputMode::mean_field;
  next.validate();
  if (msg.contains("seed")) rng_.seed(next.seed);
  sampling_ = next;
  return {{"type", "ack"},
          {"of", "set_sampling"},
          {"gibbs_steps", sampling_.gibbs_steps},
          {"threshold", sampling_.threshold},
          {"seed", sampling_.seed},
          {"mode", sampling_.output_mode == ebm::OutputMode::sample ? "sample" : "mean_field"}};
}

Session::Applied Session::apply(const json& msg) {
  Applied out;
  try {
    if (!msg.is_object() || !msg.contains("type") || !msg.at("type").is_string())
      throw std::invalid_argument("message must be an object with a string \"type\"");
    const auto type = msg.at("type").get<std::string>();
    const bool pulse = msg.value("pulse", false);
    if (type == "note_on" || type == "note_off") {
      const int pitch = pitch_field(msg);
      const bool on = type == "note_on" && msg.value("velocity", 1) > 0;
      if (!in_keyboard(pitch)) {
        out.replies.push_back(warning_reply("pitch " + std::to_string(pitch) + " outside the 88-key range, ignored"));
      } else {
        piano_[pitch - score::kPianoLowest] = on ? 1.0 : 0.0;
      }
      out.pulse = pulse;
    } else if (type == "piano_frame") {
      if (!msg.contains("pitches") || !msg.at("pitches").is_array())
        throw std::invalid_argument("piano_frame needs a \"pitches\" array");
      Diagnostics diag;
      std::vector<int> pitches;
      for (const auto& p : msg.at("pitches")) {
        if (!p.is_number_integer()) throw std::invalid_argument("pitches must be integers");
        pitches.push_back(p.get<int>());
      }
      piano_ = score::piano_frame_from_pitches(pitches, &diag);
      for (auto& w : diag.warnings) out.replies.push_back(warning_reply(w));
      out.pulse = pulse;
    } else if (type == "pulse") {
      out.pulse = true;
    } else if (type == "set_model") {
      if (!msg.contains("model_id") || !msg.at("model_id").is_string())
        throw std::invalid_argument("set_model needs a string \"model_id\"");
      out.replies.push_back(set_model(msg.at("model_id").get<std::string>()));
    } else if (type == "set_sampling") {
      out.replies.push_back(set_sampling(msg));
    } else if (type == "reset") {
      if (model_) ring_.reset(static_cast<std::size_t>(model_->horizon), model_->layout.total_dim());
      out.replies.push_back({{"type", "ack"}, {"of", "reset"}});
    } else {
      throw std::invalid_argument("unknown message type '" + type + "'");
    }
  } catch (const std::exception& e) {
    out.replies.push_back(error_reply(std::string("protocol error: ") + e.what()));
    out.pulse = false;
  }
  return out;
}

std::vector<json> Session::handle(const json& msg) { return handle_batch(std::span<const json>(&msg, 1)); }

std::vector<json> Session::handle_batch(std::span<const json> msgs) {
  std::vector<json> replies;
  bool pulse = false;
  for (const auto& m : msgs) {
    auto applied = apply(m);
    for (auto& r : applied.replies) replies.push_back(std::move(r));
    pulse = pulse || applied.pulse;
  }
  if (pulse) replies.push_back(tick());
  return replies;
}

json Session::tick() {
  if (!model_) return error_reply("no model loaded");
  const auto start = std::chrono::steady_clock::now();
  const projection::ModelPredictor predictor(*model_, sampling_);
  projection::ProjectionContext ctx{piano_, ring_.ordered()};
  State frame = predictor.predict(ctx, rng_);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  latency_.record(ms, budget_ms_);

  json parts = json::object();
  for (auto& [name, pitches] : model_->layout.decode(frame)) parts[name] = pitches;
  ring_.push(std::move(frame));
  return {{"type", "orchestra_frame"},
          {"frame", frame_counter_++},
          {"parts", std::move(parts)},
          {"latency_ms", ms},
          {"over_budget", ms > budget_ms_}};
}

}  // namespace lop::live
