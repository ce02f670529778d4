#include "lop/eval.hpp"

#include <cstdio>
#include <sstream>

namespace lop::eval {

double accuracy_percent(const Tally& t) {
  const std::uint64_t denom = t.tp + t.fp + t.fn;
  if (denom == 0) return 100.0;
  return 100.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
}

Tally frame_tally(const State& truth, const State& pred) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("truth and prediction differ in dimension (" + std::to_string(truth.size()) +
                                " vs " + std::to_string(pred.size()) + ")");
  Tally t;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    const bool on = truth[i] > 0.5, predicted = pred[i] > 0.5;
    if (on && predicted) ++t.tp;
    else if (predicted) ++t.fp;
    else if (on) ++t.fn;
  }
  return t;
}

AccuracyReport accuracy(std::span<const State> truth, std::span<const State> pred) {
  if (truth.size() != pred.size())
    throw std::invalid_argument("truth has " + std::to_string(truth.size()) + " frames, prediction has " +
                                std::to_string(pred.size()));
  AccuracyReport r;
  r.per_index.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    r.per_index.push_back(frame_tally(truth[i], pred[i]));
    r.total += r.per_index.back();
  }
  r.accuracy = accuracy_percent(r.total);
  return r;
}

void AccuracyReport::merge(const AccuracyReport& other) {
  per_index.insert(per_index.end(), other.per_index.begin(), other.per_index.end());
  total += other.total;
  accuracy = accuracy_percent(total);
}

namespace {

std::string two_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

nlohmann::json AccuracyReport::to_json() const {
  return {{"model", model_id},
          {"granularity", std::string(projection::to_string(granularity))},
          {"Q", quantization},
          {"tp", total.tp},
          {"fp", total.fp},
          {"fn", total.fn},
          {"accuracy_percent", std::stod(two_decimals(accuracy))}};
}

std::string AccuracyReport::to_markdown() const {
  std::ostringstream out;
  out << "| model | granularity | Q | TP | FP | FN | accuracy (%) |\n"
      << "|---|---|---|---|---|---|---|\n"
      << "| " << model_id << " | " << projection::to_string(granularity) << " | " << quantization << " | "
      << total.tp << " | " << total.fp << " | " << total.fn << " | " << two_decimals(accuracy) << " |\n";
  return out.str();
}

double CorruptionReport::relative_drop() const {
  if (normal.accuracy <= 0.0) return 0.0;
  return (normal.accuracy - corrupted.accuracy) / normal.accuracy;
}

nlohmann::json CorruptionReport::to_json() const {
  return {{"normal", normal.to_json()}, {"corrupted", corrupted.to_json()}, {"relative_drop", relative_drop()}};
}

std::string bias_report_markdown(std::span<const BiasRow> rows) {
  std::ostringstream out;
  out << "| repeat baseline | accuracy (%) |\n|---|---|\n";
  for (const auto& r : rows) out << "| " << r.label << " | " << two_decimals(r.accuracy) << " |\n";
  return out.str();
}

}  // namespace lop::eval
