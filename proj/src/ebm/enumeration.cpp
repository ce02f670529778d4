#include "lop/ebm.hpp"

#include <cmath>
#include <limits>

namespace lop::ebm {
namespace {

/// Streaming log-sum-exp.
struct LogSum {
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;

  void add(double x) {
    if (x <= max) {
      sum += std::exp(x - max);
    } else {
      sum = sum * std::exp(max - x) + 1.0;
      max = x;
    }
  }
  double value() const { return max + std::log(sum); }
};

Context conditioning(const ModelParams& p, const Context& ctx) {
  // An RBM's clamp prefix never enters its distribution.
  return kind_of(p) == ModelKind::rbm ? Context{} : ctx;
}

void guard(const Dims& d) {
  if (d.n_v + d.n_h > kMaxEnumerationUnits)
    throw std::domain_error("enumeration refused: n_v + n_h = " + std::to_string(d.n_v + d.n_h) +
                            " exceeds " + std::to_string(kMaxEnumerationUnits));
}

/// log sum_h exp(-E(v, h)) by explicit enumeration of h.
double log_sum_hidden(const ClampedModel& m, const Mat& W, const Vec& v) {
  const double visible_term = m.visible_bias().dot(v);
  const Vec drive = m.hidden_bias() + W.transpose() * v;
  LogSum acc;
  const std::uint64_t nh_states = std::uint64_t{1} << m.n_hidden();
  for (std::uint64_t hi = 0; hi < nh_states; ++hi) {
    double e = visible_term;
    for (Eigen::Index j = 0; j < m.n_hidden(); ++j)
      if ((hi >> j) & 1U) e += drive[j];
    acc.add(e);
  }
  return acc.value();
}

}  // namespace

Vec binary_vector(std::uint64_t index, Eigen::Index n) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>((index >> i) & 1U);
  return v;
}

double log_partition_function(const ModelParams& p, const Context& ctx) {
  const Dims d = dims_of(p);
  guard(d);
  const ClampedModel m(p, conditioning(p, ctx));
  const Mat W = m.effective_weights();
  LogSum acc;
  const std::uint64_t nv_states = std::uint64_t{1} << d.n_v;
  for (std::uint64_t vi = 0; vi < nv_states; ++vi) acc.add(log_sum_hidden(m, W, binary_vector(vi, d.n_v)));
  return acc.value();
}

double partition_function(const ModelParams& p, const Context& ctx) {
  return std::exp(log_partition_function(p, ctx));
}

double log_marginal(const ModelParams& p, const Vec& v, const Context& ctx) {
  const Context c = conditioning(p, ctx);
  const ClampedModel m(p, c);
  return log_sum_hidden(m, m.effective_weights(), v) - log_partition_function(p, c);
}

double exact_nll(const ModelParams& p, std::span<const Sample> data) {
  if (data.empty()) throw std::invalid_argument("exact_nll: empty data");
  double total = 0.0;
  const Context* cached_ctx = nullptr;
  double log_z = 0.0;
  for (const auto& item : data) {
    const Context c = conditioning(p, item.ctx);
    const bool reuse = cached_ctx && conditioning(p, *cached_ctx).x == c.x &&
                       conditioning(p, *cached_ctx).z == c.z;
    if (!reuse) {
      log_z = log_partition_function(p, c);
      cached_ctx = &item.ctx;
    }
    const ClampedModel m(p, c);
    total -= log_sum_hidden(m, m.effective_weights(), item.v) - log_z;
  }
  return total / static_cast<double>(data.size());
}

}  // namespace lop::ebm
