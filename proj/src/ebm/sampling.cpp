#include "lop/ebm.hpp"

namespace lop::ebm {

void SamplingConfig::validate() const {
  if (gibbs_steps < 1) throw std::invalid_argument("gibbs_steps must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw std::invalid_argument("threshold must lie in (0, 1]");
}

Vec sample_bernoulli(const Vec& means, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vec out(means.size());
  for (Eigen::Index i = 0; i < means.size(); ++i) out[i] = unif(rng) < means[i] ? 1.0 : 0.0;
  return out;
}

GibbsState gibbs_step(const ClampedModel& m, const Vec& v, Rng& rng) {
  GibbsState s;
  s.h = sample_bernoulli(m.cond_hidden(v), rng);
  s.v = sample_bernoulli(m.cond_visible(s.h), rng);
  return s;
}

GibbsState gibbs_step(const ModelParams& p, const Vec& v, const Context& ctx, Rng& rng) {
  return gibbs_step(ClampedModel(p, ctx), v, rng);
}

Vec binarize(const Vec& means, double threshold) {
  return (means.array() > threshold).cast<double>().matrix();
}

Vec generate_clamped(const ModelParams& p, const Context& ctx, const SamplingConfig& config,
                     Rng& rng) {
  config.validate();
  const Dims d = dims_of(p);
  if (d.n_v == 0 || d.n_h == 0) throw std::logic_error("generate_clamped: model is not configured");
  const ClampedModel m(p, ctx);
  // Only an RBM clamps part of its visible layer; conditional models clamp x/z instead.
  const Eigen::Index clamped = m.kind() == ModelKind::rbm ? ctx.x.size() : 0;
  const Eigen::Index free = d.n_v - clamped;

  Vec v = sample_bernoulli(Vec::Constant(d.n_v, 0.5), rng);
  if (clamped > 0) v.head(clamped) = ctx.x;

  for (int step = 0; step < config.gibbs_steps; ++step) {
    const Vec h = sample_bernoulli(m.cond_hidden(v), rng);
    Vec means = m.cond_visible(h);
    if (step + 1 == config.gibbs_steps && config.output_mode == OutputMode::mean_field)
      return means.tail(free);
    v = sample_bernoulli(means, rng);
    if (clamped > 0) v.head(clamped) = ctx.x;
  }
  return v.tail(free);
}

Vec generate_clamped(const ModelParams& p, const Context& ctx, const SamplingConfig& config) {
  Rng rng(config.seed);
  return generate_clamped(p, ctx, config, rng);
}

}  // namespace lop::ebm
