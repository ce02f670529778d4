#include "lop/ebm.hpp"

#include <cmath>

namespace lop::ebm {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Vec sigmoid(const Vec& x) {
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = sigmoid(x[i]);
  return out;
}

namespace {

void expect_size(const char* what, const Vec& v, Eigen::Index n) {
  if (v.size() != n)
    throw DimensionError(std::string(what) + " has dimension " + std::to_string(v.size()) +
                         ", expected " + std::to_string(n));
}

}  // namespace

double energy(const RbmParams& p, const Vec& v, const Vec& h) {
  expect_size("v", v, p.a.size());
  expect_size("h", h, p.b.size());
  return -p.a.dot(v) - v.dot(p.W * h) - p.b.dot(h);
}

DynamicBiases dynamic_biases(const CrbmParams& p, const Vec& x) {
  expect_size("x", x, p.A.rows());
  return {p.base.a + p.A.transpose() * x, p.base.b + p.B.transpose() * x};
}

DynamicBiases dynamic_biases(const FgcrbmParams& p, const Vec& x, const Vec& z) {
  expect_size("x", x, p.A_xf.rows());
  expect_size("z", z, p.A_zf.rows());
  const Vec ga = (p.A_xf.transpose() * x).cwiseProduct(p.A_zf.transpose() * z);
  const Vec gb = (p.B_xf.transpose() * x).cwiseProduct(p.B_zf.transpose() * z);
  return {p.a + p.A_vf * ga, p.b + p.B_hf * gb};
}

double energy(const CrbmParams& p, const Vec& v, const Vec& h, const Vec& x) {
  expect_size("v", v, p.base.a.size());
  expect_size("h", h, p.base.b.size());
  const auto dyn = dynamic_biases(p, x);
  return -dyn.visible.dot(v) - v.dot(p.base.W * h) - dyn.hidden.dot(h);
}

double energy(const FgcrbmParams& p, const Vec& v, const Vec& h, const Vec& x, const Vec& z) {
  expect_size("v", v, p.a.size());
  expect_size("h", h, p.b.size());
  const auto dyn = dynamic_biases(p, x, z);
  const Vec sv = p.W_vf.transpose() * v;
  const Vec sh = p.W_hf.transpose() * h;
  const Vec sz = p.W_zf.transpose() * z;
  return -dyn.visible.dot(v) - sv.cwiseProduct(sh).dot(sz) - dyn.hidden.dot(h);
}

double energy(const ModelParams& p, const Vec& v, const Vec& h, const Context& ctx) {
  return std::visit(
      [&](const auto& params) -> double {
        using T = std::decay_t<decltype(params)>;
        if constexpr (std::is_same_v<T, RbmParams>) return energy(params, v, h);
        else if constexpr (std::is_same_v<T, CrbmParams>) return energy(params, v, h, ctx.x);
        else return energy(params, v, h, ctx.x, ctx.z);
      },
      p);
}

ClampedModel::ClampedModel(const ModelParams& params, const Context& ctx) : kind_(kind_of(params)) {
  if (auto* r = std::get_if<RbmParams>(&params)) {
    if (ctx.x.size() > r->a.size())
      throw DimensionError("clamped prefix longer than the visible layer");
    if (ctx.z.size() != 0) throw DimensionError("rbm takes no feature units");
    W_ = &r->W;
    visible_bias_ = r->a;
    hidden_bias_ = r->b;
  } else if (auto* c = std::get_if<CrbmParams>(&params)) {
    if (ctx.z.size() != 0) throw DimensionError("crbm takes no feature units");
    auto dyn = dynamic_biases(*c, ctx.x);
    W_ = &c->base.W;
    visible_bias_ = std::move(dyn.visible);
    hidden_bias_ = std::move(dyn.hidden);
  } else {
    const auto& f = std::get<FgcrbmParams>(params);
    auto dyn = dynamic_biases(f, ctx.x, ctx.z);
    fg_ = &f;
    gate_ = f.W_zf.transpose() * ctx.z;
    visible_bias_ = std::move(dyn.visible);
    hidden_bias_ = std::move(dyn.hidden);
  }
}

Vec ClampedModel::hidden_drive(const Vec& v) const {
  expect_size("v", v, n_visible());
  if (W_) return W_->transpose() * v;
  return fg_->W_hf * (fg_->W_vf.transpose() * v).cwiseProduct(gate_);
}

Vec ClampedModel::visible_drive(const Vec& h) const {
  expect_size("h", h, n_hidden());
  if (W_) return *W_ * h;
  return fg_->W_vf * (fg_->W_hf.transpose() * h).cwiseProduct(gate_);
}

Vec ClampedModel::cond_hidden(const Vec& v) const {
  return sigmoid(Vec(hidden_bias_ + hidden_drive(v)));
}

Vec ClampedModel::cond_visible(const Vec& h) const {
  return sigmoid(Vec(visible_bias_ + visible_drive(h)));
}

double ClampedModel::energy(const Vec& v, const Vec& h) const {
  return -visible_bias_.dot(v) - v.dot(visible_drive(h)) - hidden_bias_.dot(h);
}

Mat ClampedModel::effective_weights() const {
  if (W_) return *W_;
  return fg_->W_vf * gate_.asDiagonal() * fg_->W_hf.transpose();
}

Vec cond_hidden(const ModelParams& p, const Vec& v, const Context& ctx) {
  return ClampedModel(p, ctx).cond_hidden(v);
}

Vec cond_visible(const ModelParams& p, const Vec& h, const Context& ctx) {
  return ClampedModel(p, ctx).cond_visible(h);
}

}  // namespace lop::ebm
