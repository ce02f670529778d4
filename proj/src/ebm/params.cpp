#include "lop/ebm.hpp"

#include <cmath>

namespace lop::ebm {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::rbm: return "rbm";
    case ModelKind::crbm: return "crbm";
    case ModelKind::fgcrbm: return "fgcrbm";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "rbm") return ModelKind::rbm;
  if (name == "crbm") return ModelKind::crbm;
  if (name == "fgcrbm") return ModelKind::fgcrbm;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

ModelKind kind_of(const ModelParams& params) {
  return static_cast<ModelKind>(params.index());
}

Dims dims_of(const ModelParams& params) {
  Dims d;
  if (auto* r = std::get_if<RbmParams>(&params)) {
    d.n_v = r->a.size();
    d.n_h = r->b.size();
  } else if (auto* c = std::get_if<CrbmParams>(&params)) {
    d.n_v = c->base.a.size();
    d.n_h = c->base.b.size();
    d.n_x = c->A.rows();
  } else {
    const auto& f = std::get<FgcrbmParams>(params);
    d.n_v = f.a.size();
    d.n_h = f.b.size();
    d.n_x = f.A_xf.rows();
    d.n_z = f.W_zf.rows();
    d.n_f = f.W_vf.cols();
    d.n_fa = f.A_vf.cols();
    d.n_fb = f.B_hf.cols();
  }
  return d;
}

namespace {

void expect_shape(const char* name, const Mat& m, Eigen::Index rows, Eigen::Index cols) {
  if (m.rows() != rows || m.cols() != cols)
    throw DimensionError(std::string(name) + " is " + std::to_string(m.rows()) + "x" +
                         std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
}

void check_rbm(const RbmParams& r) {
  expect_shape("W", r.W, r.a.size(), r.b.size());
}

}  // namespace

void validate(const ModelParams& params) {
  const Dims d = dims_of(params);
  if (auto* r = std::get_if<RbmParams>(&params)) {
    check_rbm(*r);
  } else if (auto* c = std::get_if<CrbmParams>(&params)) {
    check_rbm(c->base);
    expect_shape("A", c->A, d.n_x, d.n_v);
    expect_shape("B", c->B, d.n_x, d.n_h);
  } else {
    const auto& f = std::get<FgcrbmParams>(params);
    if (d.n_f < 1 || d.n_fa < 1 || d.n_fb < 1) throw DimensionError("factor counts must be >= 1");
    expect_shape("W_vf", f.W_vf, d.n_v, d.n_f);
    expect_shape("W_hf", f.W_hf, d.n_h, d.n_f);
    expect_shape("W_zf", f.W_zf, d.n_z, d.n_f);
    expect_shape("A_vf", f.A_vf, d.n_v, d.n_fa);
    expect_shape("A_xf", f.A_xf, d.n_x, d.n_fa);
    expect_shape("A_zf", f.A_zf, d.n_z, d.n_fa);
    expect_shape("B_hf", f.B_hf, d.n_h, d.n_fb);
    expect_shape("B_xf", f.B_xf, d.n_x, d.n_fb);
    expect_shape("B_zf", f.B_zf, d.n_z, d.n_fb);
  }
}

ModelParams zeros(ModelKind kind, const Dims& d) {
  RbmParams base{Mat::Zero(d.n_v, d.n_h), Vec::Zero(d.n_v), Vec::Zero(d.n_h)};
  switch (kind) {
    case ModelKind::rbm:
      return base;
    case ModelKind::crbm:
      return CrbmParams{std::move(base), Mat::Zero(d.n_x, d.n_v), Mat::Zero(d.n_x, d.n_h)};
    case ModelKind::fgcrbm: {
      if (d.n_f < 1 || d.n_fa < 1 || d.n_fb < 1) throw DimensionError("factor counts must be >= 1");
      FgcrbmParams f;
      f.a = Vec::Zero(d.n_v);
      f.b = Vec::Zero(d.n_h);
      f.W_vf = Mat::Zero(d.n_v, d.n_f);
      f.W_hf = Mat::Zero(d.n_h, d.n_f);
      f.W_zf = Mat::Zero(d.n_z, d.n_f);
      f.A_vf = Mat::Zero(d.n_v, d.n_fa);
      f.A_xf = Mat::Zero(d.n_x, d.n_fa);
      f.A_zf = Mat::Zero(d.n_z, d.n_fa);
      f.B_hf = Mat::Zero(d.n_h, d.n_fb);
      f.B_xf = Mat::Zero(d.n_x, d.n_fb);
      f.B_zf = Mat::Zero(d.n_z, d.n_fb);
      return f;
    }
  }
  throw std::invalid_argument("unknown model kind");
}

ModelParams init_gaussian(ModelKind kind, const Dims& dims, double std, std::uint64_t seed) {
  ModelParams p = zeros(kind, dims);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, std);
  for (auto& t : tensors(p)) {
    if (t.is_bias) continue;
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data[i] = normal(rng);
  }
  return p;
}

namespace {

TensorView view(std::string_view name, Mat& m) { return {name, m.data(), m.rows(), m.cols(), false}; }
TensorView view(std::string_view name, Vec& v) { return {name, v.data(), v.size(), 1, true}; }

}  // namespace

std::vector<TensorView> tensors(ModelParams& params) {
  if (auto* r = std::get_if<RbmParams>(&params))
    return {view("W", r->W), view("a", r->a), view("b", r->b)};
  if (auto* c = std::get_if<CrbmParams>(&params))
    return {view("W", c->base.W), view("a", c->base.a), view("b", c->base.b), view("A", c->A),
            view("B", c->B)};
  auto& f = std::get<FgcrbmParams>(params);
  return {view("a", f.a),       view("b", f.b),       view("W_vf", f.W_vf), view("W_hf", f.W_hf),
          view("W_zf", f.W_zf), view("A_vf", f.A_vf), view("A_xf", f.A_xf), view("A_zf", f.A_zf),
          view("B_hf", f.B_hf), view("B_xf", f.B_xf), view("B_zf", f.B_zf)};
}

std::vector<std::string_view> tensor_names(ModelKind kind) {
  Dims d{1, 1, 1, 1, 1, 1, 1};
  ModelParams p = zeros(kind, d);
  std::vector<std::string_view> names;
  for (const auto& t : tensors(p)) names.push_back(t.name);
  return names;
}

bool all_finite(const ModelParams& params) {
  auto& mut = const_cast<ModelParams&>(params);
  for (const auto& t : tensors(mut))
    for (Eigen::Index i = 0; i < t.size(); ++i)
      if (!std::isfinite(t.data[i])) return false;
  return true;
}

}  // namespace lop::ebm
