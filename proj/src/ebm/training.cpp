#include "lop/ebm.hpp"

#include <cmath>
#include <sstream>

namespace lop::ebm {
namespace {

/// Batched sufficient statistics; every matrix holds one sample per column.
void accumulate_columns(const ModelParams& p, const Mat& V, const Mat& H, const Mat& X, const Mat& Z,
                        double w, ModelParams& grad) {
  if (std::holds_alternative<RbmParams>(p)) {
    auto& g = std::get<RbmParams>(grad);
    g.W.noalias() += w * V * H.transpose();
    g.a += w * V.rowwise().sum();
    g.b += w * H.rowwise().sum();
  } else if (std::holds_alternative<CrbmParams>(p)) {
    auto& g = std::get<CrbmParams>(grad);
    g.base.W.noalias() += w * V * H.transpose();
    g.base.a += w * V.rowwise().sum();
    g.base.b += w * H.rowwise().sum();
    g.A.noalias() += w * X * V.transpose();
    g.B.noalias() += w * X * H.transpose();
  } else {
    const auto& f = std::get<FgcrbmParams>(p);
    auto& g = std::get<FgcrbmParams>(grad);
    g.a += w * V.rowwise().sum();
    g.b += w * H.rowwise().sum();

    const Mat SV = f.W_vf.transpose() * V;
    const Mat SH = f.W_hf.transpose() * H;
    const Mat SZ = f.W_zf.transpose() * Z;
    g.W_vf.noalias() += w * V * SH.cwiseProduct(SZ).transpose();
    g.W_hf.noalias() += w * H * SV.cwiseProduct(SZ).transpose();
    g.W_zf.noalias() += w * Z * SV.cwiseProduct(SH).transpose();

    const Mat AV = f.A_vf.transpose() * V;
    const Mat AX = f.A_xf.transpose() * X;
    const Mat AZ = f.A_zf.transpose() * Z;
    g.A_vf.noalias() += w * V * AX.cwiseProduct(AZ).transpose();
    g.A_xf.noalias() += w * X * AV.cwiseProduct(AZ).transpose();
    g.A_zf.noalias() += w * Z * AV.cwiseProduct(AX).transpose();

    const Mat BH = f.B_hf.transpose() * H;
    const Mat BX = f.B_xf.transpose() * X;
    const Mat BZ = f.B_zf.transpose() * Z;
    g.B_hf.noalias() += w * H * BX.cwiseProduct(BZ).transpose();
    g.B_xf.noalias() += w * X * BH.cwiseProduct(BZ).transpose();
    g.B_zf.noalias() += w * Z * BH.cwiseProduct(BX).transpose();
  }
}

Mat as_column(const Vec& v) { return v; }

}  // namespace

void accumulate_statistics(const ModelParams& p, const Vec& v, const Vec& h, const Context& ctx,
                           double weight, ModelParams& grad) {
  accumulate_columns(p, as_column(v), as_column(h), as_column(ctx.x), as_column(ctx.z), weight, grad);
}

CdEstimate cd_gradient(const ModelParams& p, std::span<const Sample> batch, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("CD requires k >= 1");
  if (batch.empty()) throw std::invalid_argument("CD requires a nonempty batch");
  const Dims d = dims_of(p);
  const auto B = static_cast<Eigen::Index>(batch.size());
  const bool uses_x = kind_of(p) != ModelKind::rbm;
  const Eigen::Index nx = uses_x ? d.n_x : 0;
  const Eigen::Index nz = kind_of(p) == ModelKind::fgcrbm ? d.n_z : 0;

  Mat V0(d.n_v, B), H0(d.n_h, B), VK(d.n_v, B), HK(d.n_h, B), X(nx, B), Z(nz, B);
  double recon = 0.0;
  for (Eigen::Index s = 0; s < B; ++s) {
    const Sample& item = batch[static_cast<std::size_t>(s)];
    const Context ctx = uses_x ? item.ctx : Context{};
    const ClampedModel m(p, ctx);
    if (item.v.size() != d.n_v)
      throw DimensionError("training vector has dimension " + std::to_string(item.v.size()) +
                           ", expected " + std::to_string(d.n_v));
    const Vec ph0 = m.cond_hidden(item.v);
    Vec h = sample_bernoulli(ph0, rng);
    Vec v, phk;
    for (int step = 0; step < k; ++step) {
      const Vec pv = m.cond_visible(h);
      if (step == 0) recon += (item.v - pv).squaredNorm() / static_cast<double>(d.n_v);
      v = sample_bernoulli(pv, rng);
      phk = m.cond_hidden(v);
      if (step + 1 < k) h = sample_bernoulli(phk, rng);
    }
    V0.col(s) = item.v;
    H0.col(s) = ph0;
    VK.col(s) = v;
    HK.col(s) = phk;
    if (nx > 0) X.col(s) = ctx.x;
    if (nz > 0) Z.col(s) = ctx.z;
  }
  CdEstimate est{zeros(kind_of(p), d), recon / static_cast<double>(B)};
  const double w = 1.0 / static_cast<double>(B);
  accumulate_columns(p, V0, H0, X, Z, w, est.gradient);
  accumulate_columns(p, VK, HK, X, Z, -w, est.gradient);
  return est;
}

double CdOptimizer::update(ModelParams& params, std::span<const Sample> batch, Rng& rng) {
  CdEstimate est = cd_gradient(params, batch, hyper_.k, rng);
  if (!velocity_ || velocity_->index() != params.index()) velocity_ = zeros(kind_of(params), dims_of(params));

  ModelParams next_params = params;
  ModelParams next_velocity = *velocity_;
  auto theta = tensors(next_params);
  auto vel = tensors(next_velocity);
  auto grad = tensors(est.gradient);
  for (std::size_t t = 0; t < theta.size(); ++t) {
    const double decay = theta[t].is_bias ? 0.0 : hyper_.weight_decay;
    for (Eigen::Index i = 0; i < theta[t].size(); ++i) {
      double& u = vel[t].data[i];
      u = hyper_.momentum * u + hyper_.learning_rate * (grad[t].data[i] - decay * theta[t].data[i]);
      theta[t].data[i] += u;
      if (!std::isfinite(theta[t].data[i])) {
        std::ostringstream msg;
        msg << "non-finite value in tensor " << theta[t].name << " after CD update (learning rate "
            << hyper_.learning_rate << ")";
        throw TrainingDivergence(msg.str());
      }
    }
  }
  params = std::move(next_params);
  velocity_ = std::move(next_velocity);
  return est.reconstruction_error;
}

double cd_k_update(ModelParams& params, std::span<const Sample> batch, const CdHyperParams& hyper,
                   Rng& rng) {
  CdOptimizer opt(hyper);
  return opt.update(params, batch, rng);
}

}  // namespace lop::ebm
