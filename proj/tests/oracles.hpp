#pragma once

// Reference implementations written directly from the model definitions with
// plain loops; shared by the unit tests and the acceptance binary.

#include <cmath>
#include <random>
#include <vector>

#include "lop/ebm.hpp"

namespace oracle {

using lop::ebm::Context;
using lop::ebm::Mat;
using lop::ebm::ModelParams;
using lop::ebm::Vec;

inline double naive_energy(const ModelParams& params, const Vec& v, const Vec& h, const Context& ctx) {
  using namespace lop::ebm;
  if (auto* p = std::get_if<RbmParams>(&params)) {
    double e = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) e -= p->a[i] * v[i];
    for (Eigen::Index j = 0; j < h.size(); ++j) e -= p->b[j] * h[j];
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (Eigen::Index j = 0; j < h.size(); ++j) e -= v[i] * p->W(i, j) * h[j];
    return e;
  }
  if (auto* p = std::get_if<CrbmParams>(&params)) {
    double e = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      double ai = p->base.a[i];
      for (Eigen::Index k = 0; k < ctx.x.size(); ++k) ai += p->A(k, i) * ctx.x[k];
      e -= ai * v[i];
    }
    for (Eigen::Index j = 0; j < h.size(); ++j) {
      double bj = p->base.b[j];
      for (Eigen::Index k = 0; k < ctx.x.size(); ++k) bj += p->B(k, j) * ctx.x[k];
      e -= bj * h[j];
    }
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (Eigen::Index j = 0; j < h.size(); ++j) e -= v[i] * p->base.W(i, j) * h[j];
    return e;
  }
  const auto& p = std::get<FgcrbmParams>(params);
  double e = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    double ai = p.a[i];
    for (Eigen::Index f = 0; f < p.A_vf.cols(); ++f)
      for (Eigen::Index k = 0; k < ctx.x.size(); ++k)
        for (Eigen::Index l = 0; l < ctx.z.size(); ++l) ai += p.A_vf(i, f) * p.A_xf(k, f) * p.A_zf(l, f) * ctx.x[k] * ctx.z[l];
    e -= ai * v[i];
  }
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    double bj = p.b[j];
    for (Eigen::Index f = 0; f < p.B_hf.cols(); ++f)
      for (Eigen::Index k = 0; k < ctx.x.size(); ++k)
        for (Eigen::Index l = 0; l < ctx.z.size(); ++l) bj += p.B_hf(j, f) * p.B_xf(k, f) * p.B_zf(l, f) * ctx.x[k] * ctx.z[l];
    e -= bj * h[j];
  }
  for (Eigen::Index f = 0; f < p.W_vf.cols(); ++f)
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (Eigen::Index j = 0; j < h.size(); ++j)
        for (Eigen::Index l = 0; l < ctx.z.size(); ++l)
          e -= p.W_vf(i, f) * p.W_hf(j, f) * p.W_zf(l, f) * v[i] * h[j] * ctx.z[l];
  return e;
}

inline Vec bits(unsigned long long index, Eigen::Index n) {
  Vec out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = static_cast<double>((index >> i) & 1ULL);
  return out;
}

/// Unnormalized Boltzmann table exp(-E(v,h)) over every joint configuration.
struct Table {
  Eigen::Index n_v, n_h;
  std::vector<double> weight;  // index = v_index + (h_index << n_v)
  double Z = 0;

  double at(unsigned long long vi, unsigned long long hi) const { return weight[vi + (hi << n_v)]; }
};

inline Table enumerate(const ModelParams& params, const Context& ctx) {
  const auto d = lop::ebm::dims_of(params);
  Table t{d.n_v, d.n_h, {}, 0};
  const auto nv = 1ULL << d.n_v, nh = 1ULL << d.n_h;
  t.weight.resize(nv * nh);
  for (unsigned long long hi = 0; hi < nh; ++hi)
    for (unsigned long long vi = 0; vi < nv; ++vi) {
      const double w = std::exp(-naive_energy(params, bits(vi, d.n_v), bits(hi, d.n_h), ctx));
      t.weight[vi + (hi << d.n_v)] = w;
      t.Z += w;
    }
  return t;
}

/// p(h_j = 1 | v) from the joint table.
inline Vec cond_hidden(const Table& t, unsigned long long vi) {
  Vec num = Vec::Zero(t.n_h);
  double den = 0;
  for (unsigned long long hi = 0; hi < (1ULL << t.n_h); ++hi) {
    const double w = t.at(vi, hi);
    den += w;
    for (Eigen::Index j = 0; j < t.n_h; ++j)
      if ((hi >> j) & 1ULL) num[j] += w;
  }
  return num / den;
}

inline Vec cond_visible(const Table& t, unsigned long long hi) {
  Vec num = Vec::Zero(t.n_v);
  double den = 0;
  for (unsigned long long vi = 0; vi < (1ULL << t.n_v); ++vi) {
    const double w = t.at(vi, hi);
    den += w;
    for (Eigen::Index i = 0; i < t.n_v; ++i)
      if ((vi >> i) & 1ULL) num[i] += w;
  }
  return num / den;
}

/// p(v) for every visible configuration.
inline std::vector<double> marginal_visible(const Table& t) {
  std::vector<double> p(1ULL << t.n_v, 0.0);
  for (unsigned long long hi = 0; hi < (1ULL << t.n_h); ++hi)
    for (unsigned long long vi = 0; vi < p.size(); ++vi) p[vi] += t.at(vi, hi) / t.Z;
  return p;
}

/// Every tensor, biases included, filled with N(0, scale^2).
inline void randomize(ModelParams& params, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, scale);
  for (auto& tv : lop::ebm::tensors(params))
    for (Eigen::Index i = 0; i < tv.size(); ++i) tv.data[i] = nd(rng);
}

inline Vec random_bits(Eigen::Index n, std::mt19937_64& rng) {
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = static_cast<double>(rng() & 1ULL);
  return v;
}

}  // namespace oracle
