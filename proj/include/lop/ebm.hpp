#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace lop::ebm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Rng = std::mt19937_64;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class TrainingDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ModelKind { rbm, crbm, fgcrbm };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

/// Plain RBM: W is n_v x n_h, a visible bias, b hidden bias.
struct RbmParams {
  Mat W;
  Vec a;
  Vec b;
};

/// Conditional RBM: context x shifts both biases linearly through
/// A (n_x x n_v) and B (n_x x n_h).
struct CrbmParams {
  RbmParams base;
  Mat A;
  Mat B;
};

/// Factored gated conditional RBM. Each three-way tensor is a product of three
/// matrices sharing a factor index:
///   data term    W_vf (n_v x n_f), W_hf (n_h x n_f), W_zf (n_z x n_f)
///   visible bias A_vf (n_v x n_fa), A_xf (n_x x n_fa), A_zf (n_z x n_fa)
///   hidden bias  B_hf (n_h x n_fb), B_xf (n_x x n_fb), B_zf (n_z x n_fb)
struct FgcrbmParams {
  Vec a;
  Vec b;
  Mat W_vf, W_hf, W_zf;
  Mat A_vf, A_xf, A_zf;
  Mat B_hf, B_xf, B_zf;
};

using ModelParams = std::variant<RbmParams, CrbmParams, FgcrbmParams>;

struct Dims {
  Eigen::Index n_v = 0;
  Eigen::Index n_h = 0;
  Eigen::Index n_x = 0;
  Eigen::Index n_z = 0;
  Eigen::Index n_f = 0;
  Eigen::Index n_fa = 0;
  Eigen::Index n_fb = 0;

  friend bool operator==(const Dims&, const Dims&) = default;
};

ModelKind kind_of(const ModelParams& params);
Dims dims_of(const ModelParams& params);

/// Throws DimensionError if the tensors of `params` disagree on any shape.
void validate(const ModelParams& params);

/// Zero-filled parameters of the given shape.
ModelParams zeros(ModelKind kind, const Dims& dims);

/// Weights i.i.d. N(0, std^2), biases zero.
ModelParams init_gaussian(ModelKind kind, const Dims& dims, double std, std::uint64_t seed);

/// Non-owning view of one named tensor inside a parameter set.
struct TensorView {
  std::string_view name;
  double* data;
  Eigen::Index rows;
  Eigen::Index cols;
  bool is_bias;

  Eigen::Index size() const { return rows * cols; }
};

/// Tensors in a fixed, kind-specific order (the serialization order).
std::vector<TensorView> tensors(ModelParams& params);
std::vector<std::string_view> tensor_names(ModelKind kind);

bool all_finite(const ModelParams& params);

/// Context units clamped during conditioning.
///   rbm:    x is the known prefix of v (inpainting); ignored by conditionals
///   crbm:   x is the context vector
///   fgcrbm: x is the context vector, z the gating features
struct Context {
  Vec x;
  Vec z;
};

// --- Elementary math -----------------------------------------------------

/// Logistic function, stable for any finite input.
double sigmoid(double x);
Vec sigmoid(const Vec& x);

double energy(const RbmParams& p, const Vec& v, const Vec& h);
double energy(const CrbmParams& p, const Vec& v, const Vec& h, const Vec& x);
double energy(const FgcrbmParams& p, const Vec& v, const Vec& h, const Vec& x, const Vec& z);
double energy(const ModelParams& p, const Vec& v, const Vec& h, const Context& ctx);

struct DynamicBiases {
  Vec visible;
  Vec hidden;
};

/// a + A^T x and b + B^T x.
DynamicBiases dynamic_biases(const CrbmParams& p, const Vec& x);

/// a_i + sum_f A_vf(i,f) (A_xf^T x)_f (A_zf^T z)_f and the hidden analogue.
DynamicBiases dynamic_biases(const FgcrbmParams& p, const Vec& x, const Vec& z);

/// A model with its context clamped, seen as a plain pairwise RBM with
/// biases `visible_bias()`/`hidden_bias()` and an effective coupling matrix.
/// Holds a reference to the parameters, which must outlive it.
class ClampedModel {
 public:
  ClampedModel(const ModelParams& params, const Context& ctx);

  ModelKind kind() const { return kind_; }
  Eigen::Index n_visible() const { return visible_bias_.size(); }
  Eigen::Index n_hidden() const { return hidden_bias_.size(); }
  const Vec& visible_bias() const { return visible_bias_; }
  const Vec& hidden_bias() const { return hidden_bias_; }

  /// W_eff^T v
  Vec hidden_drive(const Vec& v) const;
  /// W_eff h
  Vec visible_drive(const Vec& h) const;

  Vec cond_hidden(const Vec& v) const;
  Vec cond_visible(const Vec& h) const;
  double energy(const Vec& v, const Vec& h) const;

  /// Materialized n_v x n_h coupling matrix.
  Mat effective_weights() const;

 private:
  ModelKind kind_;
  const Mat* W_ = nullptr;        // rbm / crbm
  const FgcrbmParams* fg_ = nullptr;
  Vec gate_;                       // W_zf^T z for fgcrbm
  Vec visible_bias_;
  Vec hidden_bias_;
};

Vec cond_hidden(const ModelParams& p, const Vec& v, const Context& ctx = {});
Vec cond_visible(const ModelParams& p, const Vec& h, const Context& ctx = {});

// --- Sampling ------------------------------------------------------------

enum class OutputMode { sample, mean_field };

struct SamplingConfig {
  int gibbs_steps = 20;
  std::uint64_t seed = 0;
  OutputMode output_mode = OutputMode::mean_field;
  double threshold = 0.5;

  void validate() const;
};

Vec sample_bernoulli(const Vec& means, Rng& rng);

struct GibbsState {
  Vec v;
  Vec h;
};

/// h ~ p(h|v), then v' ~ p(v|h).
GibbsState gibbs_step(const ModelParams& p, const Vec& v, const Context& ctx, Rng& rng);
GibbsState gibbs_step(const ClampedModel& m, const Vec& v, Rng& rng);

/// Estimates the free visible units with the context clamped. Visible units
/// start from uniform Bernoulli(0.5) draws and run `gibbs_steps` alternating
/// conditional samples. For an RBM the first ctx.x.size() visible units are
/// reset to ctx.x after every step and only the remaining units are returned.
/// Mean-field mode returns the final conditional means (unthresholded).
Vec generate_clamped(const ModelParams& p, const Context& ctx, const SamplingConfig& config,
                     Rng& rng);
Vec generate_clamped(const ModelParams& p, const Context& ctx, const SamplingConfig& config);

/// Thresholds means strictly above `threshold` to 1.
Vec binarize(const Vec& means, double threshold);

// --- Training ------------------------------------------------------------

struct Sample {
  Vec v;
  Context ctx;
};

struct CdHyperParams {
  int k = 10;
  double learning_rate = 1e-3;
  double momentum = 0.5;
  double weight_decay = 1e-4;
};

/// Sufficient statistics of -E at (v, h) for every tensor, with h a hidden mean
/// or sample; added to `grad` scaled by `weight`.
void accumulate_statistics(const ModelParams& p, const Vec& v, const Vec& h, const Context& ctx,
                           double weight, ModelParams& grad);

struct CdEstimate {
  ModelParams gradient;  // ascent direction on the log-likelihood
  double reconstruction_error = 0.0;
};

/// Positive statistics at the data minus statistics after k Gibbs steps started
/// at the data, averaged over the batch. Hidden statistics use conditional means.
CdEstimate cd_gradient(const ModelParams& p, std::span<const Sample> batch, int k, Rng& rng);

/// CD-k with momentum and L2 weight decay (decay applies to weights, not
/// biases). Keeps the velocity between updates.
class CdOptimizer {
 public:
  explicit CdOptimizer(CdHyperParams hyper) : hyper_(hyper) {}

  /// One update on `batch`; returns the mean squared reconstruction error.
  /// Throws TrainingDivergence if any parameter becomes non-finite.
  double update(ModelParams& params, std::span<const Sample> batch, Rng& rng);

  const CdHyperParams& hyper() const { return hyper_; }

 private:
  CdHyperParams hyper_;
  std::optional<ModelParams> velocity_;
};

/// Single CD-k step without momentum history.
double cd_k_update(ModelParams& params, std::span<const Sample> batch, const CdHyperParams& hyper,
                   Rng& rng);

// --- Exact enumeration (tiny models) ---------------------------------------

inline constexpr int kMaxEnumerationUnits = 24;

/// log Z over all binary (v, h) with the context clamped. Refuses when
/// n_v + n_h exceeds kMaxEnumerationUnits.
double log_partition_function(const ModelParams& p, const Context& ctx = {});
double partition_function(const ModelParams& p, const Context& ctx = {});

/// log p(v | ctx) by enumeration of h and Z.
double log_marginal(const ModelParams& p, const Vec& v, const Context& ctx = {});

/// Exact mean negative log-likelihood of `data` (each item under its own context).
double exact_nll(const ModelParams& p, std::span<const Sample> data);

/// Bit pattern of integer `index` over `n` units, least significant bit first.
Vec binary_vector(std::uint64_t index, Eigen::Index n);

}  // namespace lop::ebm
