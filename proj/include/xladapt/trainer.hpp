#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xladapt/encoder.hpp"
#include "xladapt/errors.hpp"
#include "xladapt/io.hpp"
#include "xladapt/rng.hpp"
#include "xladapt/triplet.hpp"

namespace xladapt::trainer {

struct TrainConfig {
  double tau = 0.05;
  double base_lr = 5e-5;
  double warmup_fraction = 0.10;
  int batch_size = 32;
  int epochs = 1;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  uint64_t seed = 0;
};

// Temperature-scaled triplet NLL over the pair of cosines, in the stable
// softplus form log(1 + exp((cos_sn - cos_sp)/tau)). Safe down to tau = 1e-4.
inline double triplet_loss(double cos_sp, double cos_sn, double tau) {
  if (!(tau > 0.0)) throw ConfigError("triplet_loss: tau must be > 0");
  double delta = (cos_sn - cos_sp) / tau;
  if (delta > 0.0) return delta + std::log1p(std::exp(-delta));
  return std::log1p(std::exp(delta));
}

namespace detail {

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// (dL/dcos_sp, dL/dcos_sn) = (-s, +s) with s = sigmoid((cos_sn-cos_sp)/tau)/tau,
// so the two partials sum to zero exactly.
inline std::pair<double, double> triplet_loss_grads(double cos_sp, double cos_sn, double tau) {
  if (!(tau > 0.0)) throw ConfigError("triplet_loss_grads: tau must be > 0");
  double s = detail::sigmoid((cos_sn - cos_sp) / tau) / tau;
  return {-s, s};
}

// Linear warm-up to base_lr over the first ceil(warmup_fraction * total)
// steps, constant afterwards. t is 1-indexed.
inline double lr_at_step(int64_t t, int64_t total_steps, const TrainConfig& config) {
  if (t < 1 || t > total_steps)
    throw ConfigError("lr_at_step: step " + std::to_string(t) + " outside [1, " +
                      std::to_string(total_steps) + "]");
  // the 1e-9 slack keeps e.g. 0.1 * 100 from ceiling to 11
  auto warmup = static_cast<int64_t>(
      std::ceil(config.warmup_fraction * static_cast<double>(total_steps) - 1e-9));
  if (warmup <= 0) return config.base_lr;
  double scale = std::min(1.0, static_cast<double>(t) / static_cast<double>(warmup));
  return config.base_lr * scale;
}

struct OptimizerState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  int64_t step = 0;
};

inline OptimizerState init_optimizer(const encoder::EncoderParams& params) {
  OptimizerState s;
  s.m.assign(params.table.size(), 0.0);
  s.v.assign(params.table.size(), 0.0);
  return s;
}

// One decoupled-weight-decay Adam update with bias correction.
inline void adamw_step(encoder::EncoderParams& params, std::span<const double> grads,
                       OptimizerState& state, double lr, const TrainConfig& config) {
  if (grads.size() != params.table.size() || state.m.size() != params.table.size())
    throw DataError("adamw_step: shape mismatch");
  for (double g : grads) {
    if (!std::isfinite(g))
      throw NumericError("adamw_step: non-finite gradient at step " +
                         std::to_string(state.step + 1));
  }
  ++state.step;
  const double b1 = config.beta1, b2 = config.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (size_t i = 0; i < grads.size(); ++i) {
    double g = grads[i];
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
    double mhat = state.m[i] / bc1;
    double vhat = state.v[i] / bc2;
    params.table[i] -=
        lr * (mhat / (std::sqrt(vhat) + config.eps) + config.weight_decay * params.table[i]);
  }
}

struct StepMetrics {
  int64_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
  double mean_cos_sp = 0.0;
  double mean_cos_sn = 0.0;
};

struct TrainMetrics {
  std::vector<StepMetrics> steps;
  double epoch_mean_cos_sp = 0.0;  // triplet-weighted, measured pre-update
  double epoch_mean_cos_sn = 0.0;
  int64_t step_count = 0;
};

// Loss and parameter gradient for one triplet. The cosine is the dot product
// of the unit embeddings; encode_backward's projection completes the chain.
struct TripletForward {
  double loss = 0.0;
  double cos_sp = 0.0;
  double cos_sn = 0.0;
};

inline TripletForward triplet_forward_backward(const mining::Triplet& t,
                                               const encoder::EncoderParams& params, double tau,
                                               std::vector<double>& grad_accum,
                                               double grad_weight) {
  auto fs = encoder::encode_detailed(t.source, params);
  auto fp = encoder::encode_detailed(t.positive, params);
  auto fn = encoder::encode_detailed(t.negative, params);
  const size_t d = fs.embedding.values.size();

  auto dot = [d](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t j = 0; j < d; ++j) s += a[j] * b[j];
    return std::clamp(s, -1.0, 1.0);
  };
  TripletForward out;
  out.cos_sp = dot(fs.embedding.values, fp.embedding.values);
  out.cos_sn = dot(fs.embedding.values, fn.embedding.values);
  out.loss = triplet_loss(out.cos_sp, out.cos_sn, tau);

  auto [gsp, gsn] = triplet_loss_grads(out.cos_sp, out.cos_sn, tau);
  std::vector<double> ds(d), dp(d), dn(d);
  for (size_t j = 0; j < d; ++j) {
    ds[j] = gsp * fp.embedding.values[j] + gsn * fn.embedding.values[j];
    dp[j] = gsp * fs.embedding.values[j];
    dn[j] = gsn * fs.embedding.values[j];
  }
  auto accumulate = [&](const encoder::EncodeResult& fwd, const std::vector<double>& g) {
    auto sparse = encoder::encode_backward_from(fwd, params, g);
    for (const auto& [bucket, row] : sparse) {
      double* dst = grad_accum.data() + static_cast<size_t>(bucket) * d;
      for (size_t j = 0; j < d; ++j) dst[j] += grad_weight * row[j];
    }
  };
  accumulate(fs, ds);
  accumulate(fp, dp);
  accumulate(fn, dn);
  return out;
}

// Loss and parameter gradient of the mean triplet loss over a batch, as one
// dense table-shaped vector. Accumulation order is the batch order.
inline double batch_loss_and_grad(std::span<const mining::Triplet> batch,
                                  const encoder::EncoderParams& params, double tau,
                                  std::vector<double>& grad_out) {
  grad_out.assign(params.table.size(), 0.0);
  const double w = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& t : batch) {
    loss += w * triplet_forward_backward(t, params, tau, grad_out, w).loss;
  }
  return loss;
}

// One pass over the triplets: shuffle once, batches of batch_size (last may
// be smaller), one AdamW step per batch. Deterministic per seed.
inline TrainMetrics train_one_epoch(const std::vector<mining::Triplet>& triplets,
                                    encoder::EncoderParams& params, OptimizerState& state,
                                    const TrainConfig& config, int epoch_index = 0) {
  if (triplets.empty()) throw DataError("train_one_epoch: empty triplet set");
  if (config.batch_size < 1) throw ConfigError("train_one_epoch: batch_size must be >= 1");
  if (!(config.tau > 0.0)) throw ConfigError("train_one_epoch: tau must be > 0");

  std::vector<size_t> order(triplets.size());
  std::iota(order.begin(), order.end(), 0);
  rng::Rng shuffler(rng::derive(rng::derive(config.seed, "epoch-shuffle"),
                                static_cast<uint64_t>(epoch_index)));
  shuffler.shuffle(order);

  const size_t bs = static_cast<size_t>(config.batch_size);
  const int64_t total_steps = static_cast<int64_t>((triplets.size() + bs - 1) / bs);

  TrainMetrics metrics;
  std::vector<double> grad(params.table.size(), 0.0);
  double sum_cos_sp = 0.0, sum_cos_sn = 0.0;

  for (int64_t step = 1; step <= total_steps; ++step) {
    size_t begin = static_cast<size_t>(step - 1) * bs;
    size_t end = std::min(begin + bs, triplets.size());
    const size_t count = end - begin;
    const double w = 1.0 / static_cast<double>(count);

    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0, bc_sp = 0.0, bc_sn = 0.0;
    for (size_t k = begin; k < end; ++k) {
      auto fwd = triplet_forward_backward(triplets[order[k]], params, config.tau, grad, w);
      loss += w * fwd.loss;
      bc_sp += w * fwd.cos_sp;
      bc_sn += w * fwd.cos_sn;
    }
    if (!std::isfinite(loss)) {
      std::string ids;
      for (size_t k = begin; k < end; ++k)
        ids += (ids.empty() ? "" : ",") + std::to_string(order[k]);
      throw NumericError("train_one_epoch: non-finite loss at step " + std::to_string(step) +
                         " (triplets " + ids + ")");
    }
    double lr = lr_at_step(step, total_steps, config);
    adamw_step(params, grad, state, lr, config);

    metrics.steps.push_back({step, lr, loss, bc_sp, bc_sn});
    sum_cos_sp += bc_sp * static_cast<double>(count);
    sum_cos_sn += bc_sn * static_cast<double>(count);
  }
  metrics.step_count = total_steps;
  metrics.epoch_mean_cos_sp = sum_cos_sp / static_cast<double>(triplets.size());
  metrics.epoch_mean_cos_sn = sum_cos_sn / static_cast<double>(triplets.size());
  return metrics;
}

// Mean cos(s,p) and cos(s,n) of a triplet set under fixed params.
inline std::pair<double, double> mean_cosines(const std::vector<mining::Triplet>& triplets,
                                              const encoder::EncoderParams& params) {
  if (triplets.empty()) throw DataError("mean_cosines: empty triplet set");
  double sp = 0.0, sn = 0.0;
  for (const auto& t : triplets) {
    auto es = encoder::encode(t.source, params);
    sp += encoder::cosine(es, encoder::encode(t.positive, params));
    sn += encoder::cosine(es, encoder::encode(t.negative, params));
  }
  const double n = static_cast<double>(triplets.size());
  return {sp / n, sn / n};
}

inline void write_metrics_csv(std::ostream& os, const TrainMetrics& metrics,
                              const TrainConfig& config) {
  os << "# tau=" << io::fmt_full(config.tau) << " base_lr=" << io::fmt_full(config.base_lr)
     << " warmup_fraction=" << io::fmt_full(config.warmup_fraction)
     << " batch_size=" << config.batch_size << " weight_decay=" << io::fmt_full(config.weight_decay)
     << " beta1=" << io::fmt_full(config.beta1) << " beta2=" << io::fmt_full(config.beta2)
     << " eps=" << io::fmt_full(config.eps) << " seed=" << config.seed << '\n';
  io::csv_row(os, {"step", "lr", "loss", "mean_cos_sp", "mean_cos_sn"});
  for (const auto& s : metrics.steps) {
    io::csv_row(os, {std::to_string(s.step), io::fmt_full(s.lr), io::fmt_full(s.loss),
                     io::fmt_full(s.mean_cos_sp), io::fmt_full(s.mean_cos_sn)});
  }
}

}  // namespace xladapt::trainer
