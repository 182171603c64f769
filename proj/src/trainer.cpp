#include "ksopt/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "ksopt/metrics.hpp"

namespace ksopt {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::PhiAlone: return "phi_alone";
    case Strategy::ThetaAlone: return "theta_alone";
    case Strategy::Joint: return "joint";
  }
  return "joint";
}

std::string to_string(Arch a) {
  return a == Arch::Direct ? "direct" : "unrolled";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "phi_alone") return Strategy::PhiAlone;
  if (s == "theta_alone") return Strategy::ThetaAlone;
  if (s == "joint") return Strategy::Joint;
  throw std::invalid_argument("unknown strategy: " + s);
}

Arch arch_from_string(const std::string& s) {
  if (s == "unrolled") return Arch::Unrolled;
  if (s == "direct") return Arch::Direct;
  throw std::invalid_argument("unknown arch: " + s);
}

void adam_step(RVec& x, const RVec& grad, AdamState& state,
               const AdamParams& params) {
  if (state.m.size() != x.size()) state.reset(x.size());
  if (grad.size() != x.size())
    throw std::invalid_argument("adam_step: gradient size mismatch");
  state.t += 1;
  state.m = params.beta1 * state.m + (1.0 - params.beta1) * grad;
  state.v = params.beta2 * state.v +
            (1.0 - params.beta2) * grad.cwiseProduct(grad);
  const double mc = 1.0 - std::pow(params.beta1, double(state.t));
  const double vc = 1.0 - std::pow(params.beta2, double(state.t));
  for (Index i = 0; i < x.size(); ++i) {
    const double mhat = state.m[i] / mc;
    const double vhat = state.v[i] / vc;
    x[i] -= params.lr * mhat / (std::sqrt(vhat) + params.eps);
  }
}

namespace {

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n) across up to `threads` workers with strided
// assignment. Each index runs exactly once, so result slots indexed by i
// keep reductions order-independent.
void parallel_for(Index n, int threads, const std::function<void(Index)>& fn) {
  const int t = std::min<Index>(std::max(1, threads), std::max<Index>(1, n));
  if (t <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  for (int w = 0; w < t; ++w) {
    workers.emplace_back([&, w]() {
      try {
        for (Index i = w; i < n; i += t) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& th : workers) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_stage_finite(const CMat& m, const char* stage, int step) {
  if (!m.allFinite())
    throw std::runtime_error(std::string("reconstruct: non-finite output of ") +
                             stage + " at unroll step " + std::to_string(step));
}

struct UnrollTrace {
  std::vector<CMat> dc_out;   // x_1 .. x_K
  std::vector<CMat> den_out;  // z_1 .. z_{K-1}
};

CMat unroll_forward(const ModelState& state, const CoilSet& coils,
                    const SamplingOperator& op, const std::vector<CMat>& b,
                    UnrollTrace* trace) {
  if (state.arch == Arch::Direct) {
    CMat g = apply_adjoint(op, coils, b);
    check_stage_finite(g, "adjoint", 0);
    CMat out = denoise(state.phi, g);
    check_stage_finite(out, "denoise", 0);
    if (trace) trace->dc_out.push_back(std::move(g));
    return out;
  }

  const int k_total = state.unroll_depth;
  CMat zero = CMat::Zero(op.image_rows(), op.image_cols());
  CMat x = dc_solve(op, coils, b, zero, state.cg).image;
  check_stage_finite(x, "dc_solve", 1);
  if (trace) trace->dc_out.push_back(x);
  for (int k = 2; k <= k_total; ++k) {
    CMat z = denoise(state.phi, x);
    check_stage_finite(z, "denoise", k - 1);
    if (trace) trace->den_out.push_back(z);
    x = dc_solve(op, coils, b, z, state.cg).image;
    check_stage_finite(x, "dc_solve", k);
    if (trace) trace->dc_out.push_back(x);
  }
  return x;
}

std::vector<CMat> acquire_fixed(const SamplingOperator& op, const CoilSet& coils,
                                const CMat& rho,
                                const std::vector<CMat>& noise, double sigma) {
  std::vector<CMat> b = apply_forward(op, coils, rho);
  if (sigma > 0.0) {
    if (noise.size() != b.size())
      throw std::invalid_argument("acquisition noise blocks missing");
    for (std::size_t j = 0; j < b.size(); ++j) b[j] += sigma * noise[j];
  }
  return b;
}

struct ItemGrad {
  double loss = 0.0;
  GradBuffer phi_grad;
  ThetaGrad theta_grad;
};

// Reverse mode for one item through acquisition + reconstruction.
ItemGrad backward_item(const ModelState& state, const CoilSet& coils,
                       const SamplingOperator& op, const CMat& rho,
                       const std::vector<CMat>& noise, double sigma,
                       bool want_phi, bool want_theta) {
  ItemGrad out;
  std::vector<CMat> b = acquire_fixed(op, coils, rho, noise, sigma);

  UnrollTrace trace;
  CMat recon = unroll_forward(state, coils, op, b, &trace);
  CMat diff = recon - rho;
  out.loss = diff.squaredNorm();
  out.theta_grad.setZero(op.sample_rows(), op.sample_cols());
  out.phi_grad = zero_like(state.phi);
  if (!want_phi && !want_theta) return out;

  CMat u = 2.0 * diff;
  std::vector<CMat> b_cot(b.size());
  for (std::size_t j = 0; j < b.size(); ++j)
    b_cot[j] = CMat::Zero(b[j].rows(), b[j].cols());

  if (state.arch == Arch::Direct) {
    DenoiseVjp dv = denoise_vjp(state.phi, trace.dc_out[0], u);
    if (want_phi) add_scaled(out.phi_grad, dv.param_grad, 1.0);
    if (want_theta) {
      out.theta_grad += location_grad_pair(op, coils, dv.x_cot, b);
      b_cot = apply_forward(op, coils, dv.x_cot);
      out.theta_grad += location_grad_pair(op, coils, rho, b_cot);
    }
    return out;
  }

  const int k_total = state.unroll_depth;
  CMat zero = CMat::Zero(op.image_rows(), op.image_cols());
  for (int k = k_total; k >= 1; --k) {
    const CMat& z = (k >= 2) ? trace.den_out[k - 2] : zero;
    DcVjp vjp = dc_solve_vjp(op, coils, b, z, state.cg, u,
                             &trace.dc_out[k - 1]);
    if (want_theta) {
      out.theta_grad += vjp.theta_cot;
      for (std::size_t j = 0; j < b_cot.size(); ++j) b_cot[j] += vjp.b_cot[j];
    }
    u = std::move(vjp.z_cot);
    if (k >= 2) {
      DenoiseVjp dv = denoise_vjp(state.phi, trace.dc_out[k - 2], u);
      if (want_phi) add_scaled(out.phi_grad, dv.param_grad, 1.0);
      u = std::move(dv.x_cot);
    }
  }
  if (want_theta)
    out.theta_grad += location_grad_pair(op, coils, rho, b_cot);
  return out;
}

}  // namespace

CMat reconstruct_with_op(const ModelState& state, const CoilSet& coils,
                         const SamplingOperator& op,
                         const std::vector<CMat>& b) {
  return unroll_forward(state, coils, op, b, nullptr);
}

CMat reconstruct(const ModelState& state, const CoilSet& coils,
                 const KSpaceData& b) {
  return reconstruct_with_op(state, coils, make_operator(b.sampler), b.samples);
}

double loss_mse(const ModelState& state, const CoilSet& coils,
                const std::vector<std::pair<CMat, KSpaceData>>& batch) {
  if (batch.empty()) throw std::invalid_argument("loss_mse: empty batch");
  double acc = 0.0;
  for (const auto& [rho, b] : batch)
    acc += (reconstruct(state, coils, b) - rho).squaredNorm();
  return acc / double(batch.size());
}

double training_loss(const ModelState& state, const CoilSet& coils,
                     const std::vector<BatchItem>& batch, double sigma) {
  if (batch.empty()) throw std::invalid_argument("training_loss: empty batch");
  const SamplingOperator op = make_operator(realize(state.theta).sampler);
  double acc = 0.0;
  for (const BatchItem& item : batch) {
    std::vector<CMat> b = acquire_fixed(op, coils, item.rho, item.noise, sigma);
    acc += (unroll_forward(state, coils, op, b, nullptr) - item.rho).squaredNorm();
  }
  return acc / double(batch.size());
}

BackwardResult backward(const ModelState& state, const CoilSet& coils,
                        const std::vector<BatchItem>& batch, double sigma,
                        int threads) {
  if (batch.empty()) throw std::invalid_argument("backward: empty batch");
  const SamplingOperator op = make_operator(realize(state.theta).sampler);
  const bool want_phi = state.strategy != Strategy::ThetaAlone;
  const bool want_theta = state.strategy != Strategy::PhiAlone;

  std::vector<ItemGrad> grads(batch.size());
  parallel_for(static_cast<Index>(batch.size()), resolve_threads(threads),
               [&](Index i) {
                 grads[i] = backward_item(state, coils, op, batch[i].rho,
                                          batch[i].noise, sigma, want_phi,
                                          want_theta);
               });

  BackwardResult out;
  out.phi_grad = zero_like(state.phi);
  out.theta_grad.setZero(op.sample_rows(), op.sample_cols());
  const double inv_n = 1.0 / double(batch.size());
  for (const ItemGrad& g : grads) {
    out.loss += g.loss * inv_n;
    if (want_phi) add_scaled(out.phi_grad, g.phi_grad, inv_n);
    if (want_theta) {
      out.theta_grad.d_vertical += inv_n * g.theta_grad.d_vertical;
      out.theta_grad.d_horizontal += inv_n * g.theta_grad.d_horizontal;
    }
  }
  return out;
}

namespace {

std::vector<Index> shuffled_indices(Index n, Rng& rng) {
  std::vector<Index> idx(n);
  for (Index i = 0; i < n; ++i) idx[i] = i;
  for (Index i = n - 1; i > 0; --i) {
    Index j = static_cast<Index>(rng.next_u64() % std::uint64_t(i + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

constexpr std::uint64_t kNoiseStream = 0x6e6f6973;
constexpr std::uint64_t kValNoiseStream = 0x766e6f69;
constexpr std::uint64_t kShuffleStream = 0x73687566;
constexpr std::uint64_t kAugmentStream = 0x61756774;

std::vector<CMat> draw_noise(Rng rng, Index coils, Index mv, Index mh) {
  std::vector<CMat> noise(coils);
  for (Index j = 0; j < coils; ++j) noise[j] = randn_cmat(rng, mv, mh);
  return noise;
}

RVec theta_raw_params(const ThetaParams& t) {
  RVec v(t.trainable_count());
  v.head(t.free_raw_v.size()) = t.free_raw_v;
  v.tail(t.free_raw_h.size()) = t.free_raw_h;
  return v;
}

void set_theta_raw_params(ThetaParams& t, const RVec& v) {
  t.free_raw_v = v.head(t.free_raw_v.size());
  t.free_raw_h = v.tail(t.free_raw_h.size());
  clamp_raw(t);
}

}  // namespace

TrainResult train(ModelState& state, const CoilSet& coils,
                  const std::vector<CMat>& train_images,
                  const std::vector<CMat>& val_images, const TrainConfig& cfg) {
  if (train_images.empty())
    throw std::invalid_argument("train: empty training set");
  TrainResult result;
  Rng rng(cfg.seed);
  const int threads = resolve_threads(cfg.threads);
  const Index n = static_cast<Index>(train_images.size());

  // One fixed noise realization per item: the noisy measurements are data.
  Rng noise_rng = rng.derive(kNoiseStream);
  const Realization model_real = realize(state.theta);
  const SamplingOperator model_op = make_operator(model_real.sampler);
  const Index mv = model_op.sample_rows(), mh = model_op.sample_cols();

  std::vector<BatchItem> items(n);
  for (Index i = 0; i < n; ++i) {
    items[i].rho = train_images[i];
    if (cfg.sigma > 0.0)
      items[i].noise = draw_noise(noise_rng.derive(i), coils.coils(), mv, mh);
  }
  std::vector<std::vector<CMat>> val_noise(val_images.size());
  Rng vnoise_rng = rng.derive(kValNoiseStream);
  for (std::size_t i = 0; i < val_images.size(); ++i)
    if (cfg.sigma > 0.0)
      val_noise[i] = draw_noise(vnoise_rng.derive(i), coils.coils(), mv, mh);

  const bool want_phi = state.strategy != Strategy::ThetaAlone;
  const bool want_theta = state.strategy != Strategy::PhiAlone;
  const bool augment = state.strategy == Strategy::PhiAlone &&
                       cfg.augment_phi_patterns;
  AdamParams phi_params{cfg.lr_phi, cfg.beta1, cfg.beta2, cfg.eps};
  AdamParams theta_params{cfg.lr_theta, cfg.beta1, cfg.beta2, cfg.eps};

  ModelState last_finite = state;
  Rng shuffle_rng = rng.derive(kShuffleStream);
  Rng augment_rng = rng.derive(kAugmentStream);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<Index> order = shuffled_indices(n, shuffle_rng);
    double epoch_loss = 0.0;

    for (Index start = 0; start < n; start += cfg.batch_size) {
      const Index bsz = std::min<Index>(cfg.batch_size, n - start);

      Realization real = realize(state.theta);
      SamplingOperator op = make_operator(real.sampler);

      // Per-item sampling operators; identical unless augmenting.
      std::vector<const SamplingOperator*> item_ops(bsz, &op);
      std::vector<SamplingOperator> augmented_ops;
      if (augment) {
        augmented_ops.resize(bsz);
        for (Index k = 0; k < bsz; ++k) {
          Rng item_rng = augment_rng.derive(
              std::uint64_t(epoch) * 1000003ull + std::uint64_t(order[start + k]));
          ThetaParams fresh = init_variable_density(
              item_rng, state.theta.mode, state.theta.count_v(),
              state.theta.count_h(), state.theta.grid_v, state.theta.grid_h,
              cfg.center_fraction, cfg.vd_sigma);
          augmented_ops[k] = make_operator(realize(fresh).sampler);
          item_ops[k] = &augmented_ops[k];
        }
      }

      std::vector<ItemGrad> grads(bsz);
      parallel_for(bsz, threads, [&](Index k) {
        const BatchItem& item = items[order[start + k]];
        grads[k] = backward_item(state, coils, *item_ops[k], item.rho,
                                 item.noise, cfg.sigma, want_phi, want_theta);
      });

      GradBuffer phi_grad = zero_like(state.phi);
      ThetaGrad theta_grad;
      theta_grad.setZero(mv, mh);
      const double inv_b = 1.0 / double(bsz);
      for (Index k = 0; k < bsz; ++k) {
        epoch_loss += grads[k].loss;
        if (want_phi) add_scaled(phi_grad, grads[k].phi_grad, inv_b);
        if (want_theta) {
          theta_grad.d_vertical += inv_b * grads[k].theta_grad.d_vertical;
          theta_grad.d_horizontal += inv_b * grads[k].theta_grad.d_horizontal;
        }
      }

      if (want_phi) {
        RVec flat = flatten(state.phi);
        adam_step(flat, flatten(phi_grad), state.adam_phi, phi_params);
        unflatten(flat, state.phi);
      }
      if (want_theta && state.theta.trainable_count() > 0) {
        RVec raw_grad = raw_gradient(state.theta, real, theta_grad.d_vertical,
                                     theta_grad.d_horizontal);
        RVec raw = theta_raw_params(state.theta);
        adam_step(raw, raw_grad, state.adam_theta, theta_params);
        set_theta_raw_params(state.theta, raw);
      }
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = epoch_loss / double(n);

    if (!std::isfinite(stats.train_loss)) {
      state = last_finite;
      result.diverged = true;
      result.history.push_back(stats);
      break;
    }
    last_finite = state;

    if (cfg.val_every > 0 && !val_images.empty() &&
        ((epoch + 1) % cfg.val_every == 0 || epoch + 1 == cfg.epochs)) {
      const SamplingOperator vop = make_operator(realize(state.theta).sampler);
      std::vector<double> losses(val_images.size()), psnrs(val_images.size());
      parallel_for(static_cast<Index>(val_images.size()), threads, [&](Index i) {
        std::vector<CMat> b = acquire_fixed(vop, coils, val_images[i],
                                            val_noise[i], cfg.sigma);
        CMat recon = unroll_forward(state, coils, vop, b, nullptr);
        losses[i] = (recon - val_images[i]).squaredNorm();
        psnrs[i] = psnr(recon, val_images[i]);
      });
      stats.has_val = true;
      stats.val_loss = 0.0;
      stats.val_psnr = 0.0;
      for (std::size_t i = 0; i < val_images.size(); ++i) {
        stats.val_loss += losses[i] / double(val_images.size());
        stats.val_psnr += psnrs[i] / double(val_images.size());
      }
    }
    result.history.push_back(stats);
  }
  return result;
}

LandscapeResult landscape_scan(const ModelState& state, const CoilSet& coils,
                               const std::vector<CMat>& testset, Index i,
                               Index j, int grid_points, double span,
                               double sigma, std::uint64_t seed, int threads) {
  if (testset.empty()) throw std::invalid_argument("landscape: empty testset");
  if (grid_points < 1) throw std::invalid_argument("landscape: bad grid");
  if (i == j) throw std::invalid_argument("landscape: need two distinct indices");

  Realization real = realize(state.theta);
  const bool one_d = std::holds_alternative<Sampler1D>(real.sampler);
  RVec base_v, base_h;
  Index grid_v = state.theta.grid_v, grid_h = state.theta.grid_h;
  if (one_d) {
    base_v = std::get<Sampler1D>(real.sampler).locations;
  } else {
    base_v = std::get<Sampler2D>(real.sampler).vertical.locations;
    base_h = std::get<Sampler2D>(real.sampler).horizontal.locations;
  }
  const Index mv = base_v.size();
  const Index total = mv + base_h.size();

  auto check_index = [&](Index idx) {
    if (idx < 0 || idx >= total)
      throw std::invalid_argument("landscape: location index out of range");
    const bool vertical = idx < mv;
    const Index axis_idx = vertical ? idx : idx - mv;
    const std::vector<Index>& src = vertical ? real.source_v : real.source_h;
    if (src[axis_idx] < 0)
      throw std::invalid_argument(
          "landscape: index refers to a fixed-center location");
  };
  check_index(i);
  check_index(j);

  // Fixed noise per test item, shared across all grid evaluations.
  Rng rng(seed);
  std::vector<std::vector<CMat>> noise(testset.size());
  SamplingOperator base_op = make_operator(real.sampler);
  for (std::size_t t = 0; t < testset.size(); ++t)
    if (sigma > 0.0)
      noise[t] = draw_noise(rng.derive(t), coils.coils(),
                            base_op.sample_rows(), base_op.sample_cols());

  LandscapeResult result;
  result.offsets = RVec(grid_points);
  const double half = std::max(1, grid_points / 2);
  for (int g = 0; g < grid_points; ++g)
    result.offsets[g] = (g - grid_points / 2) * (span / half);
  result.surface = RMat(grid_points, grid_points);

  auto wrap01 = [](double k) {
    double w = k - std::floor(k);
    if (w >= 1.0) w = 0.0;
    return w;
  };

  const Index cells = Index(grid_points) * Index(grid_points);
  parallel_for(cells, resolve_threads(threads), [&](Index cell) {
    const int gi = static_cast<int>(cell / grid_points);
    const int gj = static_cast<int>(cell % grid_points);
    RVec locs_v = base_v, locs_h = base_h;
    auto poke = [&](Index idx, double off) {
      if (idx < mv)
        locs_v[idx] = wrap01(locs_v[idx] + off);
      else
        locs_h[idx - mv] = wrap01(locs_h[idx - mv] + off);
    };
    poke(i, result.offsets[gi]);
    poke(j, result.offsets[gj]);

    Sampler pert;
    if (one_d) {
      pert = Sampler1D(locs_v, grid_v);
    } else {
      Sampler2D s2;
      s2.vertical = Sampler1D(locs_v, grid_v);
      s2.horizontal = Sampler1D(locs_h, grid_h);
      pert = s2;
    }
    SamplingOperator op = make_operator(pert);
    double acc = 0.0;
    for (std::size_t t = 0; t < testset.size(); ++t) {
      std::vector<CMat> b =
          acquire_fixed(op, coils, testset[t], noise[t], sigma);
      acc += (unroll_forward(state, coils, op, b, nullptr) - testset[t])
                 .squaredNorm();
    }
    result.surface(gi, gj) = acc / double(testset.size());
  });

  result.base_mse = result.surface(grid_points / 2, grid_points / 2);
  return result;
}

namespace {

CTensor vec_tensor(const RVec& v) {
  CTensor t({std::max<Index>(v.size(), 1)});
  for (Index i = 0; i < v.size(); ++i) t[i] = Complex(v[i], 0.0);
  return t;
}

RVec tensor_vec(const CTensor& t, Index expected) {
  RVec v(expected);
  for (Index i = 0; i < expected; ++i) v[i] = t[i].real();
  return v;
}

}  // namespace

void save_checkpoint(const ModelState& state, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_net(state.phi, dir, "phi");
  save_theta(state.theta, dir, "theta");
  if (state.adam_phi.m.size() > 0) {
    tensor_io_write(vec_tensor(state.adam_phi.m), dir / "adam_phi_m.jmt");
    tensor_io_write(vec_tensor(state.adam_phi.v), dir / "adam_phi_v.jmt");
  }
  if (state.adam_theta.m.size() > 0) {
    tensor_io_write(vec_tensor(state.adam_theta.m), dir / "adam_theta_m.jmt");
    tensor_io_write(vec_tensor(state.adam_theta.v), dir / "adam_theta_v.jmt");
  }
  std::ofstream manifest(dir / "model.txt");
  if (!manifest) throw std::runtime_error("save_checkpoint: cannot write manifest");
  manifest << "model1\n";
  manifest << "arch " << to_string(state.arch) << "\n";
  manifest << "strategy " << to_string(state.strategy) << "\n";
  manifest << "unroll_depth " << state.unroll_depth << "\n";
  manifest << "cg_iters " << state.cg.max_iters << "\n";
  char tol[64];
  std::snprintf(tol, sizeof tol, "%.17g", state.cg.tol);
  manifest << "cg_tol " << tol << "\n";
  manifest << "adam_phi_t " << state.adam_phi.t << "\n";
  manifest << "adam_theta_t " << state.adam_theta.t << "\n";
  manifest << "adam_phi_n " << state.adam_phi.m.size() << "\n";
  manifest << "adam_theta_n " << state.adam_theta.m.size() << "\n";
}

ModelState load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "model.txt");
  if (!manifest) throw std::runtime_error("load_checkpoint: missing manifest");
  std::string tag;
  manifest >> tag;
  if (tag != "model1") throw std::runtime_error("load_checkpoint: bad tag");

  ModelState state;
  Index phi_n = 0, theta_n = 0;
  while (manifest >> tag) {
    if (tag == "arch") {
      std::string v;
      manifest >> v;
      state.arch = arch_from_string(v);
    } else if (tag == "strategy") {
      std::string v;
      manifest >> v;
      state.strategy = strategy_from_string(v);
    } else if (tag == "unroll_depth") manifest >> state.unroll_depth;
    else if (tag == "cg_iters") manifest >> state.cg.max_iters;
    else if (tag == "cg_tol") {
      std::string v;
      manifest >> v;
      state.cg.tol = std::stod(v);
    } else if (tag == "adam_phi_t") manifest >> state.adam_phi.t;
    else if (tag == "adam_theta_t") manifest >> state.adam_theta.t;
    else if (tag == "adam_phi_n") manifest >> phi_n;
    else if (tag == "adam_theta_n") manifest >> theta_n;
    else throw std::runtime_error("load_checkpoint: unknown key " + tag);
  }
  state.phi = load_net(dir, "phi");
  state.theta = load_theta(dir, "theta");
  if (phi_n > 0) {
    state.adam_phi.m = tensor_vec(tensor_io_read(dir / "adam_phi_m.jmt"), phi_n);
    state.adam_phi.v = tensor_vec(tensor_io_read(dir / "adam_phi_v.jmt"), phi_n);
  }
  if (theta_n > 0) {
    state.adam_theta.m =
        tensor_vec(tensor_io_read(dir / "adam_theta_m.jmt"), theta_n);
    state.adam_theta.v =
        tensor_vec(tensor_io_read(dir / "adam_theta_v.jmt"), theta_n);
  }
  return state;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path) {
  CsvWriter csv(path, {"epoch", "train_loss", "val_loss", "val_psnr"});
  for (const EpochStats& e : history) {
    if (e.has_val)
      csv.row({double(e.epoch), e.train_loss, e.val_loss, e.val_psnr});
    else
      csv.raw_row({std::to_string(e.epoch), [&] {
                     char buf[64];
                     std::snprintf(buf, sizeof buf, "%.17g", e.train_loss);
                     return std::string(buf);
                   }(),
                   "", ""});
  }
}

}  // namespace ksopt
