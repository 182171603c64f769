#ifndef KSOPT_TRAINER_HPP
#define KSOPT_TRAINER_HPP

#include "ksopt/dc.hpp"
#include "ksopt/denoiser.hpp"
#include "ksopt/sampling.hpp"

namespace ksopt {

enum class Strategy { PhiAlone, ThetaAlone, Joint };
enum class Arch { Unrolled, Direct };

std::string to_string(Strategy s);
std::string to_string(Arch a);
Strategy strategy_from_string(const std::string& s);
Arch arch_from_string(const std::string& s);

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  RVec m, v;
  long t = 0;
  void reset(Index n) {
    m = RVec::Zero(n);
    v = RVec::Zero(n);
    t = 0;
  }
};

void adam_step(RVec& x, const RVec& grad, AdamState& state,
               const AdamParams& params);

// All trainable state: sampling locations, denoiser weights, unroll depth,
// data-consistency settings and the per-group Adam moments. Weights are
// shared across all unroll iterations.
struct ModelState {
  ThetaParams theta;
  NetParams phi;
  int unroll_depth = 5;  // K; ignored by the direct architecture
  CgConfig cg;
  Strategy strategy = Strategy::Joint;
  Arch arch = Arch::Unrolled;
  AdamState adam_phi, adam_theta;
};

struct TrainConfig {
  int epochs = 40;
  int batch_size = 10;
  double lr_phi = 1e-3;
  double lr_theta = 1e-2;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  std::uint64_t seed = 1;
  int val_every = 1;
  double sigma = 0.01;
  // PhiAlone only: draw a fresh variable-density pattern per item per epoch.
  bool augment_phi_patterns = true;
  double center_fraction = 0.04;
  double vd_sigma = 0.15;
  int threads = 0;  // 0 = hardware concurrency
};

// One training example: ground truth plus a fixed unit-variance complex
// noise draw per coil; measurements are b = A(rho) + sigma * noise, so the
// noise realization is part of the dataset, not of the step.
struct BatchItem {
  CMat rho;
  std::vector<CMat> noise;
};

// Unrolled reconstruction: x_1 = dc(0, b), then x_k = dc(denoise(x_{k-1}), b)
// for k = 2..K; the output is x_K, so the network both starts and ends with
// a data-consistency solve. Direct mode is denoise(A^H b).
CMat reconstruct(const ModelState& state, const CoilSet& coils,
                 const KSpaceData& b);
CMat reconstruct_with_op(const ModelState& state, const CoilSet& coils,
                         const SamplingOperator& op,
                         const std::vector<CMat>& b);

// Mean over the batch of the squared complex Frobenius error of
// reconstruct() against the ground truth.
double loss_mse(const ModelState& state, const CoilSet& coils,
                const std::vector<std::pair<CMat, KSpaceData>>& batch);

// Loss of the full acquisition + reconstruction composition on items with
// fixed noise; this is the function backward() differentiates.
double training_loss(const ModelState& state, const CoilSet& coils,
                     const std::vector<BatchItem>& batch, double sigma);

struct BackwardResult {
  double loss = 0.0;
  GradBuffer phi_grad;
  ThetaGrad theta_grad;  // per realized location, sorted order
};

// Exact reverse mode through the full pipeline. The sampling locations enter
// twice -- through the simulated acquisition b = A(rho) + sigma * n and
// through every data-consistency block -- and both paths are accumulated.
// Strategy masking zeroes the gradient of the frozen group.
BackwardResult backward(const ModelState& state, const CoilSet& coils,
                        const std::vector<BatchItem>& batch, double sigma,
                        int threads = 1);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_psnr = 0.0;
  bool has_val = false;
};

struct TrainResult {
  std::vector<EpochStats> history;
  bool diverged = false;
};

TrainResult train(ModelState& state, const CoilSet& coils,
                  const std::vector<CMat>& train_images,
                  const std::vector<CMat>& val_images, const TrainConfig& cfg);

// MSE surface over a grid of perturbations of two realized sampling
// locations; all other parameters stay frozen. Offsets include zero at
// index grid_points/2, and perturbed locations wrap into [0, 1).
struct LandscapeResult {
  RMat surface;         // grid_points x grid_points, row = offset of i
  RVec offsets;         // shared offset axis
  double base_mse = 0;  // surface value at zero perturbation
};

LandscapeResult landscape_scan(const ModelState& state, const CoilSet& coils,
                               const std::vector<CMat>& testset, Index i,
                               Index j, int grid_points, double span,
                               double sigma, std::uint64_t seed, int threads);

// Checkpoint directory: manifest + per-layer net tensors + sampling
// parameters + Adam moment tensors.
void save_checkpoint(const ModelState& state, const std::filesystem::path& dir);
ModelState load_checkpoint(const std::filesystem::path& dir);

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path);

}  // namespace ksopt

#endif  // KSOPT_TRAINER_HPP
