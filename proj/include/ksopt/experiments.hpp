#ifndef KSOPT_EXPERIMENTS_HPP
#define KSOPT_EXPERIMENTS_HPP

#include "ksopt/config.hpp"
#include "ksopt/phantom.hpp"
#include "ksopt/trainer.hpp"

namespace ksopt {

// Fixed derivation streams so corpora, initial states and evaluation noise
// are reproducible from the config seed alone.
Corpus corpus_from_config(const ExperimentConfig& cfg);
ModelState make_initial_state(const ExperimentConfig& cfg);
TrainConfig train_config_from(const ExperimentConfig& cfg);

struct EvalRow {
  double psnr = 0.0, ssim = 0.0, loss = 0.0;
};

struct EvalSummary {
  std::vector<EvalRow> rows;
  double mean_psnr = 0.0, mean_ssim = 0.0, mean_loss = 0.0;
};

// Test-split evaluation with per-item seeded acquisition noise.
EvalSummary evaluate_model(const ModelState& state, const CoilSet& coils,
                           const std::vector<CMat>& test_images, double sigma,
                           std::uint64_t seed, int threads);

void write_eval_csv(const EvalSummary& summary,
                    const std::filesystem::path& path);

// One full strategy run: initial state per config (phi optionally taken from
// an earlier checkpoint), train on the corpus, return the trained model and
// its history.
struct StrategyRun {
  ModelState model;
  TrainResult result;
};
StrategyRun run_strategy(const ExperimentConfig& cfg, const Corpus& corpus,
                         const NetParams* phi_init);

struct NoiseSweepRow {
  double sigma = 0.0;
  double mean_center_distance = 0.0;
  std::string pattern_file;
};

// Per sigma: a short pattern-augmented phi_alone warmup followed by joint
// training, then the learned pattern and its mean wrapped distance from DC.
std::vector<NoiseSweepRow> noise_sweep(const ExperimentConfig& base,
                                       const Corpus& corpus,
                                       const std::vector<double>& sigmas,
                                       const std::filesystem::path& outdir);

void write_noise_sweep_csv(const std::vector<NoiseSweepRow>& rows,
                           const std::filesystem::path& path);

// Binary rasterization of the realized pattern onto the grid (nearest bin);
// 1-D patterns render as full readout lines.
Eigen::MatrixXd rasterize_mask(const Sampler& s);

}  // namespace ksopt

#endif  // KSOPT_EXPERIMENTS_HPP
