#include "ksopt/experiments.hpp"

#include <cmath>
#include <cstdio>

#include "ksopt/metrics.hpp"

namespace ksopt {

namespace {

constexpr std::uint64_t kCorpusStream = 0x636f7270;
constexpr std::uint64_t kThetaStream = 0x74686574;
constexpr std::uint64_t kPhiStream = 0x70686900;
constexpr std::uint64_t kEvalNoiseStream = 0x65766c6e;

}  // namespace

Corpus corpus_from_config(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.finalize();
  Rng rng = Rng(c.seed).derive(kCorpusStream);
  return make_corpus(rng, c.n_train, c.n_val, c.n_test, c.grid_p,
                     c.mode == "1d" ? 1 : c.grid_q, c.coils);
}

ModelState make_initial_state(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.finalize();
  ModelState state;
  Rng theta_rng = Rng(c.seed).derive(kThetaStream);
  state.theta = init_variable_density(
      theta_rng,
      c.mode == "1d" ? ThetaParams::Mode::OneD : ThetaParams::Mode::TwoD,
      c.m_v, c.m_h, c.grid_p, c.mode == "1d" ? 1 : c.grid_q,
      c.center_fraction, c.vd_sigma);
  Rng phi_rng = Rng(c.seed).derive(kPhiStream);
  state.phi = make_net(c.denoiser_depth, c.denoiser_width, phi_rng);
  state.unroll_depth = static_cast<int>(c.unroll_depth);
  state.cg = CgConfig{static_cast<int>(c.cg_iters), c.cg_tol};
  state.strategy = strategy_from_string(c.strategy);
  state.arch = arch_from_string(c.arch);
  return state;
}

TrainConfig train_config_from(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.finalize();
  TrainConfig t;
  t.epochs = static_cast<int>(c.epochs);
  t.batch_size = static_cast<int>(c.batch_size);
  t.lr_phi = c.lr_phi;
  t.lr_theta = c.lr_theta;
  t.beta1 = c.adam_beta1;
  t.beta2 = c.adam_beta2;
  t.eps = c.adam_eps;
  t.seed = c.seed;
  t.val_every = static_cast<int>(c.val_every);
  t.sigma = c.sigma;
  t.augment_phi_patterns = c.augment_phi_patterns;
  t.center_fraction = c.center_fraction;
  t.vd_sigma = c.vd_sigma;
  t.threads = static_cast<int>(c.threads);
  return t;
}

EvalSummary evaluate_model(const ModelState& state, const CoilSet& coils,
                           const std::vector<CMat>& test_images, double sigma,
                           std::uint64_t seed, int threads) {
  EvalSummary summary;
  summary.rows.resize(test_images.size());
  const SamplingOperator op = make_operator(realize(state.theta).sampler);
  Rng noise_rng = Rng(seed).derive(kEvalNoiseStream);

  std::vector<std::vector<CMat>> noise(test_images.size());
  for (std::size_t i = 0; i < test_images.size(); ++i) {
    Rng item_rng = noise_rng.derive(i);
    if (sigma > 0.0)
      for (Index j = 0; j < coils.coils(); ++j)
        noise[i].push_back(
            randn_cmat(item_rng, op.sample_rows(), op.sample_cols()));
  }

  // Evaluation is cheap relative to training; serial keeps it simple.
  (void)threads;
  for (std::size_t i = 0; i < test_images.size(); ++i) {
    std::vector<CMat> b = apply_forward(op, coils, test_images[i]);
    if (sigma > 0.0)
      for (std::size_t j = 0; j < b.size(); ++j) b[j] += sigma * noise[i][j];
    CMat recon = reconstruct_with_op(state, coils, op, b);
    EvalRow row;
    row.loss = (recon - test_images[i]).squaredNorm();
    row.psnr = psnr(recon, test_images[i]);
    row.ssim = ssim(recon, test_images[i]);
    summary.rows[i] = row;
  }

  for (const EvalRow& r : summary.rows) {
    summary.mean_psnr += r.psnr / double(summary.rows.size());
    summary.mean_ssim += r.ssim / double(summary.rows.size());
    summary.mean_loss += r.loss / double(summary.rows.size());
  }
  return summary;
}

void write_eval_csv(const EvalSummary& summary,
                    const std::filesystem::path& path) {
  CsvWriter csv(path, {"item", "psnr_db", "ssim", "loss"});
  for (std::size_t i = 0; i < summary.rows.size(); ++i)
    csv.row({double(i), summary.rows[i].psnr, summary.rows[i].ssim,
             summary.rows[i].loss});
  csv.raw_row({"mean", [&] {
                 char b[64];
                 std::snprintf(b, sizeof b, "%.17g", summary.mean_psnr);
                 return std::string(b);
               }(),
               [&] {
                 char b[64];
                 std::snprintf(b, sizeof b, "%.17g", summary.mean_ssim);
                 return std::string(b);
               }(),
               [&] {
                 char b[64];
                 std::snprintf(b, sizeof b, "%.17g", summary.mean_loss);
                 return std::string(b);
               }()});
}

StrategyRun run_strategy(const ExperimentConfig& cfg, const Corpus& corpus,
                         const NetParams* phi_init) {
  StrategyRun run;
  run.model = make_initial_state(cfg);
  if (phi_init) run.model.phi = *phi_init;
  run.result = train(run.model, corpus.coils, corpus.train, corpus.val,
                     train_config_from(cfg));
  return run;
}

std::vector<NoiseSweepRow> noise_sweep(const ExperimentConfig& base,
                                       const Corpus& corpus,
                                       const std::vector<double>& sigmas,
                                       const std::filesystem::path& outdir) {
  if (sigmas.empty())
    throw std::invalid_argument("noise_sweep: empty sigma list");
  std::filesystem::create_directories(outdir);
  std::vector<NoiseSweepRow> rows;
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    ExperimentConfig warm = base;
    warm.sigma = sigmas[i];
    warm.strategy = "phi_alone";
    warm.epochs = std::max(1L, base.epochs / 2);
    warm.finalize();
    StrategyRun phi_run = run_strategy(warm, corpus, nullptr);

    ExperimentConfig joint = base;
    joint.sigma = sigmas[i];
    joint.strategy = "joint";
    joint.finalize();
    StrategyRun joint_run = run_strategy(joint, corpus, &phi_run.model.phi);

    char name[64];
    std::snprintf(name, sizeof name, "pattern_sigma_%02zu", i);
    save_theta(joint_run.model.theta, outdir, name);

    NoiseSweepRow row;
    row.sigma = sigmas[i];
    row.mean_center_distance = mean_center_distance(joint_run.model.theta);
    row.pattern_file = std::string(name) + ".pattern";
    rows.push_back(row);
  }
  return rows;
}

void write_noise_sweep_csv(const std::vector<NoiseSweepRow>& rows,
                           const std::filesystem::path& path) {
  CsvWriter csv(path, {"sigma", "mean_center_distance", "pattern_file"});
  for (const NoiseSweepRow& r : rows) {
    char a[64], b[64];
    std::snprintf(a, sizeof a, "%.17g", r.sigma);
    std::snprintf(b, sizeof b, "%.17g", r.mean_center_distance);
    csv.raw_row({a, b, r.pattern_file});
  }
}

Eigen::MatrixXd rasterize_mask(const Sampler& s) {
  if (const Sampler1D* s1 = std::get_if<Sampler1D>(&s)) {
    const Index n = s1->grid_size;
    Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < s1->samples(); ++i) {
      Index row = static_cast<Index>(std::llround(s1->locations[i] * double(n))) % n;
      mask.row(row).setOnes();
    }
    return mask;
  }
  const Sampler2D& s2 = std::get<Sampler2D>(s);
  const Index p = s2.vertical.grid_size, q = s2.horizontal.grid_size;
  Eigen::MatrixXd mask = Eigen::MatrixXd::Zero(p, q);
  for (Index a = 0; a < s2.vertical.samples(); ++a) {
    Index row =
        static_cast<Index>(std::llround(s2.vertical.locations[a] * double(p))) % p;
    for (Index b = 0; b < s2.horizontal.samples(); ++b) {
      Index col = static_cast<Index>(
                      std::llround(s2.horizontal.locations[b] * double(q))) % q;
      mask(row, col) = 1.0;
    }
  }
  return mask;
}

}  // namespace ksopt
