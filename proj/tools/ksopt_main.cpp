// Command-line driver: corpus generation, training, evaluation, gradient
// checks, landscape scans, noise sweeps and mask export.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ksopt/experiments.hpp"
#include "ksopt/gradcheck.hpp"
#include "ksopt/metrics.hpp"

namespace {

using namespace ksopt;

ExperimentConfig load_config(const std::string& config_path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = parse_config_file(config_path);
  for (const std::string& kv : overrides) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value: " + kv);
    apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.finalize();
  return cfg;
}

std::vector<double> parse_sigma_list(const std::string& list) {
  std::vector<double> out;
  std::size_t at = 0;
  while (at < list.size()) {
    std::size_t comma = list.find(',', at);
    if (comma == std::string::npos) comma = list.size();
    out.push_back(std::stod(list.substr(at, comma - at)));
    at = comma + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty sigma list");
  return out;
}

int cmd_phantom(const ExperimentConfig& cfg, const std::string& out_dir) {
  Corpus corpus = corpus_from_config(cfg);
  save_corpus(corpus, out_dir);
  std::printf("wrote corpus: %zu train / %zu val / %zu test, grid %ldx%ld, %ld coils\n",
              corpus.train.size(), corpus.val.size(), corpus.test.size(),
              cfg.grid_p, cfg.mode == "1d" ? 1L : cfg.grid_q, cfg.coils);
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& corpus_dir,
              const std::string& out_dir, const std::string& history_path,
              const std::string& init_checkpoint) {
  Corpus corpus = load_corpus(corpus_dir);
  NetParams phi_init;
  const NetParams* init = nullptr;
  if (!init_checkpoint.empty()) {
    phi_init = load_checkpoint(init_checkpoint).phi;
    init = &phi_init;
  }
  StrategyRun run = run_strategy(cfg, corpus, init);
  save_checkpoint(run.model, out_dir);
  if (!history_path.empty())
    write_history_csv(run.result.history, history_path);
  const EpochStats* last = run.result.history.empty()
                               ? nullptr
                               : &run.result.history.back();
  std::printf("trained strategy=%s epochs=%zu final_train_loss=%.6g%s\n",
              cfg.strategy.c_str(), run.result.history.size(),
              last ? last->train_loss : 0.0,
              run.result.diverged ? " (diverged, restored last finite state)"
                                  : "");
  return run.result.diverged ? 2 : 0;
}

int cmd_eval(const ExperimentConfig& cfg, const std::string& corpus_dir,
             const std::string& checkpoint_dir, const std::string& out_csv) {
  Corpus corpus = load_corpus(corpus_dir);
  ModelState model = load_checkpoint(checkpoint_dir);
  EvalSummary summary =
      evaluate_model(model, corpus.coils, corpus.test, cfg.sigma, cfg.seed,
                     static_cast<int>(cfg.threads));
  write_eval_csv(summary, out_csv);
  std::printf("eval: mean PSNR %.3f dB, mean SSIM %.4f over %zu test items\n",
              summary.mean_psnr, summary.mean_ssim, summary.rows.size());
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  std::vector<GradCheckReport> reports = run_all_gradchecks(seed);
  bool all = true;
  for (const GradCheckReport& r : reports) {
    std::printf("%-18s %4d checks  max rel err %.3e  tol %.0e  %s\n",
                r.name.c_str(), r.checks, r.max_rel_err, r.tol,
                r.pass ? "PASS" : "FAIL");
    all = all && r.pass;
  }
  return all ? 0 : 1;
}

int cmd_landscape(const ExperimentConfig& cfg, const std::string& corpus_dir,
                  const std::string& checkpoint_dir, long i, long j,
                  int grid_points, double span, const std::string& out_csv) {
  Corpus corpus = load_corpus(corpus_dir);
  ModelState model = load_checkpoint(checkpoint_dir);
  LandscapeResult scan =
      landscape_scan(model, corpus.coils, corpus.test, i, j, grid_points, span,
                     cfg.sigma, cfg.seed, static_cast<int>(cfg.threads));
  CsvWriter csv(out_csv, {"offset_i", "offset_j", "mse"});
  for (int a = 0; a < grid_points; ++a)
    for (int b = 0; b < grid_points; ++b)
      csv.row({scan.offsets[a], scan.offsets[b], scan.surface(a, b)});
  std::printf("landscape: %dx%d grid, base mse %.6g\n", grid_points,
              grid_points, scan.base_mse);
  return 0;
}

int cmd_noise_sweep(const ExperimentConfig& cfg, const std::string& corpus_dir,
                    const std::string& sigma_list, const std::string& out_dir) {
  Corpus corpus = load_corpus(corpus_dir);
  std::vector<double> sigmas = parse_sigma_list(sigma_list);
  std::vector<NoiseSweepRow> rows = noise_sweep(cfg, corpus, sigmas, out_dir);
  write_noise_sweep_csv(rows, std::filesystem::path(out_dir) / "summary.csv");
  for (const NoiseSweepRow& r : rows)
    std::printf("sigma %.4g -> mean center distance %.5f (%s)\n", r.sigma,
                r.mean_center_distance, r.pattern_file.c_str());
  return 0;
}

int cmd_export_mask(const std::string& pattern_path,
                    const std::string& checkpoint_dir,
                    const std::string& out_pgm) {
  Sampler sampler;
  if (!pattern_path.empty()) {
    sampler = read_pattern(pattern_path);
  } else if (!checkpoint_dir.empty()) {
    sampler = realize(load_checkpoint(checkpoint_dir).theta).sampler;
  } else {
    throw std::invalid_argument("export-mask needs --pattern or --checkpoint");
  }
  write_pgm(rasterize_mask(sampler), out_pgm);
  std::printf("wrote mask %s\n", out_pgm.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint optimization of continuous k-space sampling locations "
               "and an unrolled reconstruction network"};
  app.require_subcommand(1);

  std::string config_path, corpus_dir, out_path, history_path, init_checkpoint;
  std::string checkpoint_dir, sigma_list, pattern_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  long loc_i = 0, loc_j = 1;
  int grid_points = 100;
  double span = 0.05;

  auto add_config = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "key = value config file");
    sub->add_option("--set", overrides,
                    "config override key=value (repeatable)");
  };

  CLI::App* phantom = app.add_subcommand("phantom", "generate a synthetic corpus");
  add_config(phantom);
  phantom->add_option("--out", out_path, "corpus directory")->required();

  CLI::App* train = app.add_subcommand("train", "train one strategy");
  add_config(train);
  train->add_option("--corpus", corpus_dir, "corpus directory")->required();
  train->add_option("--out", out_path, "checkpoint directory")->required();
  train->add_option("--history", history_path, "loss history CSV path");
  train->add_option("--init-checkpoint", init_checkpoint,
                    "checkpoint whose network weights seed this run");
  std::string strategy_override;
  train->add_option("--strategy", strategy_override,
                    "phi_alone | theta_alone | joint");

  CLI::App* eval = app.add_subcommand("eval", "PSNR/SSIM table over the test split");
  add_config(eval);
  eval->add_option("--corpus", corpus_dir, "corpus directory")->required();
  eval->add_option("--checkpoint", checkpoint_dir, "model checkpoint")->required();
  eval->add_option("--out", out_path, "output CSV")->required();

  CLI::App* gradcheck = app.add_subcommand(
      "gradcheck", "run all finite-difference suites; exit 0 iff all pass");
  gradcheck->add_option("--seed", seed, "rng seed");

  CLI::App* landscape = app.add_subcommand(
      "landscape", "MSE surface over perturbations of two locations");
  add_config(landscape);
  landscape->add_option("--corpus", corpus_dir)->required();
  landscape->add_option("--checkpoint", checkpoint_dir)->required();
  landscape->add_option("--i", loc_i, "first location index");
  landscape->add_option("--j", loc_j, "second location index");
  landscape->add_option("--grid", grid_points, "grid points per axis");
  landscape->add_option("--span", span, "offset half-range in k units");
  landscape->add_option("--out", out_path, "output CSV")->required();

  CLI::App* sweep = app.add_subcommand(
      "noise-sweep", "train joint models across a sigma list");
  add_config(sweep);
  sweep->add_option("--corpus", corpus_dir)->required();
  sweep->add_option("--sigmas", sigma_list, "comma-separated sigma list")
      ->required();
  sweep->add_option("--out", out_path, "output directory")->required();

  CLI::App* mask = app.add_subcommand("export-mask",
                                      "render a pattern as a binary PGM");
  mask->add_option("--pattern", pattern_path, "pattern file");
  mask->add_option("--checkpoint", checkpoint_dir, "model checkpoint");
  mask->add_option("--out", out_path, "output PGM")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom->parsed()) return cmd_phantom(load_config(config_path, overrides), out_path);
    if (train->parsed()) {
      ExperimentConfig cfg = load_config(config_path, overrides);
      if (!strategy_override.empty()) {
        cfg.strategy = strategy_override;
        cfg.finalize();
      }
      return cmd_train(cfg, corpus_dir, out_path, history_path, init_checkpoint);
    }
    if (eval->parsed())
      return cmd_eval(load_config(config_path, overrides), corpus_dir,
                      checkpoint_dir, out_path);
    if (gradcheck->parsed()) return cmd_gradcheck(seed);
    if (landscape->parsed())
      return cmd_landscape(load_config(config_path, overrides), corpus_dir,
                           checkpoint_dir, loc_i, loc_j, grid_points, span,
                           out_path);
    if (sweep->parsed())
      return cmd_noise_sweep(load_config(config_path, overrides), corpus_dir,
                             sigma_list, out_path);
    if (mask->parsed())
      return cmd_export_mask(pattern_path, checkpoint_dir, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
