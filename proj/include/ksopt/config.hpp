#ifndef KSOPT_CONFIG_HPP
#define KSOPT_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace ksopt {

// Flat experiment configuration. Files are UTF-8 "key = value" lines with
// '#' comments; unknown keys are rejected so typos fail loudly.
struct ExperimentConfig {
  std::string mode = "2d";        // 1d | 2d
  long grid_p = 64, grid_q = 64;  // 1d mode uses grid_p x 1 signals
  long coils = 4;
  double accel = 4.0;             // used when sample counts are not explicit
  long m_v = 0, m_h = 0;          // 0 = derive from accel
  long unroll_depth = 5;
  std::string arch = "unrolled"; // unrolled | direct
  std::string strategy = "joint"; // phi_alone | theta_alone | joint
  double sigma = 0.01;
  std::uint64_t seed = 1;
  long epochs = 40;
  long batch_size = 10;
  double lr_phi = 1e-3;
  double lr_theta = 1e-2;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  long cg_iters = 10;
  double cg_tol = 1e-10;
  double center_fraction = 0.04;
  double vd_sigma = 0.15;
  long denoiser_depth = 5;
  long denoiser_width = 32;
  long n_train = 60, n_val = 10, n_test = 10;
  long val_every = 1;
  long threads = 0;  // 0 = hardware concurrency
  bool augment_phi_patterns = true;
  bool train_center = false;  // keep the center block fixed by default

  // Derived sample counts (after finalize()).
  long samples_v() const { return m_v; }
  long samples_h() const { return m_h; }

  void finalize();  // fills m_v/m_h from accel and validates ranges
};

ExperimentConfig parse_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

// Applies one "key=value" override (same key set as the file format).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

}  // namespace ksopt

#endif  // KSOPT_CONFIG_HPP
