#ifndef KSOPT_GRADCHECK_HPP
#define KSOPT_GRADCHECK_HPP

#include "ksopt/trainer.hpp"

namespace ksopt {

struct GradCheckReport {
  std::string name;
  int checks = 0;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// rel = |a - f| / max(|a|, |f|, 1e-10).
double rel_err(double analytic, double fd);

// Central finite differences against each analytic derivative path, on
// small seeded instances.
GradCheckReport check_fourier_location_derivative(std::uint64_t seed);
GradCheckReport check_dc_z_gradient(std::uint64_t seed);
GradCheckReport check_dc_location_gradient(std::uint64_t seed);
GradCheckReport check_denoiser_gradients(std::uint64_t seed);

// Full-pipeline checks through acquisition + unrolled reconstruction.
// n_params raw sampling parameters and n_params denoiser parameters are
// probed (randomly chosen, deterministic per seed).
GradCheckReport check_pipeline_theta(std::uint64_t seed, Index rows, Index cols,
                                     Index coils, int unroll, Index n_params,
                                     double tol, Arch arch = Arch::Unrolled);
GradCheckReport check_pipeline_phi(std::uint64_t seed, Index rows, Index cols,
                                   Index coils, int unroll, Index n_params,
                                   double tol, Arch arch = Arch::Unrolled);

// The whole battery at default sizes; the CLI gradcheck subcommand exits
// zero exactly when every report passes.
std::vector<GradCheckReport> run_all_gradchecks(std::uint64_t seed);

}  // namespace ksopt

#endif  // KSOPT_GRADCHECK_HPP
