#ifndef KSOPT_SAMPLING_HPP
#define KSOPT_SAMPLING_HPP

#include <filesystem>

#include "ksopt/fourier.hpp"

namespace ksopt {

// Trainable sampling locations. Free parameters live in logit space and map
// through a sigmoid into (0, 1); the fully sampled center block is stored as
// explicit locations and never trained. In TwoD mode there is one list per
// axis and the realized pattern is their tensor product.
struct ThetaParams {
  enum class Mode { OneD, TwoD };

  Mode mode = Mode::TwoD;
  Index grid_v = 0, grid_h = 0;      // P and Q (grid_h unused in OneD)
  RVec free_raw_v, free_raw_h;       // unconstrained
  RVec fixed_v, fixed_h;             // center-block locations in [0, 1)

  Index count_v() const { return free_raw_v.size() + fixed_v.size(); }
  Index count_h() const { return free_raw_h.size() + fixed_h.size(); }
  Index trainable_count() const {
    return free_raw_v.size() + free_raw_h.size();
  }
};

// Realized sampler plus, per axis, the provenance of each (sorted) location:
// source[i] == -1 for a fixed-center location, otherwise the index into the
// corresponding free_raw vector.
struct Realization {
  Sampler sampler;
  std::vector<Index> source_v, source_h;
};

double sigmoid(double x);

Realization realize(const ThetaParams& p);

// Variable-density initializer: a contiguous integer-bin block around DC
// (wrapped across 0/1) holds round(center_fraction * grid) fixed locations;
// free locations are rejection-sampled from a Gaussian density centered at
// DC with width vd_sigma (in cycles, wrapped distance).
ThetaParams init_variable_density(Rng& rng, ThetaParams::Mode mode,
                                  Index count_v, Index count_h, Index grid_v,
                                  Index grid_h, double center_fraction,
                                  double vd_sigma = 0.15);

// Pulls per-location gradients back to the free raw parameters through the
// sort permutation and the sigmoid chain rule. Fixed locations contribute
// nothing. The result is ordered (vertical free block, horizontal free
// block).
RVec raw_gradient(const ThetaParams& p, const Realization& r,
                  const RVec& d_vertical, const RVec& d_horizontal);

// One plain gradient step (used by tests; training uses Adam and calls
// raw_gradient_impl directly). Raw values are clamped to [-30, 30], which
// keeps sigmoid outputs strictly inside (0, 1).
void apply_grad(ThetaParams& p, const Realization& r, const RVec& d_vertical,
                const RVec& d_horizontal, double lr);

void clamp_raw(ThetaParams& p);

// Raw-parameter sidecar for exact training resumption (text, 17 significant
// digits), written next to the realized pattern file.
void save_theta(const ThetaParams& p, const std::filesystem::path& dir,
                const std::string& stem);
ThetaParams load_theta(const std::filesystem::path& dir,
                       const std::string& stem);

// Mean wrapped distance min(k, 1-k) of the realized free locations from DC.
double mean_center_distance(const ThetaParams& p);

}  // namespace ksopt

#endif  // KSOPT_SAMPLING_HPP
