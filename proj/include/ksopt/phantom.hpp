#ifndef KSOPT_PHANTOM_HPP
#define KSOPT_PHANTOM_HPP

#include <filesystem>

#include "ksopt/mri.hpp"

namespace ksopt {

struct Ellipse {
  double center_y = 0.0, center_x = 0.0;  // normalized coords in [-1, 1]
  double axis_y = 0.5, axis_x = 0.5;      // semi-axes in the same units
  double angle = 0.0;                     // radians, counterclockwise
  Complex amplitude = Complex(1.0, 0.0);
};

struct PhantomSpec {
  Index rows = 0, cols = 0;
  std::vector<Ellipse> ellipses;
  // Smooth unit-magnitude phase exp(2*pi*i*(c0*y + c1*x + c2*x*y)).
  std::array<double, 3> phase_coeffs = {0.0, 0.0, 0.0};
  std::uint64_t seed = 0;
};

// Anti-aliased rendering: each pixel is averaged over supersample^2
// stratified subsamples, then the magnitude is normalized to a maximum of 1.
CMat render(const PhantomSpec& spec, int supersample = 4);

// Smooth synthetic coil maps: Gaussian magnitude bumps centered at equally
// spaced points on the image border with gentle linear phase ramps,
// normalized pointwise so sum_j |s_j|^2 = 1. J = 1 yields s == 1.
CoilSet make_coils(Index rows, Index cols, Index j);

struct Corpus {
  std::vector<PhantomSpec> train_specs, val_specs, test_specs;
  std::vector<CMat> train, val, test;
  CoilSet coils;
  Index rows = 0, cols = 0;
  std::uint64_t seed = 0;
};

// Seeded corpus with disjoint splits (per-item seeds derive from the master
// seed and the split tag) and one shared coil set.
Corpus make_corpus(Rng& rng, Index n_train, Index n_val, Index n_test,
                   Index rows, Index cols, Index coils);

void save_corpus(const Corpus& c, const std::filesystem::path& dir);
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace ksopt

#endif  // KSOPT_PHANTOM_HPP
