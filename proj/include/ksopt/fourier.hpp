#ifndef KSOPT_FOURIER_HPP
#define KSOPT_FOURIER_HPP

#include <filesystem>
#include <variant>

#include "ksopt/tensor.hpp"

namespace ksopt {

// Continuous-location 1-D Fourier sampler. Locations are normalized k-space
// coordinates in cycles per field of view, so location k and spatial index
// m = 0..N-1 pair up through the kernel exp(-2*pi*i*k*m) / sqrt(N). Sampling
// the integer bins {0, 1/N, ..., (N-1)/N} reproduces the unitary DFT.
struct Sampler1D {
  RVec locations;   // M values, each in [0, 1)
  Index grid_size;  // N

  Sampler1D() : grid_size(0) {}
  Sampler1D(RVec locs, Index n);

  Index samples() const { return locations.size(); }
  double normalization() const { return 1.0 / std::sqrt(double(grid_size)); }
};

// Tensor-product 2-D sampler: every pair (vertical location, horizontal
// location) is acquired, M = m_v * m_h samples of a P x Q image.
struct Sampler2D {
  Sampler1D vertical;    // m_v locations on grid P (image rows)
  Sampler1D horizontal;  // m_h locations on grid Q (image cols)

  Index samples() const { return vertical.samples() * horizontal.samples(); }
  double acceleration() const {
    return double(vertical.grid_size * horizontal.grid_size) /
           double(samples());
  }
};

using Sampler = std::variant<Sampler1D, Sampler2D>;

// Row of the sampling matrix at location k: entry m is
// exp(-2*pi*i*k*m) / sqrt(N). Throws if k is outside [0, 1).
CVec dft_matrix_row(double k, Index n);

// Full M x N sampling matrix (rows are dft_matrix_row at each location).
CMat dft_matrix(const Sampler1D& s);

// Entrywise derivative of dft_matrix with respect to each row's location:
// entry (i, m) is (-2*pi*i_unit*m) * dft_matrix(s)(i, m).
CMat dft_matrix_dk(const Sampler1D& s);

CVec forward_1d(const Sampler1D& s, const CVec& x);
CVec adjoint_1d(const Sampler1D& s, const CVec& y);

// B(a, b) = sum_{p,q} X(p, q) exp(-2*pi*i*(kv_a*p + kh_b*q)) / sqrt(P*Q),
// evaluated as Fv * X * Fh^T.
CMat forward_2d(const Sampler2D& s, const CMat& x);
CMat adjoint_2d(const Sampler2D& s, const CMat& b);

// d forward_1d(s, x)[i] / d k_i; cross terms vanish since sample i depends
// only on its own location.
Complex dforward_dk_1d(const Sampler1D& s, const CVec& x, Index i);

// Pattern text format: first line "pattern1d N M" or
// "pattern2d P Q m_v m_h", then one location per line with 17 significant
// digits (vertical block before horizontal block in the 2-D case).
void write_pattern(const Sampler& s, const std::filesystem::path& path);
Sampler read_pattern(const std::filesystem::path& path);

}  // namespace ksopt

#endif  // KSOPT_FOURIER_HPP
