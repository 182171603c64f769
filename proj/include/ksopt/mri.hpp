#ifndef KSOPT_MRI_HPP
#define KSOPT_MRI_HPP

#include "ksopt/fourier.hpp"
#include "ksopt/tensor.hpp"

namespace ksopt {

// J complex sensitivity maps over the image grid. In 1-D signal mode the
// maps are N x 1 columns.
struct CoilSet {
  std::vector<CMat> maps;

  Index coils() const { return static_cast<Index>(maps.size()); }
  Index rows() const { return maps.empty() ? 0 : maps[0].rows(); }
  Index cols() const { return maps.empty() ? 0 : maps[0].cols(); }
};

// Acquired k-space samples, one m_v x m_h block per coil (m_h = 1 in 1-D
// signal mode), plus the noise level and the sampler used at acquisition.
struct KSpaceData {
  std::vector<CMat> samples;
  double sigma = 0.0;
  Sampler sampler;
};

// Precomputed axis matrices for one sampler. A 1-D sampler is embedded as
// the vertical axis with a trivial single-bin horizontal axis, so every
// consumer can use the same separable code path. Fh_dk is zero for the
// trivial axis (its location is not a parameter).
struct SamplingOperator {
  CMat Fv, Fh;        // m_v x P and m_h x Q sampling matrices
  CMat Fv_dk, Fh_dk;  // entrywise location derivatives of Fv, Fh
  bool one_d = false;

  Index image_rows() const { return Fv.cols(); }
  Index image_cols() const { return Fh.cols(); }
  Index sample_rows() const { return Fv.rows(); }
  Index sample_cols() const { return Fh.rows(); }
};

SamplingOperator make_operator(const Sampler& s);

// Per-axis gradient accumulator for derivatives with respect to sampling
// locations; entries align with the realized location order of the sampler.
struct ThetaGrad {
  RVec d_vertical;
  RVec d_horizontal;

  void setZero(Index mv, Index mh) {
    d_vertical = RVec::Zero(mv);
    d_horizontal = RVec::Zero(mh);
  }
  ThetaGrad& operator+=(const ThetaGrad& o) {
    d_vertical += o.d_vertical;
    d_horizontal += o.d_horizontal;
    return *this;
  }
};

// b_j = F (s_j . rho), one block per coil.
std::vector<CMat> apply_forward(const SamplingOperator& op, const CoilSet& coils,
                                const CMat& rho);
// sum_j conj(s_j) . F^H b_j.
CMat apply_adjoint(const SamplingOperator& op, const CoilSet& coils,
                   const std::vector<CMat>& b);
// A^H A x; Hermitian positive semidefinite.
CMat apply_normal(const SamplingOperator& op, const CoilSet& coils,
                  const CMat& x);

// For every sampling location, the real inner product
// Re< (dA/dk) input, factor > summed over coils. Combined with suitable
// (input, factor) pairs this is the only primitive the reverse-mode rules
// need for location derivatives.
ThetaGrad location_grad_pair(const SamplingOperator& op, const CoilSet& coils,
                             const CMat& input, const std::vector<CMat>& factor);

// Spec-level wrappers that build the operator on the fly.
KSpaceData forward_mc(const CoilSet& coils, const Sampler& s, const CMat& rho);
CMat adjoint_mc(const CoilSet& coils, const Sampler& s, const KSpaceData& b);
CMat normal_op(const CoilSet& coils, const Sampler& s, const CMat& x);

// forward_mc plus additive complex white Gaussian noise of standard
// deviation sigma per complex sample (sigma / sqrt(2) per component).
KSpaceData acquire(const CoilSet& coils, const Sampler& s, const CMat& rho,
                   double sigma, Rng& rng);

// One JMT1 tensor (J x m_v x m_h, or J x M in 1-D mode) plus a text sidecar
// naming sigma and the pattern file.
void save_kspace(const KSpaceData& b, const std::filesystem::path& dir,
                 const std::string& stem);
KSpaceData load_kspace(const std::filesystem::path& dir,
                       const std::string& stem);

Complex frob_dot(const CMat& a, const CMat& b);

}  // namespace ksopt

#endif  // KSOPT_MRI_HPP
