#ifndef KSOPT_DC_HPP
#define KSOPT_DC_HPP

#include "ksopt/mri.hpp"

namespace ksopt {

struct CgConfig {
  int max_iters = 10;
  double tol = 1e-10;  // relative residual threshold
};

struct DcResult {
  CMat image;
  double rel_residual = 0.0;
  int iterations = 0;
  bool breakdown = false;
  std::vector<double> residual_history;  // rel residual after each iteration
};

// Solves (A^H A + I) x = z + A^H b by conjugate gradients, warm-started at
// x0 = z. The system matrix is Hermitian positive definite, so the plain
// CG recurrence applies with Frobenius inner products.
DcResult dc_solve(const SamplingOperator& op, const CoilSet& coils,
                  const std::vector<CMat>& b, const CMat& z,
                  const CgConfig& cfg, const CMat* x0 = nullptr);

DcResult dc_solve(const CoilSet& coils, const Sampler& s, const KSpaceData& b,
                  const CMat& z, const CgConfig& cfg);

// Reverse-mode rule for dc_solve at its converged point. With
// w = (A^H A + I)^{-1} upstream:
//   z cotangent  = w                       (the system is self-adjoint)
//   b cotangent  = A w
//   location grads = Re<(dA/dk) w, b - A x> - Re<(dA/dk) x, A w>
// The b cotangent is exposed so callers can chain through measurements that
// themselves depend on the sampling locations.
struct DcVjp {
  CMat z_cot;
  ThetaGrad theta_cot;
  std::vector<CMat> b_cot;
};

DcVjp dc_solve_vjp(const SamplingOperator& op, const CoilSet& coils,
                   const std::vector<CMat>& b, const CMat& z,
                   const CgConfig& cfg, const CMat& upstream,
                   const CMat* solution = nullptr);

DcVjp dc_solve_vjp(const CoilSet& coils, const Sampler& s, const KSpaceData& b,
                   const CMat& z, const CgConfig& cfg, const CMat& upstream);

}  // namespace ksopt

#endif  // KSOPT_DC_HPP
