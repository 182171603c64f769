#include "ksopt/dc.hpp"

#include <cmath>

namespace ksopt {

namespace {

// CG on (A^H A + I) x = rhs.
DcResult cg_normal_plus_identity(const SamplingOperator& op,
                                 const CoilSet& coils, const CMat& rhs,
                                 const CMat& start, const CgConfig& cfg) {
  if (cfg.max_iters < 1) throw std::invalid_argument("cg: max_iters >= 1");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("cg: tol must be > 0");

  DcResult res;
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    res.image = CMat::Zero(rhs.rows(), rhs.cols());
    return res;
  }

  CMat x = start;
  CMat r = rhs - (apply_normal(op, coils, x) + x);
  CMat p = r;
  double rho = r.squaredNorm();
  res.rel_residual = std::sqrt(rho) / rhs_norm;
  res.residual_history.push_back(res.rel_residual);

  for (int it = 0; it < cfg.max_iters && res.rel_residual > cfg.tol; ++it) {
    CMat q = apply_normal(op, coils, p) + p;
    double curvature = std::real(frob_dot(p, q));
    if (!(curvature > 0.0)) {
      res.breakdown = true;
      break;
    }
    double alpha = rho / curvature;
    x += alpha * p;
    r -= alpha * q;
    double rho_next = r.squaredNorm();
    p = r + (rho_next / rho) * p;
    rho = rho_next;
    res.rel_residual = std::sqrt(rho) / rhs_norm;
    res.residual_history.push_back(res.rel_residual);
    res.iterations = it + 1;
  }
  res.image = std::move(x);
  return res;
}

void check_finite(const CMat& m, const char* what) {
  if (!m.allFinite())
    throw std::invalid_argument(std::string("dc_solve: non-finite ") + what);
}

}  // namespace

DcResult dc_solve(const SamplingOperator& op, const CoilSet& coils,
                  const std::vector<CMat>& b, const CMat& z,
                  const CgConfig& cfg, const CMat* x0) {
  check_finite(z, "z");
  for (const CMat& bj : b) check_finite(bj, "b");
  CMat rhs = z + apply_adjoint(op, coils, b);
  return cg_normal_plus_identity(op, coils, rhs, x0 ? *x0 : z, cfg);
}

DcResult dc_solve(const CoilSet& coils, const Sampler& s, const KSpaceData& b,
                  const CMat& z, const CgConfig& cfg) {
  return dc_solve(make_operator(s), coils, b.samples, z, cfg);
}

DcVjp dc_solve_vjp(const SamplingOperator& op, const CoilSet& coils,
                   const std::vector<CMat>& b, const CMat& z,
                   const CgConfig& cfg, const CMat& upstream,
                   const CMat* solution) {
  check_finite(upstream, "upstream");
  CMat x;
  if (solution) {
    x = *solution;
  } else {
    x = dc_solve(op, coils, b, z, cfg).image;
  }

  // Self-adjoint solve with the upstream cotangent as right-hand side.
  CMat w = cg_normal_plus_identity(op, coils, upstream,
                                   CMat::Zero(upstream.rows(), upstream.cols()),
                                   cfg)
               .image;

  DcVjp vjp;
  vjp.z_cot = w;
  vjp.b_cot = apply_forward(op, coils, w);

  std::vector<CMat> residual = apply_forward(op, coils, x);
  for (std::size_t j = 0; j < residual.size(); ++j)
    residual[j] = b[j] - residual[j];

  vjp.theta_cot = location_grad_pair(op, coils, w, residual);
  ThetaGrad second = location_grad_pair(op, coils, x, vjp.b_cot);
  vjp.theta_cot.d_vertical -= second.d_vertical;
  vjp.theta_cot.d_horizontal -= second.d_horizontal;
  return vjp;
}

DcVjp dc_solve_vjp(const CoilSet& coils, const Sampler& s, const KSpaceData& b,
                   const CMat& z, const CgConfig& cfg, const CMat& upstream) {
  return dc_solve_vjp(make_operator(s), coils, b.samples, z, cfg, upstream);
}

}  // namespace ksopt
