#include <doctest.h>

#include "ksopt/dc.hpp"
#include "ksopt/gradcheck.hpp"

using namespace ksopt;

namespace {

Sampler2D random_sampler(Rng& rng, Index p, Index q, Index mv, Index mh) {
  RVec lv(mv), lh(mh);
  for (Index i = 0; i < mv; ++i) lv[i] = rng.next_uniform() * 0.9999;
  for (Index i = 0; i < mh; ++i) lh[i] = rng.next_uniform() * 0.9999;
  Sampler2D s;
  s.vertical = Sampler1D(lv, p);
  s.horizontal = Sampler1D(lh, q);
  return s;
}

CoilSet smooth_coils(Rng& rng, Index p, Index q, Index j) {
  CoilSet coils;
  for (Index k = 0; k < j; ++k) {
    CMat m = 0.3 * randn_cmat(rng, p, q);
    m.array() += Complex(1.0, 0.0);
    coils.maps.push_back(m / std::sqrt(double(j)));
  }
  return coils;
}

// Dense (A^H A + I) assembled column by column; the oracle linear solve.
CMat dense_dc_solve(const SamplingOperator& op, const CoilSet& coils,
                    const std::vector<CMat>& b, const CMat& z) {
  const Index p = z.rows(), q = z.cols(), n = p * q;
  CMat system(n, n);
  for (Index col = 0; col < n; ++col) {
    CMat e = CMat::Zero(p, q);
    e(col / q, col % q) = Complex(1, 0);
    CMat ne = apply_normal(op, coils, e) + e;
    for (Index row = 0; row < n; ++row) system(row, col) = ne(row / q, row % q);
  }
  CMat rhs_img = z + apply_adjoint(op, coils, b);
  CVec rhs(n);
  for (Index i = 0; i < n; ++i) rhs[i] = rhs_img(i / q, i % q);
  CVec x = system.fullPivLu().solve(rhs);
  CMat out(p, q);
  for (Index i = 0; i < n; ++i) out(i / q, i % q) = x[i];
  return out;
}

}  // namespace

TEST_CASE("consistent noise-free system returns the constructed solution") {
  Rng rng(1);
  const Index p = 64, q = 64;
  Sampler2D s = random_sampler(rng, p, q, 32, 32);
  CoilSet coils = smooth_coils(rng, p, q, 4);
  SamplingOperator op = make_operator(s);
  CMat truth = randn_cmat(rng, p, q);
  std::vector<CMat> b = apply_forward(op, coils, truth);

  CgConfig cfg{10, 1e-10};
  DcResult warm = dc_solve(op, coils, b, truth, cfg);
  CHECK((warm.image - truth).norm() / truth.norm() <= 1e-5);

  // Cold start exercises actual CG convergence to the same fixed point.
  CMat zero = CMat::Zero(p, q);
  DcResult cold = dc_solve(op, coils, b, truth, cfg, &zero);
  CHECK((cold.image - truth).norm() / truth.norm() <= 1e-5);
}

TEST_CASE("zero operator reduces the system to the identity") {
  Rng rng(3);
  Sampler2D s = random_sampler(rng, 8, 8, 4, 4);
  CoilSet coils;
  coils.maps.push_back(CMat::Zero(8, 8));
  SamplingOperator op = make_operator(s);
  std::vector<CMat> b = {CMat::Zero(4, 4)};
  CMat z = randn_cmat(rng, 8, 8);
  DcResult res = dc_solve(op, coils, b, z, CgConfig{});
  CHECK((res.image - z).norm() == 0.0);
  CHECK(res.rel_residual <= 1e-10);
}

TEST_CASE("matches a dense direct solve on a small instance") {
  Rng rng(5);
  const Index p = 8, q = 8;
  Sampler2D s = random_sampler(rng, p, q, 5, 5);
  CoilSet coils = smooth_coils(rng, p, q, 2);
  SamplingOperator op = make_operator(s);
  CMat rho = randn_cmat(rng, p, q);
  std::vector<CMat> b = apply_forward(op, coils, rho);
  CMat z = randn_cmat(rng, p, q);

  CgConfig cfg{200, 1e-14};
  DcResult res = dc_solve(op, coils, b, z, cfg);
  CMat oracle = dense_dc_solve(op, coils, b, z);
  CHECK((res.image - oracle).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("non-expansive when b is zero") {
  Rng rng(7);
  Sampler2D s = random_sampler(rng, 16, 16, 8, 8);
  CoilSet coils = smooth_coils(rng, 16, 16, 3);
  SamplingOperator op = make_operator(s);
  std::vector<CMat> b(3, CMat::Zero(8, 8));
  for (int trial = 0; trial < 100; ++trial) {
    CMat z = randn_cmat(rng, 16, 16);
    DcResult res = dc_solve(op, coils, b, z, CgConfig{});
    CHECK(res.image.norm() <= z.norm() * (1.0 + 1e-12));
  }
}

TEST_CASE("relative residual is non-increasing across iterations") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    Sampler2D s = random_sampler(rng, 12, 12, 6, 6);
    CoilSet coils = smooth_coils(rng, 12, 12, 2);
    SamplingOperator op = make_operator(s);
    CMat rho = randn_cmat(rng, 12, 12);
    std::vector<CMat> b = apply_forward(op, coils, rho);
    CMat z = randn_cmat(rng, 12, 12);
    DcResult res = dc_solve(op, coils, b, z, CgConfig{15, 1e-14});
    for (std::size_t i = 1; i < res.residual_history.size(); ++i)
      CHECK(res.residual_history[i] <= res.residual_history[i - 1] * (1 + 1e-12));
  }
}

TEST_CASE("non-finite inputs are rejected") {
  Rng rng(11);
  Sampler2D s = random_sampler(rng, 8, 8, 4, 4);
  CoilSet coils = smooth_coils(rng, 8, 8, 2);
  SamplingOperator op = make_operator(s);
  CMat rho = randn_cmat(rng, 8, 8);
  std::vector<CMat> b = apply_forward(op, coils, rho);
  CMat z = randn_cmat(rng, 8, 8);
  z(3, 3) = Complex(std::nan(""), 0.0);
  CHECK_THROWS_AS(dc_solve(op, coils, b, z, CgConfig{}), std::invalid_argument);
}

TEST_CASE("vjp z-gradient matches finite differences") {
  GradCheckReport r = check_dc_z_gradient(77);
  CAPTURE(r.max_rel_err);
  CHECK(r.pass);
}

TEST_CASE("vjp location gradient matches finite differences") {
  GradCheckReport r = check_dc_location_gradient(78);
  CAPTURE(r.max_rel_err);
  CHECK(r.pass);
}

TEST_CASE("zero upstream gives zero cotangents") {
  Rng rng(13);
  Sampler2D s = random_sampler(rng, 8, 8, 4, 4);
  CoilSet coils = smooth_coils(rng, 8, 8, 2);
  SamplingOperator op = make_operator(s);
  CMat rho = randn_cmat(rng, 8, 8);
  std::vector<CMat> b = apply_forward(op, coils, rho);
  CMat z = randn_cmat(rng, 8, 8);
  DcVjp vjp = dc_solve_vjp(op, coils, b, z, CgConfig{}, CMat::Zero(8, 8));
  CHECK(vjp.z_cot.norm() == 0.0);
  CHECK(vjp.theta_cot.d_vertical.norm() == 0.0);
  CHECK(vjp.theta_cot.d_horizontal.norm() == 0.0);
}

TEST_CASE("the z-cotangent operator is the solve operator itself") {
  // Self-adjointness: <vjp_z(u), w> == <u, dc_solve_linearized(w)>, i.e.
  // applying the solve to the upstream equals the z-cotangent.
  Rng rng(17);
  Sampler2D s = random_sampler(rng, 8, 8, 4, 4);
  CoilSet coils = smooth_coils(rng, 8, 8, 2);
  SamplingOperator op = make_operator(s);
  CMat rho = randn_cmat(rng, 8, 8);
  std::vector<CMat> b = apply_forward(op, coils, rho);
  CMat z = randn_cmat(rng, 8, 8);
  CgConfig cfg{100, 1e-13};

  CMat u = randn_cmat(rng, 8, 8);
  CMat w = randn_cmat(rng, 8, 8);
  DcVjp vu = dc_solve_vjp(op, coils, b, z, cfg, u);
  // Linearized forward in z: x(z + t*w) - x(z) = t * S w, so S w equals the
  // solve applied to w with b = 0 and start 0.
  std::vector<CMat> zero_b(2, CMat::Zero(4, 4));
  CMat zero = CMat::Zero(8, 8);
  CMat sw = dc_solve(op, coils, zero_b, w, cfg, &zero).image;
  Complex lhs = frob_dot(vu.z_cot, w);
  Complex rhs = frob_dot(u, sw);
  CHECK(std::abs(lhs - rhs) <= 1e-10 * u.norm() * w.norm());
}
