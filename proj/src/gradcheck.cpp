#include "ksopt/gradcheck.hpp"

#include <cmath>

namespace ksopt {

double rel_err(double analytic, double fd) {
  const double denom =
      std::max({std::abs(analytic), std::abs(fd), 1e-10});
  return std::abs(analytic - fd) / denom;
}

namespace {

constexpr double kFdStep = 1e-5;

Sampler2D random_sampler_2d(Rng& rng, Index p, Index q, Index mv, Index mh) {
  RVec lv(mv), lh(mh);
  for (Index i = 0; i < mv; ++i) lv[i] = rng.next_uniform() * 0.999;
  for (Index i = 0; i < mh; ++i) lh[i] = rng.next_uniform() * 0.999;
  Sampler2D s;
  s.vertical = Sampler1D(lv, p);
  s.horizontal = Sampler1D(lh, q);
  return s;
}

CoilSet random_coils(Rng& rng, Index p, Index q, Index j) {
  CoilSet coils;
  for (Index k = 0; k < j; ++k) {
    // Smooth-ish random maps, bounded away from wild magnitudes.
    CMat m = 0.5 * randn_cmat(rng, p, q);
    m.array() += Complex(1.0, 0.0);
    coils.maps.push_back(m / std::sqrt(double(j)));
  }
  return coils;
}

// Small seeded training problem shared by the pipeline checks.
struct PipelineFixture {
  ModelState state;
  CoilSet coils;
  std::vector<BatchItem> batch;
  double sigma = 0.01;
};

PipelineFixture make_pipeline_fixture(std::uint64_t seed, Index rows,
                                      Index cols, Index n_coils, int unroll,
                                      Arch arch) {
  Rng rng(seed);
  PipelineFixture fx;
  const bool one_d = cols == 1;
  Rng theta_rng = rng.derive(1);
  fx.state.theta = init_variable_density(
      theta_rng, one_d ? ThetaParams::Mode::OneD : ThetaParams::Mode::TwoD,
      std::max<Index>(rows / 2, 2), one_d ? 0 : std::max<Index>(cols / 2, 2),
      rows, cols, 0.0);
  Rng phi_rng = rng.derive(2);
  fx.state.phi = make_net(2, 4, phi_rng);
  fx.state.unroll_depth = unroll;
  fx.state.cg = CgConfig{30, 1e-12};
  fx.state.strategy = Strategy::Joint;
  fx.state.arch = arch;

  fx.coils = random_coils(rng, rows, cols, n_coils);
  Rng item_rng = rng.derive(3);
  for (int i = 0; i < 2; ++i) {
    BatchItem item;
    item.rho = randn_cmat(item_rng, rows, cols);
    SamplingOperator op = make_operator(realize(fx.state.theta).sampler);
    for (Index j = 0; j < n_coils; ++j)
      item.noise.push_back(
          randn_cmat(item_rng, op.sample_rows(), op.sample_cols()));
    fx.batch.push_back(std::move(item));
  }
  return fx;
}

}  // namespace

GradCheckReport check_fourier_location_derivative(std::uint64_t seed) {
  GradCheckReport report{"fourier_dk", 0, 0.0, 1e-5, false};
  Rng rng(seed);
  const Index n = 32;
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    RVec locs(4);
    for (Index i = 0; i < 4; ++i)
      locs[i] = 0.01 + rng.next_uniform() * 0.97;
    Sampler1D s(locs, n);
    CVec x = randn_cvec(rng, n);
    for (Index i = 0; i < s.samples(); ++i) {
      Complex analytic = dforward_dk_1d(s, x, i);
      RVec bumped = locs;
      bumped[i] = locs[i] + h;
      Sampler1D sp(bumped, n);
      bumped[i] = locs[i] - h;
      Sampler1D sm(bumped, n);
      Complex fd = (forward_1d(sp, x)[i] - forward_1d(sm, x)[i]) / (2.0 * h);
      const double denom = std::max({std::abs(analytic), std::abs(fd), 1e-10});
      report.max_rel_err =
          std::max(report.max_rel_err, std::abs(analytic - fd) / denom);
      report.checks += 1;
    }
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

GradCheckReport check_dc_z_gradient(std::uint64_t seed) {
  GradCheckReport report{"dc_z_grad", 0, 0.0, 1e-4, false};
  Rng rng(seed);
  const Index p = 16, q = 16, j = 2;
  Sampler2D s = random_sampler_2d(rng, p, q, 8, 8);
  SamplingOperator op = make_operator(s);
  CoilSet coils = random_coils(rng, p, q, j);
  CMat rho = randn_cmat(rng, p, q);
  std::vector<CMat> b = apply_forward(op, coils, rho);
  CMat z = randn_cmat(rng, p, q);
  CgConfig cfg{40, 1e-13};

  auto loss = [&](const CMat& zz) {
    return dc_solve(op, coils, b, zz, cfg).image.squaredNorm();
  };
  CMat x = dc_solve(op, coils, b, z, cfg).image;
  DcVjp vjp = dc_solve_vjp(op, coils, b, z, cfg, 2.0 * x, &x);

  for (int trial = 0; trial < 12; ++trial) {
    Index e = static_cast<Index>(rng.next_u64() % std::uint64_t(p * q));
    bool imag_part = (rng.next_u64() & 1) != 0;
    CMat zp = z, zm = z;
    Complex delta = imag_part ? Complex(0, kFdStep) : Complex(kFdStep, 0);
    zp(e / q, e % q) += delta;
    zm(e / q, e % q) -= delta;
    double fd = (loss(zp) - loss(zm)) / (2.0 * kFdStep);
    double analytic = imag_part ? vjp.z_cot(e / q, e % q).imag()
                                : vjp.z_cot(e / q, e % q).real();
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic, fd));
    report.checks += 1;
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

GradCheckReport check_dc_location_gradient(std::uint64_t seed) {
  GradCheckReport report{"dc_location_grad", 0, 0.0, 1e-3, false};
  Rng rng(seed);
  const Index p = 16, q = 16, j = 2, mv = 8, mh = 8;
  Sampler2D s = random_sampler_2d(rng, p, q, mv, mh);
  CoilSet coils = random_coils(rng, p, q, j);
  CMat rho = randn_cmat(rng, p, q);
  CMat z = randn_cmat(rng, p, q);
  CgConfig cfg{40, 1e-13};

  // b is held fixed (acquired once at the unperturbed locations).
  std::vector<CMat> b = apply_forward(make_operator(s), coils, rho);

  auto loss = [&](const Sampler2D& ss) {
    return dc_solve(make_operator(ss), coils, b, z, cfg).image.squaredNorm();
  };

  SamplingOperator op = make_operator(s);
  CMat x = dc_solve(op, coils, b, z, cfg).image;
  DcVjp vjp = dc_solve_vjp(op, coils, b, z, cfg, 2.0 * x, &x);

  for (Index i = 0; i < mv; ++i) {
    Sampler2D sp = s, sm = s;
    sp.vertical.locations[i] += kFdStep;
    sm.vertical.locations[i] -= kFdStep;
    double fd = (loss(sp) - loss(sm)) / (2.0 * kFdStep);
    report.max_rel_err = std::max(report.max_rel_err,
                                  rel_err(vjp.theta_cot.d_vertical[i], fd));
    report.checks += 1;
  }
  for (Index i = 0; i < mh; ++i) {
    Sampler2D sp = s, sm = s;
    sp.horizontal.locations[i] += kFdStep;
    sm.horizontal.locations[i] -= kFdStep;
    double fd = (loss(sp) - loss(sm)) / (2.0 * kFdStep);
    report.max_rel_err = std::max(report.max_rel_err,
                                  rel_err(vjp.theta_cot.d_horizontal[i], fd));
    report.checks += 1;
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

GradCheckReport check_denoiser_gradients(std::uint64_t seed) {
  GradCheckReport report{"denoiser_grad", 0, 0.0, 1e-4, false};
  Rng rng(seed);
  Rng net_rng = rng.derive(1);
  NetParams params = make_net(2, 4, net_rng);
  CMat x = randn_cmat(rng, 8, 8);
  CMat target = randn_cmat(rng, 8, 8);

  auto loss = [&](const NetParams& pp) {
    return (denoise(pp, x) - target).squaredNorm();
  };
  CMat out = denoise(params, x);
  DenoiseVjp vjp = denoise_vjp(params, x, 2.0 * (out - target));
  RVec analytic = flatten(vjp.param_grad);

  RVec flat = flatten(params);
  for (Index m = 0; m < flat.size(); ++m) {
    NetParams pp = params;
    RVec f = flat;
    f[m] = flat[m] + kFdStep;
    unflatten(f, pp);
    double lp = loss(pp);
    f[m] = flat[m] - kFdStep;
    unflatten(f, pp);
    double lm = loss(pp);
    double fd = (lp - lm) / (2.0 * kFdStep);
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic[m], fd));
    report.checks += 1;
  }

  // Input cotangent, probed on a few entries.
  for (int trial = 0; trial < 8; ++trial) {
    Index e = static_cast<Index>(rng.next_u64() % 64);
    bool imag_part = (rng.next_u64() & 1) != 0;
    CMat xp = x, xm = x;
    Complex delta = imag_part ? Complex(0, kFdStep) : Complex(kFdStep, 0);
    xp(e / 8, e % 8) += delta;
    xm(e / 8, e % 8) -= delta;
    double fd = ((denoise(params, xp) - target).squaredNorm() -
                 (denoise(params, xm) - target).squaredNorm()) /
                (2.0 * kFdStep);
    double analytic_e = imag_part ? vjp.x_cot(e / 8, e % 8).imag()
                                  : vjp.x_cot(e / 8, e % 8).real();
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic_e, fd));
    report.checks += 1;
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

GradCheckReport check_pipeline_theta(std::uint64_t seed, Index rows, Index cols,
                                     Index coils, int unroll, Index n_params,
                                     double tol, Arch arch) {
  GradCheckReport report{"pipeline_theta", 0, 0.0, tol, false};
  PipelineFixture fx = make_pipeline_fixture(seed, rows, cols, coils, unroll, arch);

  Realization real = realize(fx.state.theta);
  BackwardResult back = backward(fx.state, fx.coils, fx.batch, fx.sigma, 1);
  RVec analytic = raw_gradient(fx.state.theta, real, back.theta_grad.d_vertical,
                               back.theta_grad.d_horizontal);

  Rng pick(seed ^ 0xabcdef);
  const Index total = fx.state.theta.trainable_count();
  for (Index c = 0; c < std::min(n_params, total); ++c) {
    Index m = static_cast<Index>(pick.next_u64() % std::uint64_t(total));
    ModelState sp = fx.state, sm = fx.state;
    const Index nv = fx.state.theta.free_raw_v.size();
    if (m < nv) {
      sp.theta.free_raw_v[m] += kFdStep;
      sm.theta.free_raw_v[m] -= kFdStep;
    } else {
      sp.theta.free_raw_h[m - nv] += kFdStep;
      sm.theta.free_raw_h[m - nv] -= kFdStep;
    }
    double fd = (training_loss(sp, fx.coils, fx.batch, fx.sigma) -
                 training_loss(sm, fx.coils, fx.batch, fx.sigma)) /
                (2.0 * kFdStep);
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic[m], fd));
    report.checks += 1;
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

GradCheckReport check_pipeline_phi(std::uint64_t seed, Index rows, Index cols,
                                   Index coils, int unroll, Index n_params,
                                   double tol, Arch arch) {
  GradCheckReport report{"pipeline_phi", 0, 0.0, tol, false};
  PipelineFixture fx = make_pipeline_fixture(seed, rows, cols, coils, unroll, arch);

  BackwardResult back = backward(fx.state, fx.coils, fx.batch, fx.sigma, 1);
  RVec analytic = flatten(back.phi_grad);
  RVec flat = flatten(fx.state.phi);

  Rng pick(seed ^ 0x123457);
  for (Index c = 0; c < std::min(n_params, flat.size()); ++c) {
    Index m = static_cast<Index>(pick.next_u64() % std::uint64_t(flat.size()));
    ModelState ss = fx.state;
    RVec f = flat;
    f[m] = flat[m] + kFdStep;
    unflatten(f, ss.phi);
    double lp = training_loss(ss, fx.coils, fx.batch, fx.sigma);
    f[m] = flat[m] - kFdStep;
    unflatten(f, ss.phi);
    double lm = training_loss(ss, fx.coils, fx.batch, fx.sigma);
    double fd = (lp - lm) / (2.0 * kFdStep);
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic[m], fd));
    report.checks += 1;
  }
  report.pass = report.max_rel_err <= report.tol;
  return report;
}

std::vector<GradCheckReport> run_all_gradchecks(std::uint64_t seed) {
  std::vector<GradCheckReport> reports;
  reports.push_back(check_fourier_location_derivative(seed));
  reports.push_back(check_dc_z_gradient(seed + 1));
  reports.push_back(check_dc_location_gradient(seed + 2));
  reports.push_back(check_denoiser_gradients(seed + 3));
  reports.push_back(
      check_pipeline_theta(seed + 4, 16, 16, 2, 2, 20, 1e-3, Arch::Unrolled));
  reports.push_back(
      check_pipeline_phi(seed + 5, 16, 16, 2, 2, 20, 1e-4, Arch::Unrolled));
  reports.push_back(
      check_pipeline_theta(seed + 6, 16, 16, 2, 1, 10, 1e-3, Arch::Direct));
  reports.push_back(
      check_pipeline_phi(seed + 7, 16, 16, 2, 1, 10, 1e-4, Arch::Direct));
  return reports;
}

}  // namespace ksopt
