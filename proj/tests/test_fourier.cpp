#include <doctest.h>

#include <filesystem>
#include <numbers>
#include <unsupported/Eigen/FFT>

#include "ksopt/fourier.hpp"

using namespace ksopt;

namespace {

// Independent FFT oracle: unitary DFT via kissfft (unsupported Eigen module),
// used only to cross-check the dense evaluation path.
CVec unitary_fft(const CVec& x) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(x.data(), x.data() + x.size());
  std::vector<Complex> out;
  fft.fwd(out, in);
  CVec y(x.size());
  for (Index i = 0; i < x.size(); ++i)
    y[i] = out[i] / std::sqrt(double(x.size()));
  return y;
}

Sampler1D full_grid_sampler(Index n) {
  RVec locs(n);
  for (Index i = 0; i < n; ++i) locs[i] = double(i) / double(n);
  return Sampler1D(locs, n);
}

Sampler1D random_sampler(Rng& rng, Index m, Index n) {
  RVec locs(m);
  for (Index i = 0; i < m; ++i) locs[i] = rng.next_uniform() * 0.9999;
  return Sampler1D(locs, n);
}

// Dense tensor-product oracle: the M x (P*Q) matrix with row (a, b) holding
// exp(-2*pi*i*(kv_a*p + kh_b*q)) / sqrt(P*Q) at row-major column p*Q + q.
CMat dense_forward_2d(const Sampler2D& s, const CMat& x) {
  const Index p = s.vertical.grid_size, q = s.horizontal.grid_size;
  const Index mv = s.vertical.samples(), mh = s.horizontal.samples();
  CVec xv(p * q);
  for (Index r = 0; r < p; ++r)
    for (Index c = 0; c < q; ++c) xv[r * q + c] = x(r, c);
  CMat out(mv, mh);
  const double norm = 1.0 / std::sqrt(double(p * q));
  for (Index a = 0; a < mv; ++a) {
    for (Index b = 0; b < mh; ++b) {
      Complex acc(0, 0);
      for (Index r = 0; r < p; ++r)
        for (Index c = 0; c < q; ++c) {
          double phase = -2.0 * std::numbers::pi *
                         (s.vertical.locations[a] * double(r) +
                          s.horizontal.locations[b] * double(c));
          acc += norm * Complex(std::cos(phase), std::sin(phase)) * xv[r * q + c];
        }
      out(a, b) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("dft row at k=0 is constant 1/sqrt(N)") {
  CVec row = dft_matrix_row(0.0, 4);
  for (Index m = 0; m < 4; ++m) {
    CHECK(row[m].real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(row[m].imag() == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("dft row at integer bin matches unitary DFT row") {
  CVec row = dft_matrix_row(0.25, 4);  // bin 1 of N=4
  CVec expected(4);
  expected << Complex(0.5, 0), Complex(0, -0.5), Complex(-0.5, 0), Complex(0, 0.5);
  for (Index m = 0; m < 4; ++m)
    CHECK(std::abs(row[m] - expected[m]) < 1e-15);
}

TEST_CASE("dft row entries are unimodular up to normalization") {
  Rng rng(3);
  CVec row = dft_matrix_row(rng.next_uniform(), 8);
  for (Index m = 0; m < 8; ++m)
    CHECK(std::abs(row[m]) == doctest::Approx(1.0 / std::sqrt(8.0)).epsilon(1e-14));
}

TEST_CASE("dft row rejects out-of-range k") {
  CHECK_THROWS_AS(dft_matrix_row(1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(dft_matrix_row(-0.1, 4), std::invalid_argument);
}

TEST_CASE("forward of a delta at m=0 is flat 1/sqrt(N)") {
  Rng rng(5);
  Sampler1D s = random_sampler(rng, 6, 16);
  CVec x = CVec::Zero(16);
  x[0] = Complex(1, 0);
  CVec y = forward_1d(s, x);
  for (Index i = 0; i < y.size(); ++i)
    CHECK(std::abs(y[i] - Complex(0.25, 0)) < 1e-14);
}

TEST_CASE("full integer grid equals unitary FFT") {
  Rng rng(11);
  const Index n = 16;
  Sampler1D s = full_grid_sampler(n);
  CVec x = randn_cvec(rng, n);
  CVec y = forward_1d(s, x);
  CVec oracle = unitary_fft(x);
  CHECK((y - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("circular shift multiplies samples by a phase") {
  Rng rng(13);
  const Index n = 16, d = 5;
  Sampler1D s = random_sampler(rng, 8, n);
  CVec x = randn_cvec(rng, n);
  CVec shifted(n);
  for (Index m = 0; m < n; ++m) shifted[m] = x[(m - d + n) % n];
  CVec y = forward_1d(s, x);
  CVec ys = forward_1d(s, shifted);
  for (Index i = 0; i < s.samples(); ++i) {
    double phase = -2.0 * std::numbers::pi * s.locations[i] * double(d);
    Complex factor(std::cos(phase), std::sin(phase));
    CHECK(std::abs(ys[i] - factor * y[i]) < 1e-12);
  }
}

TEST_CASE("adjoint identity holds for 100 random 1-D instances") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const Index n = 2 + Index(rng.next_u64() % 31);
    const Index m = 1 + Index(rng.next_u64() % 40);
    Sampler1D s = random_sampler(rng, m, n);
    CVec x = randn_cvec(rng, n);
    CVec y = randn_cvec(rng, m);
    // <a, b> = sum conj(a_i) b_i throughout; <Ax, y> == <x, A^H y>.
    Complex lhs = forward_1d(s, x).conjugate().cwiseProduct(y).sum();
    Complex rhs = x.conjugate().cwiseProduct(adjoint_1d(s, y)).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * x.norm() * y.norm());
  }
}

TEST_CASE("adjoint on the full grid inverts the unitary transform") {
  Rng rng(19);
  const Index n = 16;
  Sampler1D s = full_grid_sampler(n);
  CVec x = randn_cvec(rng, n);
  CHECK((adjoint_1d(s, forward_1d(s, x)) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adjoint of zero is zero") {
  Rng rng(23);
  Sampler1D s = random_sampler(rng, 4, 8);
  CHECK(adjoint_1d(s, CVec::Zero(4)).norm() == 0.0);
}

TEST_CASE("unitarity on the full grid") {
  Rng rng(29);
  Sampler1D s = full_grid_sampler(32);
  CVec x = randn_cvec(rng, 32);
  CHECK(forward_1d(s, x).norm() == doctest::Approx(x.norm()).epsilon(1e-13));
}

TEST_CASE("forward_2d matches the dense tensor-product oracle") {
  Rng rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    const Index p = 4 + Index(rng.next_u64() % 13);
    const Index q = 4 + Index(rng.next_u64() % 13);
    Sampler2D s;
    s.vertical = random_sampler(rng, 3 + Index(rng.next_u64() % 6), p);
    s.horizontal = random_sampler(rng, 3 + Index(rng.next_u64() % 6), q);
    CMat x = randn_cmat(rng, p, q);
    CHECK((forward_2d(s, x) - dense_forward_2d(s, x)).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("forward_2d of a delta at the origin is flat") {
  Rng rng(37);
  Sampler2D s;
  s.vertical = random_sampler(rng, 5, 8);
  s.horizontal = random_sampler(rng, 4, 8);
  CMat x = CMat::Zero(8, 8);
  x(0, 0) = Complex(1, 0);
  CMat b = forward_2d(s, x);
  for (Index a = 0; a < 5; ++a)
    for (Index c = 0; c < 4; ++c)
      CHECK(std::abs(b(a, c) - Complex(1.0 / 8.0, 0)) < 1e-14);
}

TEST_CASE("forward_2d on full grids equals the unitary 2-D FFT") {
  Rng rng(41);
  const Index p = 8, q = 8;
  Sampler2D s;
  s.vertical = full_grid_sampler(p);
  s.horizontal = full_grid_sampler(q);
  CMat x = randn_cmat(rng, p, q);
  CMat b = forward_2d(s, x);

  // Unitary 2-D FFT oracle: 1-D FFT along columns, then along rows.
  CMat stage(p, q);
  for (Index c = 0; c < q; ++c) stage.col(c) = unitary_fft(x.col(c));
  CMat oracle(p, q);
  for (Index r = 0; r < p; ++r)
    oracle.row(r) = unitary_fft(stage.row(r).transpose()).transpose();
  CHECK((b - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("2-D adjoint identity holds on random instances") {
  Rng rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Index p = 2 + Index(rng.next_u64() % 15);
    const Index q = 2 + Index(rng.next_u64() % 15);
    Sampler2D s;
    s.vertical = random_sampler(rng, 1 + Index(rng.next_u64() % 8), p);
    s.horizontal = random_sampler(rng, 1 + Index(rng.next_u64() % 8), q);
    CMat x = randn_cmat(rng, p, q);
    CMat y = randn_cmat(rng, s.vertical.samples(), s.horizontal.samples());
    Complex lhs = forward_2d(s, x).conjugate().cwiseProduct(y).sum();
    Complex rhs = x.conjugate().cwiseProduct(adjoint_2d(s, y)).sum();
    CHECK(std::abs(lhs - rhs) <= 1e-12 * x.norm() * y.norm());
  }
}

TEST_CASE("2-D adjoint of zero is zero and full grids invert") {
  Rng rng(47);
  Sampler2D s;
  s.vertical = full_grid_sampler(8);
  s.horizontal = full_grid_sampler(8);
  CHECK(adjoint_2d(s, CMat::Zero(8, 8)).norm() == 0.0);
  CMat x = randn_cmat(rng, 8, 8);
  CHECK((adjoint_2d(s, forward_2d(s, x)) - x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("location derivative of a delta at m=0 vanishes") {
  Rng rng(53);
  Sampler1D s = random_sampler(rng, 4, 8);
  CVec x = CVec::Zero(8);
  x[0] = Complex(1, 0);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(dforward_dk_1d(s, x, i)) == 0.0);
}

TEST_CASE("location derivative index out of range throws") {
  Rng rng(59);
  Sampler1D s = random_sampler(rng, 4, 8);
  CVec x = randn_cvec(rng, 8);
  CHECK_THROWS_AS(dforward_dk_1d(s, x, 4), std::invalid_argument);
}

TEST_CASE("derivatives at mirrored locations on a real-even signal conjugate") {
  // For real x with x[m] = x[N-m], samples at k and 1-k (here 0.2 and 0.8)
  // are conjugate, and so are the location derivatives up to sign.
  const Index n = 8;
  CVec x(n);
  x << 1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0;
  RVec locs(2);
  locs << 0.2, 0.8;
  Sampler1D s(locs, n);
  Complex d0 = dforward_dk_1d(s, x, 0);
  Complex d1 = dforward_dk_1d(s, x, 1);
  CHECK(std::abs(d0 + std::conj(d1)) < 1e-12);

  // At k = 0 and k = 0.5 the same symmetry forces d = -conj(d), i.e. the
  // derivative is purely imaginary.
  RVec special(2);
  special << 0.0, 0.5;
  Sampler1D ss(special, n);
  CHECK(std::abs(dforward_dk_1d(ss, x, 0).real()) < 1e-12);
  CHECK(std::abs(dforward_dk_1d(ss, x, 1).real()) < 1e-12);
}

TEST_CASE("dimension mismatches throw") {
  Rng rng(61);
  Sampler1D s = random_sampler(rng, 4, 8);
  CHECK_THROWS_AS(forward_1d(s, CVec::Zero(7)), std::invalid_argument);
  CHECK_THROWS_AS(adjoint_1d(s, CVec::Zero(5)), std::invalid_argument);
}

TEST_CASE("pattern files round trip through text") {
  Rng rng(67);
  Sampler1D s1 = random_sampler(rng, 5, 32);
  auto dir = std::filesystem::temp_directory_path() / "ksopt_fourier_tests";
  std::filesystem::create_directories(dir);
  write_pattern(s1, dir / "p1.pattern");
  Sampler back = read_pattern(dir / "p1.pattern");
  const Sampler1D& b1 = std::get<Sampler1D>(back);
  CHECK(b1.grid_size == 32);
  REQUIRE(b1.samples() == 5);
  for (Index i = 0; i < 5; ++i) CHECK(b1.locations[i] == s1.locations[i]);

  Sampler2D s2;
  s2.vertical = random_sampler(rng, 3, 16);
  s2.horizontal = random_sampler(rng, 4, 8);
  write_pattern(s2, dir / "p2.pattern");
  const Sampler2D& b2 = std::get<Sampler2D>(read_pattern(dir / "p2.pattern"));
  CHECK(b2.vertical.grid_size == 16);
  CHECK(b2.horizontal.grid_size == 8);
  for (Index i = 0; i < 3; ++i)
    CHECK(b2.vertical.locations[i] == s2.vertical.locations[i]);
  for (Index i = 0; i < 4; ++i)
    CHECK(b2.horizontal.locations[i] == s2.horizontal.locations[i]);
}
