#include <doctest.h>

#include <filesystem>

#include "ksopt/denoiser.hpp"
#include "ksopt/gradcheck.hpp"

using namespace ksopt;

namespace {

// Brute-force direct convolution with zero padding, used as the oracle for
// the shifted-block implementation.
RMat direct_conv(const Eigen::Matrix3d& w, const RMat& x) {
  RMat y = RMat::Zero(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r)
    for (Index c = 0; c < x.cols(); ++c) {
      double acc = 0.0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          Index rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= x.rows() || cc < 0 || cc >= x.cols()) continue;
          acc += w(dr + 1, dc + 1) * x(rr, cc);
        }
      y(r, c) = acc;
    }
  return y;
}

}  // namespace

TEST_CASE("all-zero parameters make the denoiser the identity") {
  Rng rng(1);
  NetParams p = make_net(3, 4, rng);
  p = zero_like(p);
  CMat x = randn_cmat(rng, 9, 7);
  CMat out = denoise(p, x);
  CHECK((out - x).norm() == 0.0);
}

TEST_CASE("output dims equal input dims on odd shapes") {
  Rng rng(2);
  NetParams p = make_net(2, 4, rng);
  CMat x = randn_cmat(rng, 7, 9);
  CMat out = denoise(p, x);
  CHECK(out.rows() == 7);
  CHECK(out.cols() == 9);
}

TEST_CASE("shape preservation across spatial sizes down to 3") {
  Rng rng(3);
  NetParams p = make_net(2, 4, rng);
  for (Index rows : {3, 4, 5, 16})
    for (Index cols : {3, 8, 11}) {
      CMat x = randn_cmat(rng, rows, cols);
      CMat out = denoise(p, x);
      CHECK(out.rows() == rows);
      CHECK(out.cols() == cols);
    }
}

TEST_CASE("single hand-built layer matches direct convolution") {
  // One 3x3 layer, 2 -> 2 channels, chosen so the real output channel mixes
  // both input channels; compared against the brute-force convolution.
  Rng rng(5);
  NetParams p;
  ConvLayer layer;
  layer.weight.assign(2, std::vector<Eigen::Matrix3d>(2));
  layer.weight[0][0] << 0.0, 1.0, 0.0, -0.5, 2.0, 0.25, 0.0, -1.0, 0.0;
  layer.weight[0][1] << 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0;
  layer.weight[1][0] << 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 0.0;
  layer.weight[1][1] << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9;
  layer.bias = RVec::Zero(2);
  p.layers.push_back(layer);

  CMat x = randn_cmat(rng, 8, 8);
  CMat out = denoise(p, x);
  RMat re = direct_conv(layer.weight[0][0], x.real()) +
            direct_conv(layer.weight[0][1], x.imag());
  RMat im = direct_conv(layer.weight[1][0], x.real()) +
            direct_conv(layer.weight[1][1], x.imag());
  CMat body = re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>();
  CHECK((out - (x - body)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("non-finite input is rejected") {
  Rng rng(7);
  NetParams p = make_net(2, 4, rng);
  CMat x = randn_cmat(rng, 8, 8);
  x(0, 0) = Complex(std::numeric_limits<double>::infinity(), 0);
  CHECK_THROWS_AS(denoise(p, x), std::invalid_argument);
}

TEST_CASE("every parameter gradient matches central finite differences") {
  GradCheckReport r = check_denoiser_gradients(99);
  CAPTURE(r.max_rel_err);
  CHECK(r.checks >= 150);  // D=2, F=4: all 148 params plus input probes
  CHECK(r.pass);
}

TEST_CASE("zero upstream gives zero gradients") {
  Rng rng(11);
  NetParams p = make_net(2, 4, rng);
  CMat x = randn_cmat(rng, 8, 8);
  DenoiseVjp vjp = denoise_vjp(p, x, CMat::Zero(8, 8));
  CHECK(flatten(vjp.param_grad).norm() == 0.0);
  CHECK(vjp.x_cot.norm() == 0.0);
}

TEST_CASE("input cotangent of the zero-parameter net is the upstream") {
  Rng rng(13);
  NetParams p = zero_like(make_net(3, 4, rng));
  CMat x = randn_cmat(rng, 8, 8);
  CMat upstream = randn_cmat(rng, 8, 8);
  DenoiseVjp vjp = denoise_vjp(p, x, upstream);
  CHECK((vjp.x_cot - upstream).norm() == 0.0);
}

TEST_CASE("denoise is deterministic") {
  Rng rng(17);
  NetParams p = make_net(3, 8, rng);
  CMat x = randn_cmat(rng, 16, 16);
  CMat a = denoise(p, x);
  CMat b = denoise(p, x);
  CHECK((a - b).norm() == 0.0);
}

TEST_CASE("flatten and unflatten round trip") {
  Rng rng(19);
  NetParams p = make_net(3, 6, rng);
  RVec flat = flatten(p);
  NetParams q = zero_like(p);
  unflatten(flat, q);
  CHECK((flatten(q) - flat).norm() == 0.0);
  CHECK(flat.size() == p.parameter_count());
}

TEST_CASE("checkpoints round trip through disk") {
  Rng rng(23);
  NetParams p = make_net(4, 6, rng);
  auto dir = std::filesystem::temp_directory_path() / "ksopt_denoiser_tests";
  save_net(p, dir, "net");
  NetParams back = load_net(dir, "net");
  CHECK(back.depth() == p.depth());
  CHECK((flatten(back) - flatten(p)).norm() == 0.0);
}

TEST_CASE("depth-1 nets are supported") {
  Rng rng(29);
  NetParams p = make_net(1, 16, rng);  // single 2 -> 2 layer
  CHECK(p.layers[0].in_channels() == 2);
  CHECK(p.layers[0].out_channels() == 2);
  CMat x = randn_cmat(rng, 6, 6);
  CHECK(denoise(p, x).rows() == 6);
}
