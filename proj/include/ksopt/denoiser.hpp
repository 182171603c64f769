#ifndef KSOPT_DENOISER_HPP
#define KSOPT_DENOISER_HPP

#include <filesystem>

#include "ksopt/tensor.hpp"

namespace ksopt {

// One zero-padded, stride-1 convolution layer with 3x3 kernels.
// weight[o][i] maps input channel i to output channel o; weight entry
// (dr+1, dc+1) multiplies the input pixel offset by (dr, dc).
struct ConvLayer {
  std::vector<std::vector<Eigen::Matrix3d>> weight;
  RVec bias;

  Index out_channels() const { return static_cast<Index>(weight.size()); }
  Index in_channels() const {
    return weight.empty() ? 0 : static_cast<Index>(weight[0].size());
  }
};

// Residual denoiser over (real, imag) channel pairs: denoise(x) returns
// x - body(x) where body is the conv stack with ReLU after every layer
// except the last. First layer takes 2 channels, last layer emits 2.
struct NetParams {
  std::vector<ConvLayer> layers;

  Index depth() const { return static_cast<Index>(layers.size()); }
  Index width() const {
    return layers.size() > 1 ? layers[0].out_channels() : 2;
  }
  Index parameter_count() const;
};

// Gradient accumulator, shape-congruent with NetParams.
using GradBuffer = NetParams;

// He-style init: kernel entries are N(0, 2/(9*c_in)), biases zero.
NetParams make_net(Index depth, Index width, Rng& rng);
NetParams zero_like(const NetParams& p);

void add_scaled(NetParams& dst, const NetParams& src, double scale);

CMat denoise(const NetParams& params, const CMat& x);

struct DenoiseVjp {
  GradBuffer param_grad;
  CMat x_cot;
};
DenoiseVjp denoise_vjp(const NetParams& params, const CMat& x,
                       const CMat& upstream);

// Flat views used by the optimizer and by finite-difference checks; the
// order is layer-major: all kernels of layer 0 (out, in, row, col), its
// biases, then layer 1, ...
RVec flatten(const NetParams& p);
void unflatten(const RVec& v, NetParams& p);

// Checkpoint: one JMT1 tensor per layer (kernels row-major with the bias
// appended as a final column block) plus a small manifest.
void save_net(const NetParams& p, const std::filesystem::path& dir,
              const std::string& stem);
NetParams load_net(const std::filesystem::path& dir, const std::string& stem);

}  // namespace ksopt

#endif  // KSOPT_DENOISER_HPP
