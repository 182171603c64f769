#include "ksopt/denoiser.hpp"

#include <cmath>
#include <fstream>

namespace ksopt {

namespace {

using Channels = std::vector<RMat>;

// y_o += sum_i conv(x_i, w[o][i]) with zero padding. Implemented as nine
// shifted block accumulations so Eigen vectorizes the inner loops.
void conv_accumulate(const Eigen::Matrix3d& w, const RMat& x, RMat& y) {
  const Index p = x.rows(), q = x.cols();
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const double wv = w(dr + 1, dc + 1);
      if (wv == 0.0) continue;
      const Index r0 = std::max<Index>(0, -dr), r1 = std::min<Index>(p, p - dr);
      const Index c0 = std::max<Index>(0, -dc), c1 = std::min<Index>(q, q - dc);
      if (r1 <= r0 || c1 <= c0) continue;
      y.block(r0, c0, r1 - r0, c1 - c0) +=
          wv * x.block(r0 + dr, c0 + dc, r1 - r0, c1 - c0);
    }
  }
}

// Transpose of conv_accumulate: dx_i += corr(delta_o, w[o][i]).
void conv_transpose_accumulate(const Eigen::Matrix3d& w, const RMat& delta,
                               RMat& dx) {
  const Index p = delta.rows(), q = delta.cols();
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const double wv = w(dr + 1, dc + 1);
      if (wv == 0.0) continue;
      const Index r0 = std::max<Index>(0, -dr), r1 = std::min<Index>(p, p - dr);
      const Index c0 = std::max<Index>(0, -dc), c1 = std::min<Index>(q, q - dc);
      if (r1 <= r0 || c1 <= c0) continue;
      dx.block(r0 + dr, c0 + dc, r1 - r0, c1 - c0) +=
          wv * delta.block(r0, c0, r1 - r0, c1 - c0);
    }
  }
}

void conv_weight_grad(const RMat& x, const RMat& delta, Eigen::Matrix3d& dw) {
  const Index p = x.rows(), q = x.cols();
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const Index r0 = std::max<Index>(0, -dr), r1 = std::min<Index>(p, p - dr);
      const Index c0 = std::max<Index>(0, -dc), c1 = std::min<Index>(q, q - dc);
      double acc = 0.0;
      if (r1 > r0 && c1 > c0)
        acc = delta.block(r0, c0, r1 - r0, c1 - c0)
                  .cwiseProduct(x.block(r0 + dr, c0 + dc, r1 - r0, c1 - c0))
                  .sum();
      dw(dr + 1, dc + 1) += acc;
    }
  }
}

Channels layer_forward(const ConvLayer& layer, const Channels& in, bool relu) {
  Channels out(layer.out_channels());
  const Index p = in[0].rows(), q = in[0].cols();
  for (Index o = 0; o < layer.out_channels(); ++o) {
    out[o] = RMat::Constant(p, q, layer.bias[o]);
    for (Index i = 0; i < layer.in_channels(); ++i)
      conv_accumulate(layer.weight[o][i], in[i], out[o]);
    if (relu) out[o] = out[o].cwiseMax(0.0);
  }
  return out;
}

void check_net(const NetParams& params) {
  if (params.layers.empty())
    throw std::invalid_argument("denoiser: no layers");
  if (params.layers.front().in_channels() != 2 ||
      params.layers.back().out_channels() != 2)
    throw std::invalid_argument("denoiser: io channels must be 2");
  for (std::size_t l = 1; l < params.layers.size(); ++l)
    if (params.layers[l].in_channels() != params.layers[l - 1].out_channels())
      throw std::invalid_argument("denoiser: channel mismatch between layers");
}

}  // namespace

Index NetParams::parameter_count() const {
  Index n = 0;
  for (const ConvLayer& l : layers)
    n += l.out_channels() * l.in_channels() * 9 + l.out_channels();
  return n;
}

NetParams make_net(Index depth, Index width, Rng& rng) {
  if (depth < 1) throw std::invalid_argument("denoiser depth must be >= 1");
  if (width < 1) throw std::invalid_argument("denoiser width must be >= 1");
  NetParams p;
  p.layers.resize(depth);
  for (Index l = 0; l < depth; ++l) {
    const Index cin = (l == 0) ? 2 : width;
    const Index cout = (l == depth - 1) ? 2 : width;
    ConvLayer& layer = p.layers[l];
    layer.weight.assign(cout, std::vector<Eigen::Matrix3d>(cin));
    layer.bias = RVec::Zero(cout);
    const double stddev = std::sqrt(2.0 / (9.0 * double(cin)));
    for (Index o = 0; o < cout; ++o)
      for (Index i = 0; i < cin; ++i)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c)
            layer.weight[o][i](r, c) = stddev * rng.next_gaussian();
  }
  return p;
}

NetParams zero_like(const NetParams& p) {
  NetParams z = p;
  for (ConvLayer& l : z.layers) {
    for (auto& row : l.weight)
      for (Eigen::Matrix3d& w : row) w.setZero();
    l.bias.setZero();
  }
  return z;
}

void add_scaled(NetParams& dst, const NetParams& src, double scale) {
  for (std::size_t l = 0; l < dst.layers.size(); ++l) {
    for (std::size_t o = 0; o < dst.layers[l].weight.size(); ++o)
      for (std::size_t i = 0; i < dst.layers[l].weight[o].size(); ++i)
        dst.layers[l].weight[o][i] += scale * src.layers[l].weight[o][i];
    dst.layers[l].bias += scale * src.layers[l].bias;
  }
}

CMat denoise(const NetParams& params, const CMat& x) {
  check_net(params);
  if (!x.allFinite())
    throw std::invalid_argument("denoise: non-finite input");
  Channels act = {x.real(), x.imag()};
  const Index depth = params.depth();
  for (Index l = 0; l < depth; ++l)
    act = layer_forward(params.layers[l], act, l + 1 < depth);
  return x - (act[0] + Complex(0, 1) * act[1]).matrix();
}

DenoiseVjp denoise_vjp(const NetParams& params, const CMat& x,
                       const CMat& upstream) {
  check_net(params);
  if (upstream.rows() != x.rows() || upstream.cols() != x.cols())
    throw std::invalid_argument("denoise_vjp: upstream shape mismatch");
  const Index depth = params.depth();

  // Forward, keeping each layer's input and post-activation output.
  std::vector<Channels> inputs(depth);
  Channels act = {x.real(), x.imag()};
  for (Index l = 0; l < depth; ++l) {
    inputs[l] = act;
    act = layer_forward(params.layers[l], act, l + 1 < depth);
  }

  DenoiseVjp vjp;
  vjp.param_grad = zero_like(params);

  // denoise = x - body(x): the body sees the negated upstream, the residual
  // path passes it through unchanged.
  Channels delta = {-upstream.real(), -upstream.imag()};
  for (Index l = depth - 1; l >= 0; --l) {
    const ConvLayer& layer = params.layers[l];
    ConvLayer& grad = vjp.param_grad.layers[l];
    if (l + 1 < depth) {
      // ReLU mask from the stored post-activation values (the next layer's
      // input is exactly this layer's post-ReLU output).
      for (Index o = 0; o < layer.out_channels(); ++o)
        delta[o] = (inputs[l + 1][o].array() > 0.0)
                       .select(delta[o].array(), 0.0)
                       .matrix();
    }
    Channels next_delta(layer.in_channels());
    for (Index i = 0; i < layer.in_channels(); ++i)
      next_delta[i] = RMat::Zero(x.rows(), x.cols());
    for (Index o = 0; o < layer.out_channels(); ++o) {
      grad.bias[o] += delta[o].sum();
      for (Index i = 0; i < layer.in_channels(); ++i) {
        conv_weight_grad(inputs[l][i], delta[o], grad.weight[o][i]);
        conv_transpose_accumulate(layer.weight[o][i], delta[o], next_delta[i]);
      }
    }
    delta = std::move(next_delta);
  }

  vjp.x_cot = upstream + (delta[0] + Complex(0, 1) * delta[1]).matrix();
  return vjp;
}

RVec flatten(const NetParams& p) {
  RVec v(p.parameter_count());
  Index at = 0;
  for (const ConvLayer& l : p.layers) {
    for (const auto& row : l.weight)
      for (const Eigen::Matrix3d& w : row)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) v[at++] = w(r, c);
    for (Index o = 0; o < l.bias.size(); ++o) v[at++] = l.bias[o];
  }
  return v;
}

void unflatten(const RVec& v, NetParams& p) {
  if (v.size() != p.parameter_count())
    throw std::invalid_argument("unflatten: size mismatch");
  Index at = 0;
  for (ConvLayer& l : p.layers) {
    for (auto& row : l.weight)
      for (Eigen::Matrix3d& w : row)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) w(r, c) = v[at++];
    for (Index o = 0; o < l.bias.size(); ++o) l.bias[o] = v[at++];
  }
}

void save_net(const NetParams& p, const std::filesystem::path& dir,
              const std::string& stem) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / (stem + ".net"));
  if (!manifest) throw std::runtime_error("save_net: cannot write manifest");
  manifest << "net1\n";
  manifest << "depth " << p.depth() << "\n";
  manifest << "width " << p.width() << "\n";
  for (Index l = 0; l < p.depth(); ++l) {
    const ConvLayer& layer = p.layers[l];
    const Index cout = layer.out_channels(), cin = layer.in_channels();
    // Row o: the 9*cin kernel taps for output channel o, then its bias.
    CTensor t({cout, cin * 9 + 1});
    for (Index o = 0; o < cout; ++o) {
      Index at = o * (cin * 9 + 1);
      for (Index i = 0; i < cin; ++i)
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) t[at++] = layer.weight[o][i](r, c);
      t[at] = layer.bias[o];
    }
    char name[64];
    std::snprintf(name, sizeof name, "%s_layer_%02lld.jmt", stem.c_str(),
                  static_cast<long long>(l));
    tensor_io_write(t, dir / name);
    manifest << "layer " << name << " " << cout << " " << cin << "\n";
  }
}

NetParams load_net(const std::filesystem::path& dir, const std::string& stem) {
  std::ifstream manifest(dir / (stem + ".net"));
  if (!manifest) throw std::runtime_error("load_net: missing manifest");
  std::string tag;
  manifest >> tag;
  if (tag != "net1") throw std::runtime_error("load_net: bad manifest tag");
  NetParams p;
  Index depth = 0, width = 0;
  while (manifest >> tag) {
    if (tag == "depth") manifest >> depth;
    else if (tag == "width") manifest >> width;
    else if (tag == "layer") {
      std::string name;
      Index cout = 0, cin = 0;
      manifest >> name >> cout >> cin;
      CTensor t = tensor_io_read(dir / name);
      if (t.ndim() != 2 || t.dims()[0] != cout || t.dims()[1] != cin * 9 + 1)
        throw std::runtime_error("load_net: layer tensor dims mismatch");
      ConvLayer layer;
      layer.weight.assign(cout, std::vector<Eigen::Matrix3d>(cin));
      layer.bias = RVec::Zero(cout);
      for (Index o = 0; o < cout; ++o) {
        Index at = o * (cin * 9 + 1);
        for (Index i = 0; i < cin; ++i)
          for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
              layer.weight[o][i](r, c) = t[at++].real();
        layer.bias[o] = t[at].real();
      }
      p.layers.push_back(std::move(layer));
    } else {
      throw std::runtime_error("load_net: unknown manifest key " + tag);
    }
  }
  if (p.depth() != depth)
    throw std::runtime_error("load_net: depth mismatch");
  check_net(p);
  return p;
}

}  // namespace ksopt
