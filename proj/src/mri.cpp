#include "ksopt/mri.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ksopt {

namespace {

void check_image_dims(const SamplingOperator& op, const CoilSet& coils,
                      const CMat& rho) {
  if (coils.coils() == 0) throw std::invalid_argument("empty coil set");
  if (coils.rows() != op.image_rows() || coils.cols() != op.image_cols())
    throw std::invalid_argument("coil map dims do not match sampler grid");
  if (rho.rows() != op.image_rows() || rho.cols() != op.image_cols())
    throw std::invalid_argument("image dims do not match sampler grid");
}

void check_sample_dims(const SamplingOperator& op, const CoilSet& coils,
                       const std::vector<CMat>& b) {
  if (coils.coils() != static_cast<Index>(b.size()))
    throw std::invalid_argument("coil count does not match sample blocks");
  for (const CMat& bj : b)
    if (bj.rows() != op.sample_rows() || bj.cols() != op.sample_cols())
      throw std::invalid_argument("sample block dims do not match sampler");
}

}  // namespace

Complex frob_dot(const CMat& a, const CMat& b) {
  return (a.conjugate().cwiseProduct(b)).sum();
}

SamplingOperator make_operator(const Sampler& s) {
  SamplingOperator op;
  if (const Sampler1D* s1 = std::get_if<Sampler1D>(&s)) {
    op.one_d = true;
    op.Fv = dft_matrix(*s1);
    op.Fv_dk = dft_matrix_dk(*s1);
    op.Fh = CMat::Ones(1, 1);
    op.Fh_dk = CMat::Zero(1, 1);
  } else {
    const Sampler2D& s2 = std::get<Sampler2D>(s);
    op.Fv = dft_matrix(s2.vertical);
    op.Fv_dk = dft_matrix_dk(s2.vertical);
    op.Fh = dft_matrix(s2.horizontal);
    op.Fh_dk = dft_matrix_dk(s2.horizontal);
  }
  return op;
}

std::vector<CMat> apply_forward(const SamplingOperator& op, const CoilSet& coils,
                                const CMat& rho) {
  check_image_dims(op, coils, rho);
  std::vector<CMat> b(coils.coils());
  const CMat fht = op.Fh.transpose();
  for (Index j = 0; j < coils.coils(); ++j)
    b[j] = op.Fv * coils.maps[j].cwiseProduct(rho) * fht;
  return b;
}

CMat apply_adjoint(const SamplingOperator& op, const CoilSet& coils,
                   const std::vector<CMat>& b) {
  check_sample_dims(op, coils, b);
  CMat x = CMat::Zero(op.image_rows(), op.image_cols());
  const CMat fvh = op.Fv.adjoint();
  const CMat fhc = op.Fh.conjugate();
  for (Index j = 0; j < coils.coils(); ++j)
    x += coils.maps[j].conjugate().cwiseProduct(fvh * b[j] * fhc);
  return x;
}

CMat apply_normal(const SamplingOperator& op, const CoilSet& coils,
                  const CMat& x) {
  check_image_dims(op, coils, x);
  CMat out = CMat::Zero(x.rows(), x.cols());
  const CMat fht = op.Fh.transpose();
  const CMat fvh = op.Fv.adjoint();
  const CMat fhc = op.Fh.conjugate();
  for (Index j = 0; j < coils.coils(); ++j) {
    CMat bj = op.Fv * coils.maps[j].cwiseProduct(x) * fht;
    out += coils.maps[j].conjugate().cwiseProduct(fvh * bj * fhc);
  }
  return out;
}

ThetaGrad location_grad_pair(const SamplingOperator& op, const CoilSet& coils,
                             const CMat& input, const std::vector<CMat>& factor) {
  check_image_dims(op, coils, input);
  check_sample_dims(op, coils, factor);
  ThetaGrad g;
  g.setZero(op.sample_rows(), op.sample_cols());
  const CMat fht = op.Fh.transpose();
  const CMat fdkt = op.Fh_dk.transpose();
  for (Index j = 0; j < coils.coils(); ++j) {
    CMat w = coils.maps[j].cwiseProduct(input);
    // d/dkv[a] only perturbs sample row a, so row-wise reductions suffice.
    CMat gv = op.Fv_dk * w * fht;
    g.d_vertical +=
        gv.conjugate().cwiseProduct(factor[j]).rowwise().sum().real();
    if (!op.one_d) {
      CMat gh = op.Fv * w * fdkt;
      g.d_horizontal +=
          gh.conjugate().cwiseProduct(factor[j]).colwise().sum().real().transpose();
    }
  }
  return g;
}

KSpaceData forward_mc(const CoilSet& coils, const Sampler& s, const CMat& rho) {
  KSpaceData b;
  b.sampler = s;
  b.sigma = 0.0;
  b.samples = apply_forward(make_operator(s), coils, rho);
  return b;
}

CMat adjoint_mc(const CoilSet& coils, const Sampler& s, const KSpaceData& b) {
  return apply_adjoint(make_operator(s), coils, b.samples);
}

CMat normal_op(const CoilSet& coils, const Sampler& s, const CMat& x) {
  return apply_normal(make_operator(s), coils, x);
}

KSpaceData acquire(const CoilSet& coils, const Sampler& s, const CMat& rho,
                   double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("acquire: sigma must be >= 0");
  KSpaceData b = forward_mc(coils, s, rho);
  b.sigma = sigma;
  if (sigma > 0.0) {
    for (CMat& bj : b.samples)
      bj += sigma * randn_cmat(rng, bj.rows(), bj.cols());
  }
  return b;
}

void save_kspace(const KSpaceData& b, const std::filesystem::path& dir,
                 const std::string& stem) {
  std::filesystem::create_directories(dir);
  const Index j = static_cast<Index>(b.samples.size());
  if (j == 0) throw std::invalid_argument("save_kspace: no coil blocks");
  const Index mv = b.samples[0].rows();
  const Index mh = b.samples[0].cols();

  const bool one_d = std::holds_alternative<Sampler1D>(b.sampler);
  CTensor t(one_d ? std::vector<Index>{j, mv} : std::vector<Index>{j, mv, mh});
  Index at = 0;
  for (Index c = 0; c < j; ++c)
    for (Index p = 0; p < mv; ++p)
      for (Index q = 0; q < mh; ++q) t[at++] = b.samples[c](p, q);
  tensor_io_write(t, dir / (stem + ".jmt"));
  write_pattern(b.sampler, dir / (stem + ".pattern"));

  std::ofstream hdr(dir / (stem + ".kspace"));
  if (!hdr) throw std::runtime_error("save_kspace: cannot write sidecar");
  char sigma_buf[64];
  std::snprintf(sigma_buf, sizeof sigma_buf, "%.17g", b.sigma);
  hdr << "kspace1\n";
  hdr << "sigma " << sigma_buf << "\n";
  hdr << "tensor " << stem << ".jmt\n";
  hdr << "pattern " << stem << ".pattern\n";
}

KSpaceData load_kspace(const std::filesystem::path& dir,
                       const std::string& stem) {
  std::ifstream hdr(dir / (stem + ".kspace"));
  if (!hdr) throw std::runtime_error("load_kspace: missing sidecar");
  std::string tag;
  hdr >> tag;
  if (tag != "kspace1") throw std::runtime_error("load_kspace: bad sidecar tag");
  KSpaceData b;
  std::string tensor_name, pattern_name;
  while (hdr >> tag) {
    if (tag == "sigma") {
      std::string v;
      hdr >> v;
      b.sigma = std::stod(v);
    } else if (tag == "tensor") hdr >> tensor_name;
    else if (tag == "pattern") hdr >> pattern_name;
    else throw std::runtime_error("load_kspace: unknown sidecar key " + tag);
  }
  b.sampler = read_pattern(dir / pattern_name);
  CTensor t = tensor_io_read(dir / tensor_name);
  const bool one_d = std::holds_alternative<Sampler1D>(b.sampler);
  if ((one_d && t.ndim() != 2) || (!one_d && t.ndim() != 3))
    throw std::runtime_error("load_kspace: tensor rank mismatch");
  const Index j = t.dims()[0];
  const Index mv = t.dims()[1];
  const Index mh = one_d ? 1 : t.dims()[2];
  b.samples.resize(j);
  Index at = 0;
  for (Index c = 0; c < j; ++c) {
    b.samples[c].resize(mv, mh);
    for (Index p = 0; p < mv; ++p)
      for (Index q = 0; q < mh; ++q) b.samples[c](p, q) = t[at++];
  }
  return b;
}

}  // namespace ksopt
