#include "ksopt/phantom.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

namespace ksopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double ellipse_indicator(const Ellipse& e, double y, double x) {
  const double dy = y - e.center_y;
  const double dx = x - e.center_x;
  const double ca = std::cos(e.angle), sa = std::sin(e.angle);
  const double u = ca * dx + sa * dy;
  const double v = -sa * dx + ca * dy;
  const double t = (u / e.axis_x) * (u / e.axis_x) +
                   (v / e.axis_y) * (v / e.axis_y);
  return t <= 1.0 ? 1.0 : 0.0;
}

}  // namespace

CMat render(const PhantomSpec& spec, int supersample) {
  if (spec.rows < 1 || spec.cols < 1)
    throw std::invalid_argument("render: empty grid");
  if (spec.ellipses.empty())
    throw std::invalid_argument("render: need at least one ellipse");
  if (supersample < 1) throw std::invalid_argument("render: bad supersample");
  for (const Ellipse& e : spec.ellipses)
    if (!(e.axis_y > 0.0) || !(e.axis_x > 0.0))
      throw std::invalid_argument("render: degenerate ellipse axis");

  const Index p = spec.rows, q = spec.cols;
  CMat img = CMat::Zero(p, q);
  const double inv_ss = 1.0 / double(supersample);
  const double inv_ss2 = inv_ss * inv_ss;

  for (Index r = 0; r < p; ++r) {
    for (Index c = 0; c < q; ++c) {
      Complex acc(0.0, 0.0);
      for (int sr = 0; sr < supersample; ++sr) {
        const double y =
            2.0 * (double(r) + (sr + 0.5) * inv_ss) / double(p) - 1.0;
        for (int sc = 0; sc < supersample; ++sc) {
          const double x =
              2.0 * (double(c) + (sc + 0.5) * inv_ss) / double(q) - 1.0;
          for (const Ellipse& e : spec.ellipses)
            if (ellipse_indicator(e, y, x) > 0.0) acc += e.amplitude;
        }
      }
      img(r, c) = acc * inv_ss2;
    }
  }

  // Smooth unit-magnitude phase over pixel centers.
  const auto& pc = spec.phase_coeffs;
  if (pc[0] != 0.0 || pc[1] != 0.0 || pc[2] != 0.0) {
    for (Index r = 0; r < p; ++r) {
      const double y = 2.0 * (double(r) + 0.5) / double(p) - 1.0;
      for (Index c = 0; c < q; ++c) {
        const double x = 2.0 * (double(c) + 0.5) / double(q) - 1.0;
        const double phase = kTwoPi * (pc[0] * y + pc[1] * x + pc[2] * x * y);
        img(r, c) *= Complex(std::cos(phase), std::sin(phase));
      }
    }
  }

  const double peak = img.cwiseAbs().maxCoeff();
  if (peak > 0.0) img /= peak;
  return img;
}

CoilSet make_coils(Index rows, Index cols, Index j) {
  if (j < 1) throw std::invalid_argument("make_coils: need at least one coil");
  CoilSet coils;
  if (j == 1) {
    coils.maps.push_back(CMat::Ones(rows, cols));
    return coils;
  }
  const double width = 0.9;
  std::vector<CMat> raw(j);
  for (Index k = 0; k < j; ++k) {
    const double ang = kTwoPi * double(k) / double(j);
    const double cy = 1.1 * std::sin(ang), cx = 1.1 * std::cos(ang);
    // Gentle per-coil linear phase ramp.
    const double ry = 0.2 * std::cos(ang), rx = -0.2 * std::sin(ang);
    raw[k].resize(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      const double y = 2.0 * (double(r) + 0.5) / double(rows) - 1.0;
      for (Index c = 0; c < cols; ++c) {
        const double x = 2.0 * (double(c) + 0.5) / double(cols) - 1.0;
        const double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
        const double mag = std::exp(-d2 / (2.0 * width * width));
        const double phase = kTwoPi * (ry * y + rx * x);
        raw[k](r, c) = mag * Complex(std::cos(phase), std::sin(phase));
      }
    }
  }
  // Pointwise normalization: sum over coils of |s_j|^2 is exactly one.
  RMat sos = RMat::Zero(rows, cols);
  for (const CMat& m : raw) sos += m.cwiseAbs2();
  for (CMat& m : raw)
    m = m.cwiseQuotient(sos.cwiseSqrt().cast<Complex>());
  coils.maps = std::move(raw);
  return coils;
}

namespace {

PhantomSpec random_spec(Rng rng, Index rows, Index cols) {
  PhantomSpec spec;
  spec.rows = rows;
  spec.cols = cols;
  spec.seed = rng.seed();

  // One large background ellipse plus 2..7 random interior ones.
  const Index extra = 2 + static_cast<Index>(rng.next_u64() % 6);
  Ellipse bg;
  bg.center_y = 0.05 * (2.0 * rng.next_uniform() - 1.0);
  bg.center_x = 0.05 * (2.0 * rng.next_uniform() - 1.0);
  bg.axis_y = 0.75 + 0.15 * rng.next_uniform();
  bg.axis_x = 0.75 + 0.15 * rng.next_uniform();
  bg.angle = 0.0;
  bg.amplitude = Complex(0.5 + 0.3 * rng.next_uniform(), 0.0);
  spec.ellipses.push_back(bg);

  for (Index e = 0; e < extra; ++e) {
    Ellipse el;
    el.center_y = 0.6 * (2.0 * rng.next_uniform() - 1.0);
    el.center_x = 0.6 * (2.0 * rng.next_uniform() - 1.0);
    el.axis_y = 0.08 + 0.3 * rng.next_uniform();
    el.axis_x = 0.08 + 0.3 * rng.next_uniform();
    el.angle = std::numbers::pi * rng.next_uniform();
    const double mag = 0.25 + 0.6 * rng.next_uniform();
    const double ph = kTwoPi * rng.next_uniform();
    el.amplitude = mag * Complex(std::cos(ph), std::sin(ph));
    spec.ellipses.push_back(el);
  }

  spec.phase_coeffs = {0.25 * (2.0 * rng.next_uniform() - 1.0),
                       0.25 * (2.0 * rng.next_uniform() - 1.0),
                       0.1 * (2.0 * rng.next_uniform() - 1.0)};
  return spec;
}

constexpr std::uint64_t kTrainStream = 0x7261696e;
constexpr std::uint64_t kValStream = 0x76616c00;
constexpr std::uint64_t kTestStream = 0x74657374;

}  // namespace

Corpus make_corpus(Rng& rng, Index n_train, Index n_val, Index n_test,
                   Index rows, Index cols, Index coils) {
  if (n_train < 1 || n_val < 0 || n_test < 0)
    throw std::invalid_argument("make_corpus: bad split sizes");
  Corpus c;
  c.rows = rows;
  c.cols = cols;
  c.seed = rng.seed();
  c.coils = make_coils(rows, cols, coils);

  auto build = [&](std::uint64_t stream, Index n,
                   std::vector<PhantomSpec>& specs, std::vector<CMat>& imgs) {
    Rng split_rng = rng.derive(stream);
    for (Index i = 0; i < n; ++i) {
      PhantomSpec spec = random_spec(split_rng.derive(i), rows, cols);
      specs.push_back(spec);
      imgs.push_back(render(spec));
    }
  };
  build(kTrainStream, n_train, c.train_specs, c.train);
  build(kValStream, n_val, c.val_specs, c.val);
  build(kTestStream, n_test, c.test_specs, c.test);
  return c;
}

void save_corpus(const Corpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  const Index j = c.coils.coils();
  CTensor coil_tensor({j, c.rows, c.cols});
  Index at = 0;
  for (Index k = 0; k < j; ++k)
    for (Index r = 0; r < c.rows; ++r)
      for (Index q = 0; q < c.cols; ++q) coil_tensor[at++] = c.coils.maps[k](r, q);
  tensor_io_write(coil_tensor, dir / "coils.jmt");

  std::ofstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("save_corpus: cannot write manifest");
  manifest << "corpus1\n";
  manifest << "grid " << c.rows << " " << c.cols << "\n";
  manifest << "seed " << c.seed << "\n";
  manifest << "coils " << j << " coils.jmt\n";

  auto dump = [&](const char* split, const std::vector<CMat>& imgs) {
    manifest << split << " " << imgs.size() << "\n";
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "%s_%03zu.jmt", split, i);
      tensor_io_write(CTensor::from_matrix(imgs[i]), dir / name);
      manifest << "  " << name << "\n";
    }
  };
  dump("train", c.train);
  dump("val", c.val);
  dump("test", c.test);
}

Corpus load_corpus(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.txt");
  if (!manifest) throw std::runtime_error("load_corpus: missing manifest");
  std::string tag;
  manifest >> tag;
  if (tag != "corpus1") throw std::runtime_error("load_corpus: bad tag");

  Corpus c;
  Index j = 0;
  std::string coil_file;
  while (manifest >> tag) {
    if (tag == "grid") manifest >> c.rows >> c.cols;
    else if (tag == "seed") manifest >> c.seed;
    else if (tag == "coils") manifest >> j >> coil_file;
    else if (tag == "train" || tag == "val" || tag == "test") {
      Index n = 0;
      manifest >> n;
      std::vector<CMat>& dst =
          (tag == "train") ? c.train : (tag == "val") ? c.val : c.test;
      for (Index i = 0; i < n; ++i) {
        std::string name;
        manifest >> name;
        dst.push_back(tensor_io_read(dir / name).to_matrix());
      }
    } else {
      throw std::runtime_error("load_corpus: unknown key " + tag);
    }
  }

  CTensor coil_tensor = tensor_io_read(dir / coil_file);
  if (coil_tensor.ndim() != 3 || coil_tensor.dims()[0] != j)
    throw std::runtime_error("load_corpus: coil tensor dims mismatch");
  c.coils.maps.resize(j);
  Index at = 0;
  for (Index k = 0; k < j; ++k) {
    c.coils.maps[k].resize(c.rows, c.cols);
    for (Index r = 0; r < c.rows; ++r)
      for (Index q = 0; q < c.cols; ++q) c.coils.maps[k](r, q) = coil_tensor[at++];
  }
  return c;
}

}  // namespace ksopt
