#include "ksopt/fourier.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ksopt {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_location(double k) {
  if (!(k >= 0.0 && k < 1.0))
    throw std::invalid_argument("sampling location outside [0,1)");
}

}  // namespace

Sampler1D::Sampler1D(RVec locs, Index n) : locations(std::move(locs)), grid_size(n) {
  if (grid_size < 1) throw std::invalid_argument("grid size must be >= 1");
  if (locations.size() < 1) throw std::invalid_argument("need at least one location");
  for (Index i = 0; i < locations.size(); ++i) check_location(locations[i]);
}

CVec dft_matrix_row(double k, Index n) {
  check_location(k);
  if (n < 1) throw std::invalid_argument("grid size must be >= 1");
  CVec row(n);
  const double norm = 1.0 / std::sqrt(double(n));
  for (Index m = 0; m < n; ++m) {
    double phase = -kTwoPi * k * double(m);
    row[m] = Complex(norm * std::cos(phase), norm * std::sin(phase));
  }
  return row;
}

CMat dft_matrix(const Sampler1D& s) {
  CMat f(s.samples(), s.grid_size);
  for (Index i = 0; i < s.samples(); ++i)
    f.row(i) = dft_matrix_row(s.locations[i], s.grid_size).transpose();
  return f;
}

CMat dft_matrix_dk(const Sampler1D& s) {
  CMat f = dft_matrix(s);
  for (Index m = 0; m < s.grid_size; ++m)
    f.col(m) *= Complex(0.0, -kTwoPi * double(m));
  return f;
}

CVec forward_1d(const Sampler1D& s, const CVec& x) {
  if (x.size() != s.grid_size)
    throw std::invalid_argument("forward_1d: signal length mismatch");
  return dft_matrix(s) * x;
}

CVec adjoint_1d(const Sampler1D& s, const CVec& y) {
  if (y.size() != s.samples())
    throw std::invalid_argument("adjoint_1d: sample count mismatch");
  return dft_matrix(s).adjoint() * y;
}

CMat forward_2d(const Sampler2D& s, const CMat& x) {
  if (x.rows() != s.vertical.grid_size || x.cols() != s.horizontal.grid_size)
    throw std::invalid_argument("forward_2d: image dims mismatch");
  return dft_matrix(s.vertical) * x * dft_matrix(s.horizontal).transpose();
}

CMat adjoint_2d(const Sampler2D& s, const CMat& b) {
  if (b.rows() != s.vertical.samples() || b.cols() != s.horizontal.samples())
    throw std::invalid_argument("adjoint_2d: sample dims mismatch");
  return dft_matrix(s.vertical).adjoint() * b *
         dft_matrix(s.horizontal).conjugate();
}

Complex dforward_dk_1d(const Sampler1D& s, const CVec& x, Index i) {
  if (i < 0 || i >= s.samples())
    throw std::invalid_argument("dforward_dk_1d: sample index out of range");
  if (x.size() != s.grid_size)
    throw std::invalid_argument("dforward_dk_1d: signal length mismatch");
  const double norm = s.normalization();
  Complex acc(0.0, 0.0);
  for (Index m = 0; m < s.grid_size; ++m) {
    double phase = -kTwoPi * s.locations[i] * double(m);
    Complex e(norm * std::cos(phase), norm * std::sin(phase));
    acc += Complex(0.0, -kTwoPi * double(m)) * e * x[m];
  }
  return acc;
}

namespace {

void write_block(std::FILE* f, const RVec& locs) {
  for (Index i = 0; i < locs.size(); ++i)
    std::fprintf(f, "%.17g\n", locs[i]);
}

RVec read_block(std::istream& in, Index count, const std::string& what) {
  RVec locs(count);
  for (Index i = 0; i < count; ++i) {
    std::string line;
    if (!std::getline(in, line))
      throw std::runtime_error("pattern file: missing " + what + " location");
    try {
      locs[i] = std::stod(line);
    } catch (const std::exception&) {
      throw std::runtime_error("pattern file: bad " + what + " location");
    }
  }
  return locs;
}

}  // namespace

void write_pattern(const Sampler& s, const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "w");
  if (!f) throw std::runtime_error("cannot open pattern file for write: " +
                                   path.string());
  if (const Sampler1D* s1 = std::get_if<Sampler1D>(&s)) {
    std::fprintf(f, "pattern1d %lld %lld\n",
                 static_cast<long long>(s1->grid_size),
                 static_cast<long long>(s1->samples()));
    write_block(f, s1->locations);
  } else {
    const Sampler2D& s2 = std::get<Sampler2D>(s);
    std::fprintf(f, "pattern2d %lld %lld %lld %lld\n",
                 static_cast<long long>(s2.vertical.grid_size),
                 static_cast<long long>(s2.horizontal.grid_size),
                 static_cast<long long>(s2.vertical.samples()),
                 static_cast<long long>(s2.horizontal.samples()));
    write_block(f, s2.vertical.locations);
    write_block(f, s2.horizontal.locations);
  }
  std::fclose(f);
}

Sampler read_pattern(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open pattern file: " + path.string());
  std::string header;
  if (!std::getline(in, header))
    throw std::runtime_error("pattern file: empty");
  std::istringstream hs(header);
  std::string tag;
  hs >> tag;
  if (tag == "pattern1d") {
    long long n = 0, m = 0;
    if (!(hs >> n >> m) || n < 1 || m < 1)
      throw std::runtime_error("pattern file: bad 1-D header");
    return Sampler1D(read_block(in, m, "1d"), n);
  }
  if (tag == "pattern2d") {
    long long p = 0, q = 0, mv = 0, mh = 0;
    if (!(hs >> p >> q >> mv >> mh) || p < 1 || q < 1 || mv < 1 || mh < 1)
      throw std::runtime_error("pattern file: bad 2-D header");
    Sampler2D s;
    s.vertical = Sampler1D(read_block(in, mv, "vertical"), p);
    s.horizontal = Sampler1D(read_block(in, mh, "horizontal"), q);
    return s;
  }
  throw std::runtime_error("pattern file: unknown header tag");
}

}  // namespace ksopt
