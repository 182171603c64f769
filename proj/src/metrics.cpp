#include "ksopt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace ksopt {

double psnr(const CMat& x, const CMat& ref) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols())
    throw std::invalid_argument("psnr: shape mismatch");
  const double peak = ref.cwiseAbs().maxCoeff();
  if (peak == 0.0) throw std::invalid_argument("psnr: reference is zero");
  const double mse = (x - ref).squaredNorm() / double(x.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(peak / std::sqrt(mse));
}

namespace {

constexpr int kWindow = 7;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

}  // namespace

double ssim(const CMat& x, const CMat& ref) {
  return ssim(x, ref, ref.cwiseAbs().maxCoeff());
}

double ssim(const CMat& x, const CMat& ref, double dynamic_range) {
  if (x.rows() != ref.rows() || x.cols() != ref.cols())
    throw std::invalid_argument("ssim: shape mismatch");
  if (x.rows() < kWindow || x.cols() < kWindow)
    throw std::invalid_argument("ssim: image smaller than window");

  const RMat a = x.cwiseAbs();
  const RMat b = ref.cwiseAbs();
  const double c1 = (kK1 * dynamic_range) * (kK1 * dynamic_range);
  const double c2 = (kK2 * dynamic_range) * (kK2 * dynamic_range);
  const double inv_n = 1.0 / double(kWindow * kWindow);

  // Running column sums make each 7x7 window a constant-time update along
  // the row direction.
  const Index p = a.rows(), q = a.cols();
  const Index wp = p - kWindow + 1, wq = q - kWindow + 1;
  double acc = 0.0;
  RVec col_a(q), col_b(q), col_aa(q), col_bb(q), col_ab(q);
  for (Index r = 0; r < wp; ++r) {
    for (Index c = 0; c < q; ++c) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (Index rr = r; rr < r + kWindow; ++rr) {
        const double va = a(rr, c), vb = b(rr, c);
        sa += va;
        sb += vb;
        saa += va * va;
        sbb += vb * vb;
        sab += va * vb;
      }
      col_a[c] = sa;
      col_b[c] = sb;
      col_aa[c] = saa;
      col_bb[c] = sbb;
      col_ab[c] = sab;
    }
    for (Index c = 0; c < wq; ++c) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (Index cc = c; cc < c + kWindow; ++cc) {
        sa += col_a[cc];
        sb += col_b[cc];
        saa += col_aa[cc];
        sbb += col_bb[cc];
        sab += col_ab[cc];
      }
      const double mu_a = sa * inv_n, mu_b = sb * inv_n;
      const double var_a = saa * inv_n - mu_a * mu_a;
      const double var_b = sbb * inv_n - mu_b * mu_b;
      const double cov = sab * inv_n - mu_a * mu_b;
      const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
      const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
      acc += num / den;
    }
  }
  return acc / double(wp * wq);
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header) {
  f_ = std::fopen(path.string().c_str(), "w");
  if (!f_) throw std::runtime_error("cannot open CSV for write: " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i)
    std::fprintf(f_, "%s%s", header[i].c_str(),
                 i + 1 < header.size() ? "," : "\r\n");
}

CsvWriter::~CsvWriter() {
  if (f_) std::fclose(f_);
}

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (std::isinf(values[i]))
      std::fprintf(f_, "%s", values[i] > 0 ? "inf" : "-inf");
    else
      std::fprintf(f_, "%.17g", values[i]);
    std::fputs(i + 1 < values.size() ? "," : "\r\n", f_);
  }
}

void CsvWriter::raw_row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i)
    std::fprintf(f_, "%s%s", fields[i].c_str(),
                 i + 1 < fields.size() ? "," : "\r\n");
}

void write_pgm(const Eigen::MatrixXd& gray01,
               const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw std::runtime_error("cannot open PGM for write: " + path.string());
  std::fprintf(f, "P5\n%lld %lld\n255\n",
               static_cast<long long>(gray01.cols()),
               static_cast<long long>(gray01.rows()));
  for (Index r = 0; r < gray01.rows(); ++r)
    for (Index c = 0; c < gray01.cols(); ++c) {
      double v = std::clamp(gray01(r, c), 0.0, 1.0);
      unsigned char byte = static_cast<unsigned char>(std::lround(v * 255.0));
      std::fputc(byte, f);
    }
  std::fclose(f);
}

}  // namespace ksopt
