#ifndef KSOPT_METRICS_HPP
#define KSOPT_METRICS_HPP

#include <filesystem>

#include "ksopt/tensor.hpp"

namespace ksopt {

// 20*log10(max|ref| / rms(|x - ref|)) in dB, computed on the complex
// difference magnitude. Identical inputs give +infinity.
double psnr(const CMat& x, const CMat& ref);

// Mean local SSIM of the magnitude images over all fully interior 7x7
// uniform windows, with K1 = 0.01, K2 = 0.03 and population moments. The
// dynamic range defaults to max|ref|; pass it explicitly for a symmetric
// comparison.
double ssim(const CMat& x, const CMat& ref);
double ssim(const CMat& x, const CMat& ref, double dynamic_range);

// Minimal RFC-4180 CSV writer: header row plus numeric rows. Doubles are
// printed with %.17g so identical runs give identical bytes.
class CsvWriter {
 public:
  explicit CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& header);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& fields);

 private:
  std::FILE* f_;
};

// 8-bit binary portable graymap.
void write_pgm(const Eigen::MatrixXd& gray01, const std::filesystem::path& path);

}  // namespace ksopt

#endif  // KSOPT_METRICS_HPP
