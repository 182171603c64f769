#ifndef KSOPT_TENSOR_HPP
#define KSOPT_TENSOR_HPP

#include <complex>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ksopt {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// Dense complex tensor with a row-major flat layout. Matrices returned by
// to_matrix()/from_matrix() use (row, col) = (vertical, horizontal) indexing;
// the flat order is row-major so element (p, q) of a P x Q tensor sits at
// p * Q + q.
class CTensor {
 public:
  CTensor() = default;
  explicit CTensor(std::vector<Index> dims);

  static CTensor from_matrix(const CMat& m);
  static CTensor from_vector(const CVec& v);

  const std::vector<Index>& dims() const { return dims_; }
  Index ndim() const { return static_cast<Index>(dims_.size()); }
  Index numel() const { return data_.size(); }

  CVec& data() { return data_; }
  const CVec& data() const { return data_; }
  Complex& operator[](Index i) { return data_[i]; }
  const Complex& operator[](Index i) const { return data_[i]; }

  bool all_finite() const;

  // Requires ndim() == 2.
  CMat to_matrix() const;
  // Requires ndim() == 1.
  CVec to_vector() const { return data_; }

  bool operator==(const CTensor& other) const {
    return dims_ == other.dims_ && data_.size() == other.data_.size() &&
           data_ == other.data_;
  }

 private:
  std::vector<Index> dims_;
  CVec data_;
};

// Errors raised by the binary tensor format below.
class TensorIoError : public std::runtime_error {
 public:
  enum class Kind { BadMagic, Truncated, BadDims, Io };
  TensorIoError(Kind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// "JMT1" format: 4 magic bytes, u32 little-endian ndim, ndim u32 dims,
// then numel interleaved (real, imag) f64 little-endian pairs in row-major
// order. Writes go to a temporary file in the same directory followed by a
// rename, so a failed write never leaves a partial file at `path`.
void tensor_io_write(const CTensor& t, const std::filesystem::path& path);
CTensor tensor_io_read(const std::filesystem::path& path);

// Deterministic splitmix64 stream. The state advances by the 64-bit golden
// gamma and each output is the standard splitmix64 finalizer of the state,
// so identical seeds give identical sequences everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t next_u64();
  // Uniform on (0, 1], 53-bit resolution.
  double next_uniform();
  // Standard normal via Box-Muller; draws two uniforms per pair.
  double next_gaussian();

  // Independent child stream; derivation depends only on (seed, stream).
  Rng derive(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// i.i.d. complex Gaussian entries with unit complex variance: real and
// imaginary parts are each N(0, 1/2). One Box-Muller pair per entry.
CTensor randn_complex(Rng& rng, const std::vector<Index>& dims);

// Convenience wrappers over randn_complex for the common matrix case.
CMat randn_cmat(Rng& rng, Index rows, Index cols);
CVec randn_cvec(Rng& rng, Index n);

}  // namespace ksopt

#endif  // KSOPT_TENSOR_HPP
