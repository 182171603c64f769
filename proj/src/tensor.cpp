#include "ksopt/tensor.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

namespace ksopt {

namespace {

constexpr char kMagic[4] = {'J', 'M', 'T', '1'};
constexpr Index kMaxElements = Index(1) << 28;

Index checked_numel(const std::vector<Index>& dims) {
  if (dims.empty()) throw std::invalid_argument("tensor dims must be nonempty");
  Index n = 1;
  for (Index d : dims) {
    if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
    if (n > kMaxElements / d) throw std::invalid_argument("tensor too large");
    n *= d;
  }
  return n;
}

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& buf, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i)
    v = (v << 8) | static_cast<std::uint8_t>(buf[off + i]);
  return v;
}

double get_f64(const std::string& buf, std::size_t off) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i)
    bits = (bits << 8) | static_cast<std::uint8_t>(buf[off + i]);
  return std::bit_cast<double>(bits);
}

}  // namespace

CTensor::CTensor(std::vector<Index> dims) : dims_(std::move(dims)) {
  data_ = CVec::Zero(checked_numel(dims_));
}

CTensor CTensor::from_matrix(const CMat& m) {
  CTensor t({m.rows(), m.cols()});
  for (Index p = 0; p < m.rows(); ++p)
    for (Index q = 0; q < m.cols(); ++q) t.data_[p * m.cols() + q] = m(p, q);
  return t;
}

CTensor CTensor::from_vector(const CVec& v) {
  CTensor t({v.size()});
  t.data_ = v;
  return t;
}

CMat CTensor::to_matrix() const {
  if (ndim() != 2) throw std::invalid_argument("to_matrix requires 2-D tensor");
  CMat m(dims_[0], dims_[1]);
  for (Index p = 0; p < dims_[0]; ++p)
    for (Index q = 0; q < dims_[1]; ++q) m(p, q) = data_[p * dims_[1] + q];
  return m;
}

bool CTensor::all_finite() const {
  return data_.allFinite();
}

void tensor_io_write(const CTensor& t, const std::filesystem::path& path) {
  std::string buf;
  buf.reserve(12 + 4 * t.ndim() + 16 * t.numel());
  buf.append(kMagic, 4);
  put_u32(buf, static_cast<std::uint32_t>(t.ndim()));
  for (Index d : t.dims()) put_u32(buf, static_cast<std::uint32_t>(d));
  for (Index i = 0; i < t.numel(); ++i) {
    put_f64(buf, t[i].real());
    put_f64(buf, t[i].imag());
  }

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw TensorIoError(TensorIoError::Kind::Io,
                                  "cannot open for write: " + tmp.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw TensorIoError(TensorIoError::Kind::Io,
                          "write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw TensorIoError(TensorIoError::Kind::Io,
                        "rename failed: " + path.string());
  }
}

CTensor tensor_io_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorIoError(TensorIoError::Kind::Io,
                               "cannot open: " + path.string());
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());

  if (buf.size() < 4 || std::string_view(buf.data(), 4) !=
                            std::string_view(kMagic, 4))
    throw TensorIoError(TensorIoError::Kind::BadMagic,
                        "bad magic in " + path.string());
  if (buf.size() < 8)
    throw TensorIoError(TensorIoError::Kind::Truncated,
                        "truncated header in " + path.string());

  std::uint32_t ndim = get_u32(buf, 4);
  if (ndim == 0 || ndim > 16)
    throw TensorIoError(TensorIoError::Kind::BadDims,
                        "bad ndim in " + path.string());
  if (buf.size() < 8 + 4ull * ndim)
    throw TensorIoError(TensorIoError::Kind::Truncated,
                        "truncated dims in " + path.string());

  std::vector<Index> dims(ndim);
  std::uint64_t numel = 1;
  for (std::uint32_t i = 0; i < ndim; ++i) {
    std::uint32_t d = get_u32(buf, 8 + 4ull * i);
    if (d == 0) throw TensorIoError(TensorIoError::Kind::BadDims,
                                    "zero dim in " + path.string());
    numel *= d;
    if (numel > static_cast<std::uint64_t>(kMaxElements))
      throw TensorIoError(TensorIoError::Kind::BadDims,
                          "dim overflow in " + path.string());
    dims[i] = static_cast<Index>(d);
  }

  std::size_t payload_off = 8 + 4ull * ndim;
  std::size_t expected = payload_off + 16ull * numel;
  if (buf.size() < expected)
    throw TensorIoError(TensorIoError::Kind::Truncated,
                        "truncated payload in " + path.string());
  if (buf.size() > expected)
    throw TensorIoError(TensorIoError::Kind::Truncated,
                        "trailing bytes in " + path.string());

  CTensor t(dims);
  for (std::uint64_t i = 0; i < numel; ++i) {
    double re = get_f64(buf, payload_off + 16 * i);
    double im = get_f64(buf, payload_off + 16 * i + 8);
    t[static_cast<Index>(i)] = Complex(re, im);
  }
  return t;
}

std::uint64_t Rng::next_u64() {
  state_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double Rng::next_uniform() {
  return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = next_uniform();
  double u2 = next_uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

Rng Rng::derive(std::uint64_t stream) const {
  std::uint64_t z = seed_ ^ (0xD1B54A32D192ED03ull * (stream + 1));
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return Rng(z ^ (z >> 31));
}

CTensor randn_complex(Rng& rng, const std::vector<Index>& dims) {
  CTensor t(dims);
  const double scale = std::sqrt(0.5);
  for (Index i = 0; i < t.numel(); ++i) {
    double u1 = rng.next_uniform();
    double u2 = rng.next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    t[i] = Complex(scale * r * std::cos(a), scale * r * std::sin(a));
  }
  return t;
}

CMat randn_cmat(Rng& rng, Index rows, Index cols) {
  return randn_complex(rng, {rows, cols}).to_matrix();
}

CVec randn_cvec(Rng& rng, Index n) {
  return randn_complex(rng, {n}).to_vector();
}

}  // namespace ksopt
