#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "ksopt/tensor.hpp"

using namespace ksopt;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  fs::path dir = fs::temp_directory_path() / "ksopt_tensor_tests";
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("scalar tensor file is exactly 28 bytes") {
  CTensor t({1});
  t[0] = Complex(0.0, 0.0);
  fs::path path = temp_dir() / "scalar.jmt";
  tensor_io_write(t, path);
  CHECK(fs::file_size(path) == 28);  // 4 magic + 4 ndim + 4 dim + 16 payload
}

TEST_CASE("write then read is bit-identical") {
  Rng rng(7);
  CTensor t = randn_complex(rng, {8, 8});
  fs::path path = temp_dir() / "roundtrip.jmt";
  tensor_io_write(t, path);
  CTensor back = tensor_io_read(path);
  REQUIRE(back.dims() == t.dims());
  for (Index i = 0; i < t.numel(); ++i) {
    CHECK(back[i].real() == t[i].real());
    CHECK(back[i].imag() == t[i].imag());
  }
}

TEST_CASE("header dims echo back") {
  CTensor t({2, 3});
  fs::path path = temp_dir() / "dims.jmt";
  tensor_io_write(t, path);
  CTensor back = tensor_io_read(path);
  CHECK(back.dims() == std::vector<Index>{2, 3});
}

TEST_CASE("round trip is identity for random shapes up to 4 axes") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const Index ndim = 1 + Index(rng.next_u64() % 4);
    std::vector<Index> dims(ndim);
    for (Index& d : dims) d = 1 + Index(rng.next_u64() % 5);
    CTensor t = randn_complex(rng, dims);
    fs::path path = temp_dir() / "prop.jmt";
    tensor_io_write(t, path);
    CHECK(tensor_io_read(path) == t);
  }
}

TEST_CASE("bad magic is a distinct error") {
  fs::path path = temp_dir() / "badmagic.jmt";
  std::ofstream(path, std::ios::binary) << "XXXX" << std::string(24, '\0');
  try {
    tensor_io_read(path);
    FAIL("expected TensorIoError");
  } catch (const TensorIoError& e) {
    CHECK(e.kind() == TensorIoError::Kind::BadMagic);
  }
}

TEST_CASE("truncated payload is a distinct error") {
  CTensor t({4, 4});
  fs::path path = temp_dir() / "trunc.jmt";
  tensor_io_write(t, path);
  auto size = fs::file_size(path);
  fs::resize_file(path, size - 9);
  try {
    tensor_io_read(path);
    FAIL("expected TensorIoError");
  } catch (const TensorIoError& e) {
    CHECK(e.kind() == TensorIoError::Kind::Truncated);
  }
}

TEST_CASE("dim overflow is a distinct error") {
  fs::path path = temp_dir() / "overflow.jmt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "JMT1";
    auto put_u32 = [&out](std::uint32_t v) {
      char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
                   char((v >> 24) & 0xff)};
      out.write(b, 4);
    };
    put_u32(2);
    put_u32(0xFFFFFFFFu);
    put_u32(0xFFFFFFFFu);
  }
  try {
    tensor_io_read(path);
    FAIL("expected TensorIoError");
  } catch (const TensorIoError& e) {
    CHECK(e.kind() == TensorIoError::Kind::BadDims);
  }
}

TEST_CASE("failed write leaves no partial file") {
  CTensor t({2, 2});
  CHECK_THROWS_AS(tensor_io_write(t, "/nonexistent_dir_zzz/out.jmt"),
                  TensorIoError);
  CHECK(!fs::exists("/nonexistent_dir_zzz/out.jmt"));
}

TEST_CASE("seeded rng streams repeat bit for bit") {
  Rng a(0), b(0);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng g1(0), g2(0);
  for (int i = 0; i < 100; ++i) CHECK(g1.next_gaussian() == g2.next_gaussian());
}

TEST_CASE("randn_complex seed 0 twice gives identical tensors") {
  Rng a(0), b(0);
  CHECK(randn_complex(a, {4, 4}) == randn_complex(b, {4, 4}));
}

TEST_CASE("derived streams differ from parent and repeat") {
  Rng a(5);
  Rng c1 = a.derive(1), c2 = a.derive(2), c1b = a.derive(1);
  CHECK(c1.next_u64() != c2.next_u64());
  Rng c1c = Rng(5).derive(1);
  CHECK(c1b.next_u64() == c1c.next_u64());
}

TEST_CASE("randn_complex has unit complex variance") {
  // |z|^2 is exponential with mean 1 and variance 1, so the mean of 1e5
  // draws sits within 3/sqrt(1e5) of 1 with overwhelming probability.
  Rng rng(123);
  CTensor t = randn_complex(rng, {100000});
  double mean_sq = 0.0;
  for (Index i = 0; i < t.numel(); ++i) mean_sq += std::norm(t[i]);
  mean_sq /= double(t.numel());
  CHECK(std::abs(mean_sq - 1.0) < 3.0 / std::sqrt(1e5));
}

TEST_CASE("zero-size dims are rejected") {
  Rng rng(1);
  CHECK_THROWS_AS(randn_complex(rng, {0}), std::invalid_argument);
  CHECK_THROWS_AS(randn_complex(rng, {}), std::invalid_argument);
  CHECK_THROWS_AS(CTensor({3, 0}), std::invalid_argument);
}
