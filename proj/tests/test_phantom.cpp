#include <doctest.h>

#include <filesystem>

#include "ksopt/phantom.hpp"

using namespace ksopt;

TEST_CASE("centered disk renders with unit interior and empty exterior") {
  PhantomSpec spec;
  spec.rows = 32;
  spec.cols = 32;
  Ellipse disk;
  disk.axis_y = 0.25;
  disk.axis_x = 0.25;  // quarter of the grid
  spec.ellipses.push_back(disk);

  CMat img = render(spec);
  CHECK(std::abs(img(16, 16).real() - 1.0) < 1e-15);
  CHECK(img(16, 16).imag() == 0.0);
  CHECK(std::abs(img(0, 0)) == 0.0);

  // A pixel straddling the boundary lands strictly between 0 and 1.
  bool found_partial = false;
  for (Index r = 0; r < 32 && !found_partial; ++r)
    for (Index c = 0; c < 32; ++c) {
      double v = std::abs(img(r, c));
      if (v > 0.0 && v < 1.0) {
        found_partial = true;
        break;
      }
    }
  CHECK(found_partial);
}

TEST_CASE("zero phase coefficients give a real-valued image") {
  PhantomSpec spec;
  spec.rows = 16;
  spec.cols = 16;
  spec.ellipses.push_back(Ellipse{});
  CMat img = render(spec);
  for (Index r = 0; r < 16; ++r)
    for (Index c = 0; c < 16; ++c) CHECK(img(r, c).imag() == 0.0);
}

TEST_CASE("nonzero phase coefficients keep unit magnitude field") {
  PhantomSpec spec;
  spec.rows = 16;
  spec.cols = 16;
  spec.ellipses.push_back(Ellipse{});
  CMat plain = render(spec);
  spec.phase_coeffs = {0.2, -0.1, 0.05};
  CMat phased = render(spec);
  for (Index r = 0; r < 16; ++r)
    for (Index c = 0; c < 16; ++c)
      CHECK(std::abs(std::abs(phased(r, c)) - std::abs(plain(r, c))) < 1e-12);
}

TEST_CASE("total energy agrees with a 64x supersampled reference") {
  PhantomSpec spec;
  spec.rows = 48;
  spec.cols = 48;
  Ellipse e;
  e.center_y = 0.1;
  e.center_x = -0.05;
  e.axis_y = 0.55;
  e.axis_x = 0.4;
  e.angle = 0.7;
  spec.ellipses.push_back(e);

  double energy4 = render(spec, 4).squaredNorm();
  double energy64 = render(spec, 64).squaredNorm();
  CHECK(std::abs(energy4 - energy64) / energy64 < 0.005);
}

TEST_CASE("degenerate ellipses are rejected") {
  PhantomSpec spec;
  spec.rows = 8;
  spec.cols = 8;
  Ellipse e;
  e.axis_y = 0.0;
  spec.ellipses.push_back(e);
  CHECK_THROWS_AS(render(spec), std::invalid_argument);
  spec.ellipses.clear();
  CHECK_THROWS_AS(render(spec), std::invalid_argument);
}

TEST_CASE("rendered magnitude is normalized into [0, 1]") {
  Rng rng(5);
  Corpus c = make_corpus(rng, 3, 0, 0, 24, 24, 1);
  for (const CMat& img : c.train) {
    double peak = img.cwiseAbs().maxCoeff();
    CHECK(peak <= 1.0 + 1e-12);
    CHECK(peak > 0.99);
  }
}

TEST_CASE("same master seed reproduces the corpus") {
  Rng a(42), b(42);
  Corpus ca = make_corpus(a, 3, 2, 2, 16, 16, 2);
  Corpus cb = make_corpus(b, 3, 2, 2, 16, 16, 2);
  for (std::size_t i = 0; i < ca.train.size(); ++i)
    CHECK((ca.train[i] - cb.train[i]).norm() == 0.0);
  for (std::size_t i = 0; i < ca.test.size(); ++i)
    CHECK((ca.test[i] - cb.test[i]).norm() == 0.0);
  for (Index j = 0; j < ca.coils.coils(); ++j)
    CHECK((ca.coils.maps[j] - cb.coils.maps[j]).norm() == 0.0);
}

TEST_CASE("train, val and test splits are pairwise distinct") {
  Rng rng(43);
  Corpus c = make_corpus(rng, 4, 3, 3, 16, 16, 1);
  auto distinct = [](const CMat& a, const CMat& b) {
    return (a - b).norm() > 1e-9;
  };
  for (const CMat& tr : c.train) {
    for (const CMat& va : c.val) CHECK(distinct(tr, va));
    for (const CMat& te : c.test) CHECK(distinct(tr, te));
  }
  for (const CMat& va : c.val)
    for (const CMat& te : c.test) CHECK(distinct(va, te));
}

TEST_CASE("single-coil corpus uses the unit sensitivity") {
  Rng rng(44);
  Corpus c = make_corpus(rng, 1, 0, 0, 16, 16, 1);
  REQUIRE(c.coils.coils() == 1);
  CHECK((c.coils.maps[0] - CMat::Ones(16, 16)).norm() == 0.0);
}

TEST_CASE("multi-coil maps have unit sum of squares everywhere") {
  CoilSet coils = make_coils(24, 24, 4);
  RMat sos = RMat::Zero(24, 24);
  for (const CMat& m : coils.maps) sos += m.cwiseAbs2();
  CHECK((sos.array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("ellipse counts stay within 3 to 8") {
  Rng rng(45);
  Corpus c = make_corpus(rng, 20, 0, 0, 8, 8, 1);
  for (const PhantomSpec& spec : c.train_specs) {
    CHECK(spec.ellipses.size() >= 3);
    CHECK(spec.ellipses.size() <= 8);
  }
}

TEST_CASE("corpus round trips through disk") {
  Rng rng(46);
  Corpus c = make_corpus(rng, 3, 2, 2, 16, 16, 3);
  auto dir = std::filesystem::temp_directory_path() / "ksopt_phantom_tests";
  std::filesystem::remove_all(dir);
  save_corpus(c, dir);
  Corpus back = load_corpus(dir);
  CHECK(back.rows == 16);
  CHECK(back.cols == 16);
  REQUIRE(back.train.size() == 3);
  REQUIRE(back.val.size() == 2);
  REQUIRE(back.test.size() == 2);
  for (std::size_t i = 0; i < c.train.size(); ++i)
    CHECK((back.train[i] - c.train[i]).norm() == 0.0);
  for (Index j = 0; j < 3; ++j)
    CHECK((back.coils.maps[j] - c.coils.maps[j]).norm() == 0.0);
}

TEST_CASE("bad split sizes are rejected") {
  Rng rng(47);
  CHECK_THROWS_AS(make_corpus(rng, 0, 1, 1, 8, 8, 1), std::invalid_argument);
}
