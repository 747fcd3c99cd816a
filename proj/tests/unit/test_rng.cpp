#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "doctest.h"
#include "joco/util/rng.hpp"
#include "joco/util/sobol.hpp"

using namespace joco::util;

TEST_CASE("philox4x64-10 known answer for the zero block") {
  const auto out = philox4x64({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x16554d9eca36314cULL);
  CHECK(out[1] == 0xdb20fe9d672d0fdcULL);
  CHECK(out[2] == 0xd7e772cee186176bULL);
  CHECK(out[3] == 0x7e68b68aec7ba23bULL);
}

TEST_CASE("Rng raw stream matches the published test-vector file") {
  std::ifstream in(JOCO_TEST_DATA_DIR "/philox4x64_numpy.txt");
  REQUIRE(in.good());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    ls >> std::hex;
    std::uint64_t k0, k1, c0, c1, c2, c3;
    ls >> k0 >> k1 >> c0 >> c1 >> c2 >> c3;
    Rng rng({k0, k1}, {c0, c1, c2, c3});
    for (int i = 0; i < 8; ++i) {
      std::uint64_t want;
      ls >> want;
      CHECK(rng.next_u64() == want);
    }
    ++rows;
  }
  CHECK(rows == 4);
}

TEST_CASE("streams keyed by tag are independent and reproducible") {
  auto a = Rng::stream(7, StreamTag::kCandidates);
  auto b = Rng::stream(7, StreamTag::kCandidates);
  auto c = Rng::stream(7, StreamTag::kPosteriorDraws);
  for (int i = 0; i < 16; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
}

TEST_CASE("uniform and normal draws have sane moments") {
  auto rng = Rng::stream(1, StreamTag::kTest);
  const int n = 200000;
  double s = 0, s2 = 0, u = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
    const double v = rng.uniform();
    CHECK((v >= 0.0 && v < 1.0));
    u += v;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
  CHECK(std::abs(u / n - 0.5) < 0.005);
}

TEST_CASE("below stays in range") {
  auto rng = Rng::stream(2, StreamTag::kTest);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.below(5);
    CHECK(v < 5);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("unscrambled Sobol matches scipy's Joe-Kuo sequence") {
  std::ifstream in(JOCO_TEST_DATA_DIR "/sobol_unscrambled_40x64.txt");
  REQUIRE(in.good());
  std::string name;
  std::size_t rows, cols;
  in >> name >> rows >> cols;
  Sobol sobol(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto p = sobol.next();
    for (std::size_t d = 0; d < cols; ++d) {
      double want;
      in >> want;
      CHECK(p[d] == want);
    }
  }
}

TEST_CASE("scrambled Sobol keeps one point per dyadic cell") {
  auto rng = Rng::stream(3, StreamTag::kSobolScramble);
  const std::size_t dim = 15;
  Sobol sobol(dim, rng);
  const auto pts = sobol.draw(64);
  for (std::size_t d = 0; d < dim; ++d) {
    std::set<int> cells;
    for (std::size_t i = 0; i < 64; ++i) {
      const double v = pts[i * dim + d];
      CHECK((v >= 0.0 && v < 1.0));
      cells.insert(static_cast<int>(v * 64.0));
    }
    CHECK(cells.size() == 64);
  }
  // Two-dimensional (0, m, 2)-net property for the first pair of axes.
  std::set<int> boxes;
  for (std::size_t i = 0; i < 64; ++i) {
    boxes.insert(static_cast<int>(pts[i * dim] * 8) * 8 +
                 static_cast<int>(pts[i * dim + 1] * 8));
  }
  CHECK(boxes.size() == 64);
}

TEST_CASE("scrambling depends on the seed") {
  auto r1 = Rng::stream(1, StreamTag::kSobolScramble);
  auto r2 = Rng::stream(2, StreamTag::kSobolScramble);
  Sobol a(4, r1), b(4, r2);
  CHECK(a.draw(4) != b.draw(4));
}

TEST_CASE("Sobol rejects unsupported dimensions") {
  CHECK_THROWS_AS(Sobol(0), std::invalid_argument);
  CHECK_THROWS_AS(Sobol(65), std::invalid_argument);
}
