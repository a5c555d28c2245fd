#include <doctest.h>

#include <cmath>
#include <set>

#include "sohip/rng.hpp"

using namespace sohip;

TEST_CASE("identical stream keys replay bit-identical sequences") {
  Rng a = Rng::stream(42, 3, 7, StreamPurpose::kShuffle);
  Rng b = Rng::stream(42, 3, 7, StreamPurpose::kShuffle);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("streams are independent of draw order elsewhere") {
  Rng noise = Rng::stream(42, 1, 1, StreamPurpose::kShuffle);
  for (int i = 0; i < 1000; ++i) noise.next_u64();
  // consuming another stream never shifts this one
  Rng a = Rng::stream(42, 3, 7, StreamPurpose::kShuffle);
  Rng b = Rng::stream(42, 3, 7, StreamPurpose::kShuffle);
  noise.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct purposes give distinct streams") {
  Rng a = Rng::stream(42, 3, 7, StreamPurpose::kShuffle);
  Rng b = Rng::stream(42, 3, 7, StreamPurpose::kModelInit);
  int differing = 0;
  for (int i = 0; i < 16; ++i)
    if (a.next_u64() != b.next_u64()) ++differing;
  CHECK(differing > 0);
}

TEST_CASE("uniform stays in [0,1) and has a sane mean") {
  Rng rng = Rng::stream(7, 0, 0, StreamPurpose::kTest);
  double sum = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  // 3 sigma of a mean of U(0,1) draws
  CHECK(std::abs(sum / n - 0.5) < 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal moments") {
  Rng rng = Rng::stream(11, 0, 0, StreamPurpose::kTest);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  CHECK(std::abs(sum / n) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("gamma mean matches alpha") {
  Rng rng = Rng::stream(13, 0, 0, StreamPurpose::kTest);
  for (double alpha : {0.3, 1.0, 4.5}) {
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum += rng.gamma(alpha);
    // Var = alpha, so the mean has sd sqrt(alpha/n)
    CHECK(std::abs(sum / n - alpha) < 4.0 * std::sqrt(alpha / n));
  }
}

TEST_CASE("sample_without_replacement returns k distinct sorted values") {
  Rng rng = Rng::stream(17, 0, 0, StreamPurpose::kTest);
  const auto picks = rng.sample_without_replacement(100, 10);
  CHECK(picks.size() == 10);
  std::set<std::uint32_t> unique(picks.begin(), picks.end());
  CHECK(unique.size() == 10);
  CHECK(std::is_sorted(picks.begin(), picks.end()));
  for (auto p : picks) CHECK(p < 100);
}

TEST_CASE("shuffle permutes") {
  Rng rng = Rng::stream(19, 0, 0, StreamPurpose::kTest);
  std::vector<int> values{0, 1, 2, 3, 4, 5, 6, 7};
  auto shuffled = values;
  rng.shuffle(shuffled);
  std::multiset<int> a(values.begin(), values.end());
  std::multiset<int> b(shuffled.begin(), shuffled.end());
  CHECK(a == b);
}
