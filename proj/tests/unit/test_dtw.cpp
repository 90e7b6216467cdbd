#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "fts/dtw.h"
#include "fts/error.h"
#include "oracles.h"

namespace {

using V = std::vector<double>;

fts::DtwOptions with_path() {
  fts::DtwOptions o;
  o.with_path = true;
  return o;
}

V random_series(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  V v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace

TEST_CASE("identical inputs give zero and a diagonal path") {
  const auto r = fts::dtw_distance(V{1, 2, 3}, V{1, 2, 3}, with_path());
  CHECK(r.distance == 0.0);
  REQUIRE(r.path);
  CHECK(*r.path == fts::WarpingPath{{0, 0}, {1, 1}, {2, 2}});
  CHECK(r.path_length == 3);
}

TEST_CASE("hand fixtures") {
  CHECK(fts::dtw_distance(V{1, 2, 3}, V{1, 2, 2, 3}).distance == 0.0);
  CHECK(fts::dtw_distance(V{0, 0}, V{1, 1}).distance == 2.0);
  fts::DtwOptions sq;
  sq.local_metric = fts::LocalMetric::squared;
  CHECK(fts::dtw_distance(V{0, 0}, V{2, 2}, sq).distance == 8.0);
}

TEST_CASE("argument errors") {
  CHECK_THROWS_AS(fts::dtw_distance(V{}, V{1}), fts::ArgumentError);
  fts::DtwOptions band;
  band.band_radius = 1;
  CHECK_THROWS_AS(fts::dtw_distance(V{1, 2, 3, 4}, V{1}, band), fts::ArgumentError);
  CHECK_THROWS_AS(fts::weighted_dtw_distance(V{1, 2}, V{1}, V{1}), fts::ArgumentError);
  CHECK_THROWS_AS(fts::weighted_dtw_distance(V{1, 2}, V{1}, V{1, 0}), fts::ArgumentError);
}

TEST_CASE("matches brute-force enumeration and the path cost identity") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const auto x = random_series(rng, 1 + rng() % 6);
    const auto y = random_series(rng, 1 + rng() % 6);
    for (bool squared : {false, true}) {
      auto o = with_path();
      o.local_metric = squared ? fts::LocalMetric::squared : fts::LocalMetric::absolute;
      const auto r = fts::dtw_distance(x, y, o);
      CHECK(std::abs(r.distance - oracle::brute_force_dtw(x, y, squared)) < 1e-12);
      double cost = 0.0;
      std::size_t pi = 0, pj = 0;
      for (std::size_t s = 0; s < r.path->size(); ++s) {
        const auto [i, j] = (*r.path)[s];
        if (s > 0) {
          CHECK(i - pi <= 1);
          CHECK(j - pj <= 1);
          CHECK(i + j > pi + pj);
        }
        pi = i;
        pj = j;
        cost += fts::local_cost(x[i], y[j], o.local_metric);
      }
      CHECK(r.path->front() == std::pair<std::size_t, std::size_t>{0, 0});
      CHECK(r.path->back() == std::pair<std::size_t, std::size_t>{x.size() - 1, y.size() - 1});
      CHECK(std::abs(cost - r.distance) < 1e-12);
      CHECK(r.path_length == r.path->size());
    }
  }
}

TEST_CASE("rolling buffer agrees with the full table and with the oracle path length") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_series(rng, 1 + rng() % 20);
    const auto y = random_series(rng, 1 + rng() % 20);
    const auto full = fts::dtw_distance(x, y, with_path());
    const auto lean = fts::dtw_distance(x, y);
    CHECK(lean.distance == full.distance);
    CHECK(lean.path_length == full.path_length);
    const auto [dist, steps] = oracle::table_dtw(x, y, false);
    CHECK(std::abs(dist - lean.distance) < 1e-12);
    CHECK(steps == lean.path_length);
  }
}

TEST_CASE("symmetry, non-negativity and band consistency") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto x = random_series(rng, 1 + rng() % 15);
    const auto y = random_series(rng, 1 + rng() % 15);
    const double d = fts::dtw_distance(x, y).distance;
    CHECK(d >= 0.0);
    CHECK(d == fts::dtw_distance(y, x).distance);
    fts::DtwOptions band;
    band.band_radius = std::max(x.size(), y.size());
    CHECK(fts::dtw_distance(x, y, band).distance == d);
  }
}

TEST_CASE("banded distance matches a banded table oracle") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng() % 12;
    const std::size_t m = 3 + rng() % 12;
    const auto x = random_series(rng, n);
    const auto y = random_series(rng, m);
    const std::size_t radius = (n > m ? n - m : m - n) + rng() % 3;
    fts::DtwOptions o;
    o.band_radius = radius;
    const auto r = fts::dtw_distance(x, y, o);
    const auto ref = oracle::table_dtw(x, y, false, {}, static_cast<long>(radius));
    CHECK(std::abs(r.distance - ref.first) < 1e-12);
    CHECK(r.distance >= fts::dtw_distance(x, y).distance);
  }
}

TEST_CASE("volatility weights") {
  const auto flat = fts::volatility_weights(V(10, 3.0), 4);
  for (double w : flat) CHECK(w == 1.0);

  V bumpy(20, 0.0);
  for (std::size_t i = 10; i < 15; ++i) bumpy[i] = (i % 2 ? 3.0 : -3.0);
  const auto w = fts::volatility_weights(bumpy, 3);
  for (std::size_t i = 11; i < 15; ++i) CHECK(w[i] > 1.0);

  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_series(rng, 4 + rng() % 30);
    const auto wx = fts::volatility_weights(x, 4);
    double mean = 0.0;
    for (double v : wx) {
      CHECK(v > 0.0);
      mean += v;
    }
    CHECK(std::abs(mean / static_cast<double>(wx.size()) - 1.0) < 1e-12);
    const auto ref = oracle::trailing_vol_weights(x, 4);
    for (std::size_t i = 0; i < wx.size(); ++i) CHECK(std::abs(wx[i] - ref[i]) < 1e-12);
  }
  CHECK_THROWS_AS(fts::volatility_weights(V{1, 2, 3}, 4), fts::ArgumentError);
  CHECK_THROWS_AS(fts::volatility_weights(V{1, 2, 3}, 1), fts::ArgumentError);
}

TEST_CASE("weighted distance") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_series(rng, 1 + rng() % 6);
    const auto y = random_series(rng, 1 + rng() % 6);
    const V ones(x.size(), 1.0);
    CHECK(fts::weighted_dtw_distance(x, y, ones).distance == fts::dtw_distance(x, y).distance);
    const V twos(x.size(), 2.0);
    CHECK(fts::weighted_dtw_distance(x, y, twos).distance ==
          doctest::Approx(2.0 * fts::dtw_distance(x, y).distance).epsilon(1e-14));
    V wx(x.size());
    for (double& v : wx) v = 0.5 + static_cast<double>(rng() % 100) / 50.0;
    CHECK(std::abs(fts::weighted_dtw_distance(x, y, wx).distance -
                   oracle::brute_force_dtw(x, y, false, wx)) < 1e-12);
  }
  CHECK(fts::weighted_dtw_distance(V{0, 0}, V{1, 1}, V{2, 1}).distance == 3.0);

  fts::DtwOptions sym;
  sym.symmetric_weights = true;
  const V x{0, 0}, y{1, 1};
  CHECK(fts::weighted_dtw_distance(x, y, V{2, 1}, sym, V{1, 1}).distance == 2.5);
  CHECK_THROWS_AS(fts::weighted_dtw_distance(x, y, V{2, 1}, sym), fts::ArgumentError);
}

TEST_CASE("volatility mode weights the query side") {
  std::mt19937_64 rng(7);
  const auto x = random_series(rng, 12);
  const auto y = random_series(rng, 9);
  fts::DtwOptions o;
  o.weight_mode = fts::WeightMode::volatility;
  o.volatility_window = 3;
  const auto wx = fts::volatility_weights(x, 3);
  CHECK(fts::dtw_distance(x, y, o).distance == fts::weighted_dtw_distance(x, y, wx).distance);
}

TEST_CASE("pairwise distances") {
  const auto one = fts::pairwise_distances({V{1, 2, 3}});
  CHECK(one.size == 1);
  CHECK(one(0, 0) == 0.0);
  const auto same = fts::pairwise_distances({V{1, 2}, V{1, 2}});
  for (double v : same.values) CHECK(v == 0.0);
  const std::vector<V> three{V{0, 1, 2}, V{2, 2}, V{-1, 0, 3, 1}};
  const auto m = fts::pairwise_distances(three);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == fts::dtw_distance(three[i], three[j]).distance);
  }
  CHECK_THROWS_AS(fts::pairwise_distances({}), fts::ArgumentError);
  try {
    fts::pairwise_distances({V{1}, V{}});
    FAIL("expected an error");
  } catch (const fts::ArgumentError& e) {
    CHECK(std::string(e.what()).find("pair (") != std::string::npos);
  }
}
