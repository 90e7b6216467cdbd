#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fts/backtest.h"
#include "fts/error.h"
#include "fts/log.h"
#include "fts/synthetic.h"

namespace {

using V = std::vector<double>;

fts::ReturnLabels make_labels(std::size_t stocks, const std::vector<V>& by_day) {
  fts::ReturnLabels l;
  l.num_stocks = stocks;
  l.dates = fts::business_days(fts::parse_date("2022-01-03"), by_day.size());
  for (std::size_t b = 0; b < stocks; ++b) {
    l.symbols.push_back("S" + std::to_string(b));
    for (const auto& day : by_day) l.values.push_back(day[b]);
  }
  return l;
}

fts::ScoreTable table_of(const fts::ReturnLabels& labels, const std::vector<V>& scores) {
  fts::ScoreTable t;
  for (std::size_t d = 0; d < scores.size(); ++d) t.days[labels.dates[d]] = scores[d];
  return t;
}

fts::EquityCurve curve_of(const V& r) {
  fts::EquityCurve c;
  c.dates = fts::business_days(fts::parse_date("2022-01-03"), r.size());
  double e = 1.0;
  for (double x : r) {
    e *= 1.0 + x;
    c.daily_returns.push_back(x);
    c.equity.push_back(e);
  }
  return c;
}

struct Quiet {
  Quiet() { fts::log::set_threshold(fts::log::Level::quiet); }
  ~Quiet() { fts::log::set_threshold(fts::log::Level::warn); }
};

}  // namespace

TEST_CASE("top-k: hand fixture") {
  const auto labels = make_labels(3, {{0.01, 0.02, 0.03}});
  const auto curve = fts::topk_backtest(table_of(labels, {{3, 2, 1}}), labels, 2);
  CHECK(curve.daily_returns[0] == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(curve.equity[0] == doctest::Approx(1.015));
}

TEST_CASE("top-k: degenerate and perfect-foresight selections") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 0.02);
  std::vector<V> days(20, V(5));
  std::vector<V> noise(20, V(5));
  for (auto& day : days) for (double& v : day) v = d(rng);
  for (auto& day : noise) for (double& v : day) v = d(rng);
  const auto labels = make_labels(5, days);
  const auto all = fts::topk_backtest(table_of(labels, noise), labels, 5);
  const auto best = fts::topk_backtest(table_of(labels, days), labels, 1);
  const auto ew = fts::equal_weight_curve(labels, labels.dates);
  for (std::size_t t = 0; t < 20; ++t) {
    double mean = 0.0;
    for (double v : days[t]) mean += v;
    CHECK(all.daily_returns[t] == doctest::Approx(mean / 5.0).epsilon(1e-14));
    CHECK(ew.daily_returns[t] == doctest::Approx(mean / 5.0).epsilon(1e-14));
    CHECK(best.daily_returns[t] == *std::max_element(days[t].begin(), days[t].end()));
  }
}

TEST_CASE("top-k: ties keep symbol order, shift invariance, brute force") {
  const auto labels = make_labels(4, {{0.01, 0.02, 0.03, 0.04}});
  CHECK(fts::topk_backtest(table_of(labels, {{1, 1, 1, 1}}), labels, 2).daily_returns[0] ==
        doctest::Approx(0.015));

  std::mt19937_64 rng(2);
  std::normal_distribution<double> d(0.0, 0.02);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t b = 2 + rng() % 4;
    const std::size_t t = 2 + rng() % 9;
    std::vector<V> r(t, V(b)), s(t, V(b)), shifted(t, V(b));
    for (std::size_t i = 0; i < t; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        r[i][j] = d(rng);
        s[i][j] = static_cast<double>(rng() % 4);
        shifted[i][j] = s[i][j] + 17.5;
      }
    }
    const auto l = make_labels(b, r);
    const std::size_t k = 1 + rng() % b;
    const auto curve = fts::topk_backtest(table_of(l, s), l, k);
    CHECK(fts::topk_backtest(table_of(l, shifted), l, k).daily_returns == curve.daily_returns);
    double equity = 1.0;
    for (std::size_t i = 0; i < t; ++i) {
      std::vector<std::size_t> order(b);
      for (std::size_t j = 0; j < b; ++j) order[j] = j;
      for (std::size_t x = 0; x < b; ++x) {
        for (std::size_t y = x + 1; y < b; ++y) {
          if (s[i][order[y]] > s[i][order[x]] ||
              (s[i][order[y]] == s[i][order[x]] && order[y] < order[x])) {
            std::swap(order[x], order[y]);
          }
        }
      }
      double mean = 0.0;
      for (std::size_t x = 0; x < k; ++x) mean += r[i][order[x]];
      mean /= static_cast<double>(k);
      equity *= 1.0 + mean;
      CHECK(std::abs(curve.daily_returns[i] - mean) < 1e-15);
      CHECK(std::abs(curve.equity[i] - equity) < 1e-15);
    }
  }
}

TEST_CASE("top-k: errors") {
  const auto labels = make_labels(3, {{0.01, 0.02, 0.03}, {0.0, 0.0, 0.0}});
  fts::ScoreTable partial;
  partial.days[labels.dates[0]] = {1, 2, 3};
  CHECK_THROWS_AS(fts::topk_backtest(partial, labels, labels.dates, {}), fts::ArgumentError);
  fts::BacktestOptions o;
  o.k = 2;
  CHECK_THROWS_AS(fts::topk_backtest(partial, labels, labels.dates, o), fts::DataError);
  CHECK_THROWS_AS(fts::topk_backtest(partial, labels, 4), fts::ArgumentError);
  CHECK_THROWS_AS(fts::topk_backtest(partial, labels, 0), fts::ArgumentError);
}

TEST_CASE("metrics: hand fixtures") {
  Quiet quiet;
  const auto up = fts::compute_metrics(curve_of({0.01, 0.02, 0.005}));
  CHECK(up.mdd == 0.0);
  CHECK(std::isinf(up.cr));

  const auto flat = fts::compute_metrics(curve_of(V(30, 0.001)));
  CHECK(std::abs(flat.arr - 0.252) < 1e-12);
  CHECK(flat.avol == 0.0);
  CHECK(flat.asr == INFINITY);
  CHECK_FALSE(flat.warnings.empty());

  const auto swing = fts::compute_metrics(curve_of({0.1, -0.1}));
  CHECK(std::abs(swing.mdd - 0.10) < 1e-12);

  const auto first_loss = fts::compute_metrics(curve_of({-0.2, 0.1}));
  CHECK(std::abs(first_loss.mdd - 0.2) < 1e-12);

  const auto dead = fts::compute_metrics(curve_of(V(5, 0.0)));
  CHECK(dead.asr == 0.0);
  CHECK(dead.cr == 0.0);

  const auto r = V{0.01, -0.02, 0.03, 0.0};
  const auto m = fts::compute_metrics(curve_of(r));
  const double mean = 0.005;
  double ss = 0.0;
  for (double x : r) ss += (x - mean) * (x - mean);
  CHECK(m.arr == doctest::Approx(mean * 252).epsilon(1e-14));
  CHECK(m.avol == doctest::Approx(std::sqrt(ss / 3.0) * std::sqrt(252.0)).epsilon(1e-14));
  CHECK(m.ir == doctest::Approx(m.asr).epsilon(1e-14));
  CHECK(m.days == 4);
  CHECK(m.trading_days_per_year == 252);
  CHECK_THROWS_AS(fts::compute_metrics(curve_of({0.01})), fts::ArgumentError);
  CHECK_THROWS_AS(fts::compute_metrics(curve_of({0.01, -1.0})), fts::NumericError);
}

TEST_CASE("metrics: identities, benchmark and risk-free") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> d(0.0005, 0.01);
  for (int trial = 0; trial < 100; ++trial) {
    V r(10 + rng() % 100);
    for (double& x : r) x = d(rng);
    const auto m = fts::compute_metrics(curve_of(r));
    CHECK(m.avol >= 0.0);
    CHECK(m.mdd >= 0.0);
    CHECK(m.mdd < 1.0);
    if (m.avol > 0) CHECK(std::abs(m.asr * m.avol - m.arr) <= 1e-12);
    if (m.mdd > 0) CHECK(std::abs(m.cr * m.mdd - m.arr) <= 1e-12);

    fts::MetricsOptions o;
    o.benchmark = V(r.size(), 0.0);
    CHECK(fts::compute_metrics(curve_of(r), o).ir == m.ir);
    o.benchmark = r;
    {
      Quiet quiet;
      CHECK(fts::compute_metrics(curve_of(r), o).ir == 0.0);
    }
    fts::MetricsOptions rf;
    rf.risk_free_daily = 0.0001;
    const auto with_rf = fts::compute_metrics(curve_of(r), rf);
    CHECK(with_rf.asr == doctest::Approx((m.arr - 0.0252) / m.avol).epsilon(1e-12));
    CHECK(with_rf.arr == m.arr);
  }
}

TEST_CASE("metrics: MDD invariant under scaling the equity curve") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> d(0.0, 0.02);
  V r(60);
  for (double& x : r) x = d(rng);
  auto c = curve_of(r);
  const double base = fts::compute_metrics(c).mdd;
  // A curve starting at any positive level with the same daily returns has
  // proportional equity; drawdown fractions do not change.
  for (double& e : c.equity) e *= 3.7;
  double peak = 3.7, worst = 0.0;
  for (double e : c.equity) {
    peak = std::max(peak, e);
    worst = std::max(worst, 1.0 - e / peak);
  }
  CHECK(std::abs(worst - base) < 1e-12);
}

TEST_CASE("compare reports") {
  fts::MetricsReport a;
  a.arr = 0.2;
  a.avol = 0.1;
  a.mdd = 0.05;
  const auto solo = fts::compare_reports("a", a, {}, {});
  for (std::size_t m = 0; m < 6; ++m) CHECK(solo.ranks[0][m] == 1);

  fts::MetricsReport b = a;
  b.arr = 0.3;
  const auto t = fts::compare_reports("a", a, {"b"}, {b});
  CHECK(t.ranks[0][0] == 2);
  CHECK(t.ranks[1][0] == 1);
  for (std::size_t m = 1; m < 6; ++m) CHECK(t.ranks[0][m] == t.ranks[1][m]);

  fts::MetricsReport c = a;
  c.mdd = 0.4;
  const auto dd = fts::compare_reports("a", a, {"c"}, {c});
  CHECK(dd.ranks[0][2] == 1);
  CHECK(dd.ranks[1][2] == 2);
  CHECK(fts::metric_lower_is_better(1));
  CHECK(fts::metric_lower_is_better(2));
  CHECK_FALSE(fts::metric_lower_is_better(3));
  CHECK_THROWS_AS(fts::compare_reports("a", a, {"b", "c"}, {b}), fts::ArgumentError);

  const auto text = fts::format_metrics_table({"a", "b"}, {a, b});
  const auto header = text.substr(0, text.find('\n'));
  std::size_t pos = 0;
  for (const char* name : fts::kMetricNames) {
    const auto at = header.find(name, pos);
    REQUIRE(at != std::string::npos);
    pos = at;
  }
  CHECK(fts::format_ranking_table(t).find("b") != std::string::npos);
}
