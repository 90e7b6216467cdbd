#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fts/error.h"
#include "fts/panel.h"
#include "fts/synthetic.h"

namespace {

using fts::parse_date;

fts::StockPanel one_stock(const std::vector<double>& prices) {
  const auto dates = fts::business_days(parse_date("2022-01-03"), prices.size());
  fts::Array3 values(1, 1, prices.size());
  for (std::size_t t = 0; t < prices.size(); ++t) values.at(0, 0, t) = prices[t];
  return fts::StockPanel({"A"}, dates, {"close"}, values);
}

fts::StockPanel motif_panel(std::uint64_t seed, std::size_t stocks, std::size_t days) {
  fts::MotifPanelOptions o;
  o.stocks = stocks;
  o.days = days;
  return fts::planted_motif_panel(seed, o);
}

}  // namespace

TEST_CASE("load: full grid of 2 symbols over 3 days") {
  const auto p = fts::parse_panel(
      "date,symbol,close\n"
      "2022-01-03,A,1\n2022-01-03,B,2\n"
      "2022-01-04,A,3\n2022-01-04,B,4\n"
      "2022-01-05,A,5\n2022-01-05,B,6\n");
  CHECK(p.num_stocks() == 2);
  CHECK(p.num_days() == 3);
  CHECK(p.num_features() == 1);
  CHECK(p.series(1, 0)[2] == 6.0);
}

TEST_CASE("load: missing date forward-filled within symbol") {
  const auto p = fts::parse_panel(
      "date,symbol,close\n"
      "2022-01-03,A,1\n2022-01-03,B,10\n"
      "2022-01-04,A,2\n"
      "2022-01-05,A,3\n2022-01-05,B,30\n");
  REQUIRE(p.num_days() == 3);
  CHECK(p.series(1, 0)[1] == 10.0);
  CHECK(p.series(1, 0)[2] == 30.0);
}

TEST_CASE("load: leading dates without a value for every symbol are dropped") {
  const auto p = fts::parse_panel(
      "date,symbol,close\n"
      "2022-01-03,A,1\n"
      "2022-01-04,A,2\n2022-01-04,B,20\n"
      "2022-01-05,A,3\n2022-01-05,B,30\n");
  CHECK(p.num_days() == 2);
  CHECK(p.calendar().front() == parse_date("2022-01-04"));
}

TEST_CASE("load: non-numeric close names the line") {
  try {
    fts::parse_panel("date,symbol,close\n2022-01-03,A,1\n2022-01-04,A,abc\n");
    FAIL("expected a parse error");
  } catch (const fts::ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load: data errors") {
  CHECK_THROWS_AS(fts::parse_panel(""), fts::DataError);
  CHECK_THROWS_AS(fts::parse_panel("date,symbol,close\n2022-01-04,A,1\n2022-01-03,A,2\n"),
                  fts::DataError);
  CHECK_THROWS_AS(fts::parse_panel("date,symbol,close\n2022-01-04,A,1,7\n"), fts::ParseError);
  try {
    fts::load_panel("/nonexistent/panel.csv");
    FAIL("expected a data error");
  } catch (const fts::DataError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/panel.csv") != std::string::npos);
  }
}

TEST_CASE("load: feature selection keeps the requested order") {
  fts::IngestConfig cfg;
  cfg.features = {"b", "a"};
  const auto p = fts::parse_panel("date,symbol,a,b\n2022-01-03,X,1,2\n2022-01-04,X,3,4\n", cfg);
  CHECK(p.feature_names() == std::vector<std::string>{"b", "a"});
  CHECK(p.series(0, 0)[1] == 4.0);
  cfg.features = {"c"};
  CHECK_THROWS_AS(fts::parse_panel("date,symbol,a\n2022-01-03,X,1\n2022-01-04,X,3\n", cfg),
                  fts::DataError);
}

TEST_CASE("write then load reproduces values bit-exactly") {
  const auto p = motif_panel(3, 3, 50);
  const auto back = fts::parse_panel(fts::format_panel(p));
  CHECK(back.symbols() == p.symbols());
  CHECK(back.calendar() == p.calendar());
  CHECK(back.values().data == p.values().data);
}

TEST_CASE("normalize: constant series is all zeros") {
  const auto p = one_stock({5, 5, 5, 5});
  const auto n = fts::normalize(p, {p.calendar().front(), p.calendar().back()});
  for (double v : n.series(0, 0)) CHECK(v == 0.0);
}

TEST_CASE("normalize: [1,2,3] over itself uses population std") {
  const auto p = one_stock({1, 2, 3});
  const auto n = fts::normalize(p, {p.calendar().front(), p.calendar().back()});
  const double s = std::sqrt(2.0 / 3.0);
  CHECK(n.series(0, 0)[0] == doctest::Approx(-1.0 / s).epsilon(1e-14));
  CHECK(n.series(0, 0)[1] == doctest::Approx(0.0));
  CHECK(n.series(0, 0)[2] == doctest::Approx(1.2247448713915890).epsilon(1e-14));
}

TEST_CASE("normalize: second pass is identity") {
  const auto p = motif_panel(4, 2, 60);
  const fts::DateRange all{p.calendar().front(), p.calendar().back()};
  const auto once = fts::normalize(p, all);
  const auto twice = fts::normalize(once, all);
  for (std::size_t i = 0; i < once.values().data.size(); ++i) {
    CHECK(std::abs(once.values().data[i] - twice.values().data[i]) < 1e-12);
  }
  const auto n = fts::normalize(p, all);
  CHECK(p.values().data == motif_panel(4, 2, 60).values().data);
  CHECK(n.values().data != p.values().data);
}

TEST_CASE("normalize: statistics come from the window only") {
  auto a = motif_panel(5, 2, 60);
  fts::Array3 changed = a.values();
  for (std::size_t t = 40; t < 60; ++t) changed.at(1, 0, t) += 100.0;
  const fts::StockPanel b(a.symbols(), a.calendar(), a.feature_names(), changed);
  const fts::DateRange window{a.calendar()[0], a.calendar()[39]};
  const auto na = fts::normalize(a, window);
  const auto nb = fts::normalize(b, window);
  for (std::size_t t = 0; t < 40; ++t) CHECK(na.series(1, 0)[t] == nb.series(1, 0)[t]);
}

TEST_CASE("normalize: window outside the calendar is a range error") {
  const auto p = one_stock({1, 2, 3});
  CHECK_THROWS_AS(fts::normalize(p, {parse_date("2030-01-01"), parse_date("2030-02-01")}),
                  fts::ArgumentError);
}

TEST_CASE("labels: hand fixtures") {
  CHECK(fts::compute_labels(one_stock({100, 101}), "close").values ==
        std::vector<double>{101.0 / 100.0 - 1.0});
  CHECK(fts::compute_labels(one_stock({100, 100, 100}), "close").values ==
        std::vector<double>{0.0, 0.0});
  const auto l = fts::compute_labels(one_stock({100, 90, 99}), "close");
  CHECK(l.values[0] == doctest::Approx(-0.10).epsilon(1e-15));
  CHECK(l.values[1] == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(l.width() == 2);
}

TEST_CASE("labels: non-positive price names symbol and date") {
  try {
    fts::compute_labels(one_stock({100, 0, 99}), "close");
    FAIL("expected a data error");
  } catch (const fts::DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("'A'") != std::string::npos);
    CHECK(msg.find("2022-01-04") != std::string::npos);
  }
  CHECK_THROWS_AS(fts::compute_labels(one_stock({1, 2}), "open"), fts::ArgumentError);
}

TEST_CASE("labels: compounding reproduces the total price ratio") {
  const auto p = motif_panel(6, 3, 300);
  const auto l = fts::compute_labels(p, "close");
  const std::size_t close = p.feature_index("close");
  for (std::size_t b = 0; b < 3; ++b) {
    double growth = 1.0;
    for (std::size_t t = 0; t < l.width(); ++t) {
      CHECK(l.at(b, t) > -1.0);
      growth *= 1.0 + l.at(b, t);
    }
    const auto s = p.series(b, close);
    const double ratio = s.back() / s.front();
    CHECK(std::abs(growth - ratio) / ratio < 1e-12);
  }
}

TEST_CASE("split: sizes and concatenation") {
  const auto p = one_stock({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto& cal = p.calendar();
  const auto s = fts::chronological_split(p, cal[6], cal[8]);
  CHECK(s.train.num_days() == 6);
  CHECK(s.validation.num_days() == 2);
  CHECK(s.test.num_days() == 2);
  std::vector<fts::Date> joined = s.train.calendar();
  joined.insert(joined.end(), s.validation.calendar().begin(), s.validation.calendar().end());
  joined.insert(joined.end(), s.test.calendar().begin(), s.test.calendar().end());
  CHECK(joined == cal);
  std::vector<double> values;
  for (const auto* part : {&s.train, &s.validation, &s.test}) {
    for (double v : part->series(0, 0)) values.push_back(v);
  }
  CHECK(values == std::vector<double>(p.series(0, 0).begin(), p.series(0, 0).end()));
}

TEST_CASE("split: degenerate boundaries are config errors") {
  const auto p = one_stock({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  const auto& cal = p.calendar();
  CHECK_THROWS_AS(fts::chronological_split(p, parse_date("2021-01-01"), cal[8]), fts::ConfigError);
  CHECK_THROWS_AS(fts::chronological_split(p, cal[6], cal[6]), fts::ConfigError);
  CHECK_THROWS_AS(fts::chronological_split(p, cal[8], cal[6]), fts::ConfigError);
}

TEST_CASE("dates parse and format") {
  CHECK(fts::format_date(parse_date("2021-07-09")) == "2021-07-09");
  CHECK_THROWS_AS(parse_date("2021-13-01"), fts::ArgumentError);
  CHECK_THROWS_AS(parse_date("20210101"), fts::ArgumentError);
}
