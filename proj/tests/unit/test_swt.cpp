#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fts/error.h"
#include "fts/swt.h"
#include "oracles.h"

namespace {

using V = std::vector<double>;

V random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d;
  V v(n);
  for (double& x : v) x = d(rng);
  return v;
}

V flat(const fts::SwtCoefficients& c) {
  V out;
  for (const auto& d : c.detail) out.insert(out.end(), d.begin(), d.end());
  out.insert(out.end(), c.approx.begin(), c.approx.end());
  return out;
}

double dot(const V& a, const V& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

const double kR = 1.0 / std::sqrt(2.0);

}  // namespace

TEST_CASE("init filters") {
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  REQUIRE(haar.h.size() == 2);
  CHECK(haar.h[0] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(haar.h[1] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(haar.g[0] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(haar.g[1] == doctest::Approx(-kR).epsilon(1e-15));
  const auto db4 = fts::init_filters(fts::WaveletBasis::db4, 8);
  double sh = 0, sg = 0, e = 0, cross = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    sh += db4.h[i];
    sg += db4.g[i];
    e += db4.h[i] * db4.h[i];
    cross += db4.h[i] * db4.g[i];
  }
  CHECK(std::abs(sh - std::sqrt(2.0)) < 1e-10);
  CHECK(std::abs(sg) < 1e-10);
  CHECK(std::abs(e - 1.0) < 1e-10);
  CHECK(std::abs(cross) < 1e-10);
  for (std::size_t shift = 2; shift < 8; shift += 2) {
    double s = 0.0;
    for (std::size_t i = 0; i + shift < 8; ++i) s += db4.h[i] * db4.h[i + shift];
    CHECK(std::abs(s) < 1e-10);
  }
  const auto ref = oracle::daubechies_lowpass(4);
  for (std::size_t i = 0; i < 8; ++i) CHECK(std::abs(ref[i] - db4.h[i]) < 1e-10);
  const auto haar_ref = oracle::daubechies_lowpass(1);
  CHECK(std::abs(haar_ref[0] - kR) < 1e-12);
  CHECK_THROWS_AS(fts::init_filters(fts::WaveletBasis::db4, 4), fts::ArgumentError);
  CHECK_THROWS_AS(fts::init_filters(fts::WaveletBasis::haar, 8), fts::ArgumentError);
  CHECK(fts::parse_basis("db4") == fts::WaveletBasis::db4);
  CHECK_THROWS_AS(fts::parse_basis("sym8"), fts::ArgumentError);
}

TEST_CASE("upsample filter") {
  CHECK(fts::upsample_filter(V{1, 2, 3}, 0) == V{1, 2, 3});
  CHECK(fts::upsample_filter(V{1, 2}, 1) == V{1, 0, 2});
  const auto up = fts::upsample_filter(V{1, 2, 3}, 2);
  CHECK(up == V{1, 0, 0, 0, 2, 0, 0, 0, 3});
}

TEST_CASE("max levels") {
  CHECK(fts::max_levels(16, 8) == 2);
  CHECK(fts::max_levels(64, 8) == 4);
  CHECK(fts::max_levels(4, 2) == 2);
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  try {
    fts::swt_forward(V(4, 1.0), haar, 3);
    FAIL("expected an argument error");
  } catch (const fts::ArgumentError& e) {
    CHECK(std::string(e.what()).find("maximum feasible is 2") != std::string::npos);
  }
}

TEST_CASE("forward fixtures") {
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  const auto zero = fts::swt_forward(V(16, 0.0), haar, 3);
  for (double v : flat(zero)) CHECK(v == 0.0);
  CHECK(zero.count() == 16 * 4);

  const auto c = fts::swt_forward(V(16, 2.0), haar, 1);
  for (std::size_t t = 0; t < 15; ++t) {
    CHECK(c.approx[t] == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(std::abs(c.detail[0][t]) < 1e-15);
  }

  const auto impulse = fts::swt_forward(V{1, 0, 0, 0, 0, 0, 0, 0}, haar, 1);
  CHECK(impulse.approx[0] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(impulse.detail[0][0] == doctest::Approx(kR).epsilon(1e-15));
  for (std::size_t t = 1; t < 8; ++t) CHECK(impulse.approx[t] == 0.0);
  const auto later = fts::swt_forward(V{0, 0, 0, 1, 0, 0, 0, 0}, haar, 1);
  CHECK(later.approx[2] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(later.detail[0][2] == doctest::Approx(-kR).epsilon(1e-15));
  CHECK(later.approx[3] == doctest::Approx(kR).epsilon(1e-15));
  CHECK(later.detail[0][3] == doctest::Approx(kR).epsilon(1e-15));
  const auto two = fts::swt_forward(V{0, 0, 0, 0, 1, 0, 0, 0}, haar, 2);
  CHECK(two.approx[0] == 0.0);
  for (std::size_t t = 1; t <= 4; ++t) CHECK(two.approx[t] == doctest::Approx(0.5));
  CHECK(two.detail[1][1] == doctest::Approx(-0.5));
  CHECK(two.detail[1][3] == doctest::Approx(0.5));
}

TEST_CASE("linearity") {
  std::mt19937_64 rng(1);
  const auto f = fts::init_filters(fts::WaveletBasis::db4, 8);
  const auto x = random_vec(rng, 50), y = random_vec(rng, 50);
  V z(50);
  for (std::size_t i = 0; i < 50; ++i) z[i] = 1.5 * x[i] - 0.7 * y[i];
  const auto fx = flat(fts::swt_forward(x, f, 2));
  const auto fy = flat(fts::swt_forward(y, f, 2));
  const auto fz = flat(fts::swt_forward(z, f, 2));
  for (std::size_t i = 0; i < fz.size(); ++i) CHECK(std::abs(fz[i] - (1.5 * fx[i] - 0.7 * fy[i])) < 1e-12);
}

TEST_CASE("periodic shift equivariance and energy") {
  std::mt19937_64 rng(2);
  const auto db4 = fts::init_filters(fts::WaveletBasis::db4, 8);
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  const auto x = random_vec(rng, 32);
  V shifted(32);
  for (std::size_t t = 0; t < 32; ++t) shifted[(t + 5) % 32] = x[t];
  const auto a = fts::swt_forward(x, db4, 2, fts::Boundary::periodic);
  const auto b = fts::swt_forward(shifted, db4, 2, fts::Boundary::periodic);
  for (std::size_t t = 0; t < 32; ++t) {
    CHECK(std::abs(b.approx[(t + 5) % 32] - a.approx[t]) < 1e-12);
    CHECK(std::abs(b.detail[1][(t + 5) % 32] - a.detail[1][t]) < 1e-12);
  }
  const auto one = fts::swt_forward(x, haar, 1, fts::Boundary::periodic);
  CHECK(dot(flat(one), flat(one)) == doctest::Approx(2.0 * dot(x, x)).epsilon(1e-12));
  // Each level doubles the energy of the approximation it splits.
  const auto three = fts::swt_forward(x, haar, 3, fts::Boundary::periodic);
  double e = dot(three.approx, three.approx);
  for (std::size_t s = 3; s-- > 0;) e = e / 2.0 + dot(three.detail[s], three.detail[s]) / 2.0;
  CHECK(e == doctest::Approx(dot(x, x)).epsilon(1e-12));
}

TEST_CASE("inverse reconstruction") {
  std::mt19937_64 rng(3);
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  const auto db4 = fts::init_filters(fts::WaveletBasis::db4, 8);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = random_vec(rng, 64);
    const auto y = fts::swt_inverse(fts::swt_forward(x, haar, 2), haar);
    for (std::size_t t = 3; t + 3 < 64; ++t) CHECK(std::abs(y[t] - x[t]) < 1e-10);
    const auto x2 = random_vec(rng, 128);
    const auto y2 = fts::swt_inverse(fts::swt_forward(x2, db4, 1), db4);
    for (std::size_t t = 16; t + 16 < 128; ++t) CHECK(std::abs(y2[t] - x2[t]) < 1e-8);
  }
  for (double v : fts::swt_inverse(fts::SwtCoefficients::zeros(16, 2), haar)) CHECK(v == 0.0);
  auto bad = fts::SwtCoefficients::zeros(16, 2);
  bad.approx.resize(15);
  CHECK_THROWS_AS(fts::swt_inverse(bad, haar), fts::ArgumentError);
}

TEST_CASE("adjoint identity") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    fts::FilterPair f{random_vec(rng, 4), random_vec(rng, 4)};
    const auto x = random_vec(rng, 40);
    auto u = fts::SwtCoefficients::zeros(40, 3);
    for (auto& d : u.detail) d = random_vec(rng, 40);
    u.approx = random_vec(rng, 40);
    for (auto b : {fts::Boundary::zero, fts::Boundary::periodic}) {
      const double lhs = dot(flat(fts::swt_forward(x, f, 3, b)), flat(u));
      const double rhs = dot(x, fts::swt_adjoint(u, f, b));
      CHECK(std::abs(lhs - rhs) < 1e-10);
    }
  }
}

TEST_CASE("backward gradients") {
  std::mt19937_64 rng(5);
  const auto haar = fts::init_filters(fts::WaveletBasis::haar, 2);
  const auto zero = fts::swt_backward(V(32, 1.0), haar, 2, fts::SwtCoefficients::zeros(32, 2));
  for (double v : zero.grad_x) CHECK(v == 0.0);
  for (double v : zero.grad_h) CHECK(v == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    fts::FilterPair f{random_vec(rng, 8), random_vec(rng, 8)};
    const auto x = random_vec(rng, 32);
    auto u = fts::SwtCoefficients::zeros(32, 2);
    for (auto& d : u.detail) d = random_vec(rng, 32);
    u.approx = random_vec(rng, 32);
    const auto g = fts::swt_backward(x, f, 2, u);
    V packed = f.h;
    packed.insert(packed.end(), f.g.begin(), f.g.end());
    const auto objective = [&](const V& p) {
      fts::FilterPair q{V(p.begin(), p.begin() + 8), V(p.begin() + 8, p.end())};
      return dot(flat(fts::swt_forward(x, q, 2)), flat(u));
    };
    const auto numeric = oracle::central_gradient(objective, packed, 1e-5);
    V analytic = g.grad_h;
    analytic.insert(analytic.end(), g.grad_g.begin(), g.grad_g.end());
    CHECK(oracle::relative_error(analytic, numeric) < 1e-5);
    CHECK(oracle::relative_error(g.grad_x, fts::swt_adjoint(u, f)) < 1e-14);
  }

  auto ones = fts::SwtCoefficients::zeros(32, 1);
  ones.approx.assign(32, 1.0);
  ones.detail[0].assign(32, 1.0);
  const auto c = fts::swt_backward(V(32, 3.0), haar, 1, ones);
  // Every tap reads 31 in-range samples of value 3, except tap 0 which sees all 32.
  CHECK(c.grad_h[0] == doctest::Approx(96.0));
  CHECK(c.grad_h[1] == doctest::Approx(93.0));
  CHECK_THROWS_AS(fts::swt_backward(V(32, 1.0), haar, 2, fts::SwtCoefficients::zeros(31, 2)),
                  fts::ArgumentError);
}

TEST_CASE("tokenize window") {
  std::mt19937_64 rng(6);
  fts::Array3 w(2, 3, 64);
  for (double& v : w.data) v = std::normal_distribution<double>()(rng);
  const auto bank = fts::FilterBank::make(fts::WaveletBasis::db4, 8, 3, 3, false);
  const auto t = fts::tokenize_window(w, bank);
  CHECK(t.stocks == 2);
  CHECK(t.features == 3);
  CHECK(t.length == 64);
  CHECK(t.planes == 4);
  const auto direct = fts::swt_forward(w.series(1, 2), bank.for_feature(2), 3);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(t.at(1, 2, i, 0) == direct.detail[0][i]);
    CHECK(t.at(1, 2, i, 2) == direct.detail[2][i]);
    CHECK(t.at(1, 2, i, 3) == direct.approx[i]);
  }
  fts::Array3 swapped = w;
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < 64; ++i) {
      swapped.at(0, m, i) = w.at(1, m, i);
      swapped.at(1, m, i) = w.at(0, m, i);
    }
  }
  const auto ts = fts::tokenize_window(swapped, bank);
  for (std::size_t m = 0; m < 3; ++m) {
    for (std::size_t i = 0; i < 64; ++i) CHECK(ts.at(0, m, i, 1) == t.at(1, m, i, 1));
  }
  CHECK_THROWS_AS(fts::tokenize_window(w, fts::FilterBank::make(fts::WaveletBasis::db4, 8, 3, 2, false)),
                  fts::ArgumentError);
}
