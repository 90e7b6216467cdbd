#include "fts/swt.h"

#include <cmath>
#include <string>

#include "fts/error.h"

namespace fts {

namespace {

// Daubechies scaling filter with four vanishing moments (eight taps).
constexpr double kDb4[8] = {
    0.23037781330885523,  0.71484657055254153,  0.63088076792959036,
    -0.027983769416983849, -0.18703481171888114, 0.030841381835986965,
    0.032883011666982945, -0.010597401784997278,
};

std::vector<double> quadrature_mirror(const std::vector<double>& h) {
  const std::size_t k = h.size();
  std::vector<double> g(k);
  for (std::size_t n = 0; n < k; ++n) {
    g[n] = (n % 2 == 0 ? 1.0 : -1.0) * h[k - 1 - n];
  }
  return g;
}

// Reads c[t] under the boundary rule; `inside` reports whether t maps to a
// real sample.
inline std::size_t wrap(long long t, std::size_t n, Boundary b, bool& inside) {
  const long long len = static_cast<long long>(n);
  if (b == Boundary::periodic) {
    inside = true;
    return static_cast<std::size_t>(((t % len) + len) % len);
  }
  inside = t >= 0 && t < len;
  return inside ? static_cast<std::size_t>(t) : 0;
}

// y[t] = sum_i taps[i] * c[t + i * dil]
void correlate(std::span<const double> c, std::span<const double> taps,
               std::size_t dil, Boundary b, std::vector<double>& y) {
  const std::size_t n = c.size();
  y.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      bool inside = false;
      const std::size_t idx =
          wrap(static_cast<long long>(t + i * dil), n, b, inside);
      if (inside) acc += taps[i] * c[idx];
    }
    y[t] = acc;
  }
}

// Adjoint of correlate, accumulated: out[u] += sum_t y[t] * [u = t + i*dil] * taps[i]
void correlate_adjoint_add(std::span<const double> y, std::span<const double> taps,
                           std::size_t dil, Boundary b, std::vector<double>& out) {
  const std::size_t n = y.size();
  for (std::size_t t = 0; t < n; ++t) {
    if (y[t] == 0.0) continue;
    for (std::size_t i = 0; i < taps.size(); ++i) {
      bool inside = false;
      const std::size_t idx =
          wrap(static_cast<long long>(t + i * dil), n, b, inside);
      if (inside) out[idx] += taps[i] * y[t];
    }
  }
}

// grad[i] += sum_t y[t] * c[t + i * dil]
void tap_gradient_add(std::span<const double> y, std::span<const double> c,
                      std::size_t dil, Boundary b, std::vector<double>& grad) {
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < grad.size(); ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      bool inside = false;
      const std::size_t idx =
          wrap(static_cast<long long>(t + i * dil), n, b, inside);
      if (inside) acc += y[t] * c[idx];
    }
    grad[i] += acc;
  }
}

void check_filters(const FilterPair& f) {
  if (f.h.size() < 2 || f.h.size() % 2 != 0 || f.g.size() != f.h.size()) {
    throw ArgumentError("swt: filters need an even tap count >= 2 and |h| = |g|");
  }
}

void check_depth(std::size_t length, std::size_t taps, std::size_t levels) {
  if (length == 0) throw ArgumentError("swt: empty signal");
  if (levels == 0) throw ArgumentError("swt: need at least one level");
  const std::size_t max = max_levels(length, taps);
  if (levels > max) {
    throw ArgumentError("swt: " + std::to_string(levels) +
                        " levels too deep for length " + std::to_string(length) +
                        " with " + std::to_string(taps) +
                        " taps; maximum feasible is " + std::to_string(max));
  }
}

void check_shape(const SwtCoefficients& c) {
  if (c.levels() == 0 || c.approx.size() != c.length) {
    throw ArgumentError("swt: malformed coefficient stack");
  }
  for (const auto& d : c.detail) {
    if (d.size() != c.length) {
      throw ArgumentError("swt: level length does not match signal length");
    }
  }
}

}  // namespace

FilterPair init_filters(WaveletBasis basis, std::size_t taps) {
  FilterPair f;
  switch (basis) {
    case WaveletBasis::haar:
      if (taps != 2) throw ArgumentError("haar filters have 2 taps");
      f.h = {M_SQRT1_2, M_SQRT1_2};
      break;
    case WaveletBasis::db4:
      if (taps != 8) throw ArgumentError("db4 filters have 8 taps");
      f.h.assign(std::begin(kDb4), std::end(kDb4));
      break;
  }
  f.g = quadrature_mirror(f.h);
  return f;
}

WaveletBasis parse_basis(std::string_view name) {
  if (name == "haar") return WaveletBasis::haar;
  if (name == "db4") return WaveletBasis::db4;
  throw ArgumentError("unknown wavelet basis '" + std::string(name) + "'");
}

std::vector<double> upsample_filter(std::span<const double> taps,
                                    std::size_t level) {
  if (taps.empty()) return {};
  const std::size_t step = std::size_t{1} << level;
  std::vector<double> out(taps.size() + (taps.size() - 1) * (step - 1), 0.0);
  for (std::size_t i = 0; i < taps.size(); ++i) out[i * step] = taps[i];
  return out;
}

std::size_t max_levels(std::size_t length, std::size_t taps) {
  if (taps < 2) return 0;
  std::size_t s = 0;
  while (s < 62 && 1 + (taps - 1) * (std::size_t{1} << s) <= length) ++s;
  return s;
}

SwtCoefficients SwtCoefficients::zeros(std::size_t length, std::size_t levels) {
  SwtCoefficients c;
  c.length = length;
  c.detail.assign(levels, std::vector<double>(length, 0.0));
  c.approx.assign(length, 0.0);
  return c;
}

SwtCoefficients swt_forward(std::span<const double> x, const FilterPair& filters,
                            std::size_t levels, Boundary boundary) {
  check_filters(filters);
  check_depth(x.size(), filters.taps(), levels);
  SwtCoefficients out;
  out.length = x.size();
  out.detail.resize(levels);
  std::vector<double> c(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t s = 0; s < levels; ++s) {
    const std::size_t dil = std::size_t{1} << s;
    correlate(c, filters.g, dil, boundary, out.detail[s]);
    correlate(c, filters.h, dil, boundary, next);
    c.swap(next);
  }
  out.approx = std::move(c);
  return out;
}

std::vector<double> swt_inverse(const SwtCoefficients& coeffs,
                                const FilterPair& filters, Boundary boundary) {
  check_filters(filters);
  check_shape(coeffs);
  check_depth(coeffs.length, filters.taps(), coeffs.levels());
  std::vector<double> c = coeffs.approx;
  for (std::size_t s = coeffs.levels(); s-- > 0;) {
    const std::size_t dil = std::size_t{1} << s;
    std::vector<double> prev(coeffs.length, 0.0);
    correlate_adjoint_add(c, filters.h, dil, boundary, prev);
    correlate_adjoint_add(coeffs.detail[s], filters.g, dil, boundary, prev);
    for (double& v : prev) v *= 0.5;
    c.swap(prev);
  }
  return c;
}

std::vector<double> swt_adjoint(const SwtCoefficients& upstream,
                                const FilterPair& filters, Boundary boundary) {
  check_filters(filters);
  check_shape(upstream);
  std::vector<double> grad_c = upstream.approx;
  for (std::size_t s = upstream.levels(); s-- > 0;) {
    const std::size_t dil = std::size_t{1} << s;
    std::vector<double> prev(upstream.length, 0.0);
    correlate_adjoint_add(grad_c, filters.h, dil, boundary, prev);
    correlate_adjoint_add(upstream.detail[s], filters.g, dil, boundary, prev);
    grad_c.swap(prev);
  }
  return grad_c;
}

SwtGradients swt_backward(std::span<const double> x, const FilterPair& filters,
                          std::size_t levels, const SwtCoefficients& upstream,
                          Boundary boundary) {
  check_filters(filters);
  check_depth(x.size(), filters.taps(), levels);
  check_shape(upstream);
  if (upstream.length != x.size() || upstream.levels() != levels) {
    throw ArgumentError("swt_backward: upstream shape does not match input");
  }
  // Re-run the forward pass keeping every approximation level.
  std::vector<std::vector<double>> approx(levels + 1);
  approx[0].assign(x.begin(), x.end());
  for (std::size_t s = 0; s < levels; ++s) {
    correlate(approx[s], filters.h, std::size_t{1} << s, boundary, approx[s + 1]);
  }

  SwtGradients out;
  out.grad_h.assign(filters.taps(), 0.0);
  out.grad_g.assign(filters.taps(), 0.0);
  std::vector<double> grad_c = upstream.approx;
  for (std::size_t s = levels; s-- > 0;) {
    const std::size_t dil = std::size_t{1} << s;
    tap_gradient_add(grad_c, approx[s], dil, boundary, out.grad_h);
    tap_gradient_add(upstream.detail[s], approx[s], dil, boundary, out.grad_g);
    std::vector<double> prev(x.size(), 0.0);
    correlate_adjoint_add(grad_c, filters.h, dil, boundary, prev);
    correlate_adjoint_add(upstream.detail[s], filters.g, dil, boundary, prev);
    grad_c.swap(prev);
  }
  out.grad_x = std::move(grad_c);
  return out;
}

FilterBank FilterBank::make(WaveletBasis basis, std::size_t taps,
                            std::size_t levels, std::size_t features,
                            bool shared) {
  if (features == 0) throw ArgumentError("filter bank needs at least one feature");
  FilterBank bank;
  bank.levels = levels;
  bank.shared = shared;
  bank.pairs.assign(shared ? 1 : features, init_filters(basis, taps));
  return bank;
}

Array4 tokenize_window(const Array3& window, const FilterBank& bank) {
  if (!bank.shared && bank.pairs.size() != window.features) {
    throw ArgumentError("tokenize_window: filter bank has " +
                        std::to_string(bank.pairs.size()) +
                        " channels for " + std::to_string(window.features) +
                        " features");
  }
  const std::size_t planes = bank.levels + 1;
  Array4 out{window.stocks, window.features, window.length, planes,
             std::vector<double>(window.data.size() * planes, 0.0)};
  for (std::size_t b = 0; b < window.stocks; ++b) {
    for (std::size_t m = 0; m < window.features; ++m) {
      const auto coeffs =
          swt_forward(window.series(b, m), bank.for_feature(m), bank.levels);
      double* dst = out.data.data() + (b * window.features + m) * window.length * planes;
      for (std::size_t t = 0; t < window.length; ++t) {
        for (std::size_t s = 0; s < bank.levels; ++s) {
          dst[t * planes + s] = coeffs.detail[s][t];
        }
        dst[t * planes + bank.levels] = coeffs.approx[t];
      }
    }
  }
  return out;
}

}  // namespace fts
