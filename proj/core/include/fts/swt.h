#pragma once

// Learnable stationary (undecimated, a trous) wavelet transform.
//
// Indexing is correlation, matching the forward index of the recurrence
//   c[s+1](t) = sum_i h[i] * c[s](t + i * 2^s)
//   d[s+1](t) = sum_i g[i] * c[s](t + i * 2^s)
// with c[0] = x. Samples past the right edge read as zero (default) or wrap
// around (periodic, used to test the shift and energy identities).
//
// For an orthonormal quadrature-mirror pair the undecimated analysis operator
// A = [H; G] at every dilation satisfies A^T A = 2 I on periodic signals, so
// each level is inverted by c[s] = (H_s^T c[s+1] + G_s^T d[s+1]) / 2. With
// zero padding this is exact away from the edges.

#include <cstddef>
#include <span>
#include <vector>

#include "fts/panel.h"

namespace fts {

enum class WaveletBasis { haar, db4 };
enum class Boundary { zero, periodic };

struct FilterPair {
  std::vector<double> h;  // low-pass
  std::vector<double> g;  // high-pass

  std::size_t taps() const { return h.size(); }
};

/// Orthonormal taps; g[n] = (-1)^n h[k-1-n]. Haar needs k = 2, db4 k = 8.
FilterPair init_filters(WaveletBasis basis, std::size_t taps);
WaveletBasis parse_basis(std::string_view name);

/// Inserts 2^level - 1 zeros between consecutive taps.
std::vector<double> upsample_filter(std::span<const double> taps,
                                    std::size_t level);

/// Largest S with dilated filter length 1 + (k-1) * 2^(S-1) <= L.
std::size_t max_levels(std::size_t length, std::size_t taps);

struct SwtCoefficients {
  std::size_t length = 0;
  std::vector<std::vector<double>> detail;  // S levels, each of `length`
  std::vector<double> approx;               // c[S]

  std::size_t levels() const { return detail.size(); }
  std::size_t count() const { return length * (levels() + 1); }
  /// Zero-filled coefficients with the given shape.
  static SwtCoefficients zeros(std::size_t length, std::size_t levels);
};

SwtCoefficients swt_forward(std::span<const double> x, const FilterPair& filters,
                            std::size_t levels,
                            Boundary boundary = Boundary::zero);

std::vector<double> swt_inverse(const SwtCoefficients& coeffs,
                                const FilterPair& filters,
                                Boundary boundary = Boundary::zero);

/// Transpose of the forward map applied to `upstream`.
std::vector<double> swt_adjoint(const SwtCoefficients& upstream,
                                const FilterPair& filters,
                                Boundary boundary = Boundary::zero);

struct SwtGradients {
  std::vector<double> grad_x;
  std::vector<double> grad_h;
  std::vector<double> grad_g;
};

/// Gradients of <upstream, swt_forward(x)> with respect to x, h and g.
SwtGradients swt_backward(std::span<const double> x, const FilterPair& filters,
                          std::size_t levels, const SwtCoefficients& upstream,
                          Boundary boundary = Boundary::zero);

/// One filter pair per feature, or a single pair shared by all features.
struct FilterBank {
  std::vector<FilterPair> pairs;
  std::size_t levels = 3;
  bool shared = false;

  static FilterBank make(WaveletBasis basis, std::size_t taps,
                         std::size_t levels, std::size_t features, bool shared);
  const FilterPair& for_feature(std::size_t feature) const {
    return shared ? pairs.front() : pairs.at(feature);
  }
  FilterPair& for_feature(std::size_t feature) {
    return shared ? pairs.front() : pairs.at(feature);
  }
  std::size_t taps() const { return pairs.empty() ? 0 : pairs.front().taps(); }
};

/// B x M x L x (S+1), level axis ordered [d1, ..., dS, cS].
struct Array4 {
  std::size_t stocks = 0;
  std::size_t features = 0;
  std::size_t length = 0;
  std::size_t planes = 0;
  std::vector<double> data;

  double at(std::size_t b, std::size_t m, std::size_t t, std::size_t s) const {
    return data[((b * features + m) * length + t) * planes + s];
  }
};

Array4 tokenize_window(const Array3& window, const FilterBank& bank);

}  // namespace fts
