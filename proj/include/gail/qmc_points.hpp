#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gail/core.hpp"

namespace gail {

constexpr Index kSobolMaxDim = 1111;
constexpr int kSobolMaxM = 53;
constexpr Index kLatticeMaxDim = 250;
constexpr int kLatticeMaxM = 26;

/// Directory holding the bundled tables; GAILRS_DATA_DIR overrides the
/// compiled-in default.
std::string data_dir();

/// One row per dimension: degree s, coefficient word a, initial m_1..m_s.
struct DirectionRow {
  int s = 0;
  std::uint32_t a = 0;
  std::vector<std::uint32_t> m;
};

/// Loaders; throw ConfigError on a checksum mismatch, malformed row, or a
/// table that does not cover the required dimensions.
std::vector<DirectionRow> load_direction_table(const std::string& path);
std::vector<std::uint32_t> load_lattice_vector(const std::string& path);

/// Cached tables from data_dir() (direction numbers cover dimensions 2..1111).
const std::vector<DirectionRow>& sobol_direction_table();
const std::vector<std::uint32_t>& lattice_generating_vector();

/// FNV-1a 64-bit hash, used to verify the data tables.
std::uint64_t fnv1a64(const std::string& bytes);

class SobolGenerator {
 public:
  /// Unshifted generator.
  explicit SobolGenerator(Index dim);
  /// Randomized generator: random linear digit scramble of every direction
  /// column followed by a digital shift, both drawn from `rng`.
  SobolGenerator(Index dim, const RngStream& rng);

  Index dim() const { return dim_; }
  const std::vector<std::uint64_t>& shift() const { return shift_; }

  /// Points with Gray-code sequence positions [first, first + count).
  Eigen::MatrixXd points(std::uint64_t first, Index count) const;
  /// Natural sequence index of the point at Gray-code position i.
  static std::uint64_t natural_index(std::uint64_t i) { return i ^ (i >> 1); }

 private:
  Index dim_;
  // dim_ x 53 direction integers scaled to 53 bits
  std::vector<std::array<std::uint64_t, kSobolMaxM>> v_;
  std::vector<std::uint64_t> shift_;
};

class LatticeGenerator {
 public:
  explicit LatticeGenerator(Index dim);
  LatticeGenerator(Index dim, const RngStream& rng);
  /// Explicit generating vector and shift (used by tests).
  LatticeGenerator(std::vector<std::uint32_t> z, Eigen::VectorXd shift);

  Index dim() const { return static_cast<Index>(z_.size()); }
  const std::vector<std::uint32_t>& generating_vector() const { return z_; }
  const Eigen::VectorXd& shift() const { return shift_; }

  /// Points at radical-inverse positions [first, first + count).
  Eigen::MatrixXd points(std::uint64_t first, Index count) const;

 private:
  std::vector<std::uint32_t> z_;
  Eigen::VectorXd shift_;
};

/// Points for indices [2^m_lo, 2^m_hi).
Eigen::MatrixXd sobol_block(const SobolGenerator& gen, int m_lo, int m_hi);
Eigen::MatrixXd lattice_block(const LatticeGenerator& gen, int m_lo, int m_hi);

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// Unnormalized fast Walsh-Hadamard transform; applying it twice scales by n.
template <class Derived>
void fwht_inplace(Eigen::MatrixBase<Derived>& v) {
  const Index n = v.size();
  if (!is_power_of_two(n)) throw ConfigError("FWHT length must be a power of two");
  for (Index h = 1; h < n; h *= 2)
    for (Index i = 0; i < n; i += 2 * h)
      for (Index j = i; j < i + h; ++j) {
        auto a = v(j);
        auto b = v(j + h);
        v(j) = a + b;
        v(j + h) = a - b;
      }
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fwht(Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v) {
  fwht_inplace(v);
  return v;
}

/// Radix-2 DFT, X_k = sum_j x_j exp(-2 pi i jk/n); `inverse` uses the
/// conjugate kernel and divides by n.
template <class Scalar>
void fft_inplace(Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>& v, bool inverse = false) {
  using C = std::complex<Scalar>;
  const Index n = v.size();
  if (!is_power_of_two(n)) throw ConfigError("FFT length must be a power of two");
  for (Index i = 1, j = 0; i < n; ++i) {
    Index bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(v(i), v(j));
  }
  const Scalar pi = Scalar(3.141592653589793238462643383279502884L);
  for (Index len = 2; len <= n; len *= 2) {
    const Scalar ang = (inverse ? 2 : -2) * pi / static_cast<Scalar>(len);
    for (Index k = 0; k < len / 2; ++k) {
      const C w(std::cos(ang * static_cast<Scalar>(k)), std::sin(ang * static_cast<Scalar>(k)));
      for (Index i = 0; i < n; i += len) {
        C a = v(i + k);
        C b = v(i + k + len / 2) * w;
        v(i + k) = a + b;
        v(i + k + len / 2) = a - b;
      }
    }
  }
  if (inverse) v /= static_cast<Scalar>(n);
}

template <class Scalar>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> fft(
    Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1> v, bool inverse = false) {
  fft_inplace(v, inverse);
  return v;
}

enum class Periodizer { Id, Baker, C0, C1, C1sin };

const char* to_string(Periodizer p);
Periodizer periodizer_from_string(const std::string& s);

/// Coordinate map of a periodizer on [0,1].
template <class Scalar>
Scalar periodizer_map(Periodizer p, Scalar x) {
  using std::abs;
  using std::sin;
  const Scalar two_pi = Scalar(6.283185307179586476925286766559005768L);
  switch (p) {
    case Periodizer::Id: return x;
    case Periodizer::Baker: return 1 - abs(2 * x - 1);
    case Periodizer::C0: return x * x * (3 - 2 * x);
    case Periodizer::C1: return x * x * x * (10 - 15 * x + 6 * x * x);
    case Periodizer::C1sin: return x - sin(two_pi * x) / two_pi;
  }
  return x;
}

/// Jacobian factor of the coordinate map.
template <class Scalar>
Scalar periodizer_weight(Periodizer p, Scalar x) {
  using std::cos;
  const Scalar two_pi = Scalar(6.283185307179586476925286766559005768L);
  switch (p) {
    case Periodizer::Id:
    case Periodizer::Baker: return Scalar(1);
    case Periodizer::C0: return 6 * x * (1 - x);
    case Periodizer::C1: return 30 * x * x * (1 - x) * (1 - x);
    case Periodizer::C1sin: return 1 - cos(two_pi * x);
  }
  return Scalar(1);
}

/// Applies the coordinate map in place and returns the row weights.
Eigen::VectorXd periodize_points(Eigen::MatrixXd& x, Periodizer p);

using PointFunction = std::function<Eigen::VectorXd(const Eigen::MatrixXd& x)>;

/// g(x) = f(psi(x)) * prod_j w(x_j); same integral over the unit cube.
PointFunction periodize(PointFunction f, Periodizer p);

}  // namespace gail
