#include "gail/qmc_points.hpp"

#include <bit>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef GAIL_DEFAULT_DATA_DIR
#define GAIL_DEFAULT_DATA_DIR "data"
#endif

namespace gail {

namespace {

const char* kSobolFile = "sobol_joe_kuo_6_1111.txt";
const char* kLatticeFile = "lattice_kuo_33002_250.txt";

struct Table {
  std::vector<std::string> header;
  std::string body;
};

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open data file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string all = ss.str();
  Table t;
  std::size_t pos = 0;
  while (pos < all.size() && all[pos] == '#') {
    std::size_t eol = all.find('\n', pos);
    if (eol == std::string::npos) eol = all.size();
    t.header.push_back(all.substr(pos, eol - pos));
    pos = eol + 1;
  }
  t.body = pos < all.size() ? all.substr(pos) : std::string();

  std::string expected;
  std::size_t dims = 0;
  for (const auto& h : t.header) {
    std::istringstream hs(h);
    std::string hash, key;
    hs >> hash >> key;
    if (key == "fnv1a64") hs >> expected;
    if (key == "dimensions") hs >> dims;
  }
  if (expected.empty()) throw ConfigError(path + ": missing checksum header");
  std::ostringstream got;
  got << std::hex;
  got.width(16);
  got.fill('0');
  got << fnv1a64(t.body);
  if (got.str() != expected)
    throw ConfigError(path + ": checksum mismatch (expected " + expected + ", got " + got.str() + ")");
  return t;
}

std::size_t declared_dims(const Table& t) {
  for (const auto& h : t.header) {
    std::istringstream hs(h);
    std::string hash, key;
    std::size_t d = 0;
    hs >> hash >> key;
    if (key == "dimensions" && (hs >> d)) return d;
  }
  return 0;
}

std::string join_path(const std::string& dir, const char* file) {
  if (dir.empty() || dir.back() == '/') return dir + file;
  return dir + "/" + file;
}

}  // namespace

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string data_dir() {
  if (const char* env = std::getenv("GAILRS_DATA_DIR"); env && *env) return env;
  return GAIL_DEFAULT_DATA_DIR;
}

std::vector<DirectionRow> load_direction_table(const std::string& path) {
  Table t = read_table(path);
  std::vector<DirectionRow> rows;
  std::istringstream body(t.body);
  std::string line;
  Index expect = 2;
  while (std::getline(body, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Index d;
    DirectionRow r;
    if (!(ls >> d >> r.s >> r.a) || d != expect || r.s < 1 || r.s > 31)
      throw ConfigError(path + ": malformed row for dimension " + std::to_string(expect));
    r.m.resize(static_cast<std::size_t>(r.s));
    for (auto& mi : r.m)
      if (!(ls >> mi)) throw ConfigError(path + ": short row for dimension " + std::to_string(d));
    for (int k = 0; k < r.s; ++k)
      if (r.m[static_cast<std::size_t>(k)] % 2 == 0 || r.m[static_cast<std::size_t>(k)] >> (k + 1))
        throw ConfigError(path + ": invalid initial number in dimension " + std::to_string(d));
    rows.push_back(std::move(r));
    ++expect;
  }
  const std::size_t covered = rows.size() + 1;
  if (covered < static_cast<std::size_t>(kSobolMaxDim) || declared_dims(t) != covered)
    throw ConfigError(path + ": direction numbers cover only " + std::to_string(covered) + " dimensions");
  return rows;
}

std::vector<std::uint32_t> load_lattice_vector(const std::string& path) {
  Table t = read_table(path);
  std::vector<std::uint32_t> z;
  std::istringstream body(t.body);
  std::uint64_t v;
  while (body >> v) {
    if (v % 2 == 0 || v >= (std::uint64_t{1} << 32))
      throw ConfigError(path + ": generating vector entries must be odd 32-bit integers");
    z.push_back(static_cast<std::uint32_t>(v));
  }
  if (z.size() < static_cast<std::size_t>(kLatticeMaxDim) || declared_dims(t) != z.size())
    throw ConfigError(path + ": generating vector covers only " + std::to_string(z.size()) + " dimensions");
  return z;
}

const std::vector<DirectionRow>& sobol_direction_table() {
  static const std::vector<DirectionRow> rows = load_direction_table(join_path(data_dir(), kSobolFile));
  return rows;
}

const std::vector<std::uint32_t>& lattice_generating_vector() {
  static const std::vector<std::uint32_t> z = load_lattice_vector(join_path(data_dir(), kLatticeFile));
  return z;
}

SobolGenerator::SobolGenerator(Index dim) : dim_(dim) {
  if (dim < 1 || dim > kSobolMaxDim)
    throw ConfigError("Sobol' dimension must lie in 1..1111, got " + std::to_string(dim));
  v_.resize(static_cast<std::size_t>(dim));
  for (int b = 1; b <= kSobolMaxM; ++b) v_[0][b - 1] = std::uint64_t{1} << (kSobolMaxM - b);
  if (dim > 1) {
    const auto& table = sobol_direction_table();
    for (Index j = 1; j < dim; ++j) {
      const DirectionRow& r = table[static_cast<std::size_t>(j - 1)];
      std::array<std::uint64_t, kSobolMaxM> m{};
      for (int b = 0; b < kSobolMaxM; ++b) {
        if (b < r.s) {
          m[b] = r.m[static_cast<std::size_t>(b)];
          continue;
        }
        std::uint64_t x = m[b - r.s] ^ (m[b - r.s] << r.s);
        for (int k = 1; k < r.s; ++k)
          if ((r.a >> (r.s - 1 - k)) & 1u) x ^= m[b - k] << k;
        m[b] = x;
      }
      for (int b = 0; b < kSobolMaxM; ++b) v_[static_cast<std::size_t>(j)][b] = m[b] << (kSobolMaxM - 1 - b);
    }
  }
  shift_.assign(static_cast<std::size_t>(dim), 0);
}

SobolGenerator::SobolGenerator(Index dim, const RngStream& rng) : SobolGenerator(dim) {
  auto eng = rng.engine();
  constexpr std::uint64_t kMask = (std::uint64_t{1} << kSobolMaxM) - 1;
  for (auto& col : v_) {
    // random unit lower-triangular digit matrix; row i produces output digit i
    std::array<std::uint64_t, kSobolMaxM> rows{};
    for (int i = 0; i < kSobolMaxM; ++i) {
      const std::uint64_t diag = std::uint64_t{1} << (kSobolMaxM - 1 - i);
      rows[i] = diag | ((eng() >> 11) & kMask & ~((diag << 1) - 1));
    }
    for (auto& v : col) {
      std::uint64_t out = 0;
      for (int i = 0; i < kSobolMaxM; ++i)
        if (std::popcount(rows[i] & v) & 1) out |= std::uint64_t{1} << (kSobolMaxM - 1 - i);
      v = out;
    }
  }
  for (auto& s : shift_) s = eng() >> 11;
}

Eigen::MatrixXd SobolGenerator::points(std::uint64_t first, Index count) const {
  Eigen::MatrixXd out(count, dim_);
  if (count == 0) return out;
  std::vector<std::uint64_t> x(static_cast<std::size_t>(dim_), 0);
  const std::uint64_t g = natural_index(first);
  for (Index j = 0; j < dim_; ++j)
    for (int b = 0; b < kSobolMaxM; ++b)
      if ((g >> b) & 1u) x[static_cast<std::size_t>(j)] ^= v_[static_cast<std::size_t>(j)][b];
  for (Index i = 0;; ++i) {
    for (Index j = 0; j < dim_; ++j)
      out(i, j) = static_cast<double>(x[static_cast<std::size_t>(j)] ^ shift_[static_cast<std::size_t>(j)]) *
                  0x1.0p-53;
    if (i + 1 == count) break;
    const int c = std::countr_zero(first + static_cast<std::uint64_t>(i) + 1);
    for (Index j = 0; j < dim_; ++j) x[static_cast<std::size_t>(j)] ^= v_[static_cast<std::size_t>(j)][c];
  }
  return out;
}

LatticeGenerator::LatticeGenerator(Index dim) {
  if (dim < 1 || dim > kLatticeMaxDim)
    throw ConfigError("lattice dimension must lie in 1..250, got " + std::to_string(dim));
  const auto& z = lattice_generating_vector();
  z_.assign(z.begin(), z.begin() + dim);
  shift_ = Eigen::VectorXd::Zero(dim);
}

LatticeGenerator::LatticeGenerator(Index dim, const RngStream& rng) : LatticeGenerator(dim) {
  auto eng = rng.engine();
  for (Index j = 0; j < dim; ++j) shift_[j] = to_unit(eng());
}

LatticeGenerator::LatticeGenerator(std::vector<std::uint32_t> z, Eigen::VectorXd shift)
    : z_(std::move(z)), shift_(std::move(shift)) {
  if (z_.empty() || static_cast<Index>(z_.size()) != shift_.size())
    throw ConfigError("generating vector and shift must have the same positive length");
}

namespace {
std::uint32_t reverse32(std::uint32_t x) {
  x = ((x >> 1) & 0x55555555u) | ((x & 0x55555555u) << 1);
  x = ((x >> 2) & 0x33333333u) | ((x & 0x33333333u) << 2);
  x = ((x >> 4) & 0x0F0F0F0Fu) | ((x & 0x0F0F0F0Fu) << 4);
  x = ((x >> 8) & 0x00FF00FFu) | ((x & 0x00FF00FFu) << 8);
  return (x >> 16) | (x << 16);
}
}  // namespace

Eigen::MatrixXd LatticeGenerator::points(std::uint64_t first, Index count) const {
  const Index d = dim();
  if (first + static_cast<std::uint64_t>(count) > (std::uint64_t{1} << 32))
    throw ConfigError("lattice index beyond 2^32");
  Eigen::MatrixXd out(count, d);
  for (Index i = 0; i < count; ++i) {
    const std::uint32_t r = reverse32(static_cast<std::uint32_t>(first + static_cast<std::uint64_t>(i)));
    for (Index j = 0; j < d; ++j) {
      const std::uint32_t k = r * z_[static_cast<std::size_t>(j)];  // mod 2^32
      double x = static_cast<double>(k) * 0x1.0p-32 + shift_[j];
      if (x >= 1) x -= 1;
      out(i, j) = x;
    }
  }
  return out;
}

Eigen::MatrixXd sobol_block(const SobolGenerator& gen, int m_lo, int m_hi) {
  if (m_lo < 0 || m_lo >= m_hi || m_hi > kSobolMaxM) throw ConfigError("Sobol' block requires 0 <= m_lo < m_hi <= 53");
  const std::uint64_t lo = std::uint64_t{1} << m_lo;
  const std::uint64_t hi = std::uint64_t{1} << m_hi;
  return gen.points(lo, static_cast<Index>(hi - lo));
}

Eigen::MatrixXd lattice_block(const LatticeGenerator& gen, int m_lo, int m_hi) {
  if (m_lo < 0 || m_lo >= m_hi || m_hi > kLatticeMaxM)
    throw ConfigError("lattice block requires 0 <= m_lo < m_hi <= 26");
  const std::uint64_t lo = std::uint64_t{1} << m_lo;
  const std::uint64_t hi = std::uint64_t{1} << m_hi;
  return gen.points(lo, static_cast<Index>(hi - lo));
}

const char* to_string(Periodizer p) {
  switch (p) {
    case Periodizer::Id: return "id";
    case Periodizer::Baker: return "Baker";
    case Periodizer::C0: return "C0";
    case Periodizer::C1: return "C1";
    case Periodizer::C1sin: return "C1sin";
  }
  return "unknown";
}

Periodizer periodizer_from_string(const std::string& s) {
  if (s == "id") return Periodizer::Id;
  if (s == "Baker" || s == "baker") return Periodizer::Baker;
  if (s == "C0" || s == "c0") return Periodizer::C0;
  if (s == "C1" || s == "c1") return Periodizer::C1;
  if (s == "C1sin" || s == "c1sin") return Periodizer::C1sin;
  throw ConfigError("transform must be one of id, Baker, C0, C1, C1sin; got '" + s + "'");
}

Eigen::VectorXd periodize_points(Eigen::MatrixXd& x, Periodizer p) {
  Eigen::VectorXd w = Eigen::VectorXd::Ones(x.rows());
  if (p == Periodizer::Id) return w;
  for (Index j = 0; j < x.cols(); ++j)
    for (Index i = 0; i < x.rows(); ++i) {
      w[i] *= periodizer_weight(p, x(i, j));
      x(i, j) = periodizer_map(p, x(i, j));
    }
  return w;
}

PointFunction periodize(PointFunction f, Periodizer p) {
  return [f = std::move(f), p](const Eigen::MatrixXd& x) {
    Eigen::MatrixXd y = x;
    Eigen::VectorXd w = periodize_points(y, p);
    return Eigen::VectorXd(f(y).cwiseProduct(w));
  };
}

}  // namespace gail
