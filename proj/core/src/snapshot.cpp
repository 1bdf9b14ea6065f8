#include "helistab/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "helistab/error.hpp"

namespace helistab {

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  std::array<char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  os.write(b.data(), 8);
}

void put_f64(std::ostream& os, double v) { put_u64(os, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& is) {
  std::array<unsigned char, 8> b{};
  is.read(reinterpret_cast<char*>(b.data()), 8);
  if (!is) throw std::runtime_error("snapshot: truncated input");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

void expect_magic(std::istream& is, const char* magic) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0)
    throw std::runtime_error(std::string("snapshot: bad magic, expected ") + magic);
}

}  // namespace

void write_snapshot(std::ostream& os, const SpectralField& f) {
  const TorusGrid& g = f.grid();
  os.write("HSF1", 4);
  put_u64(os, g.n1());
  put_u64(os, g.n2());
  put_u64(os, g.ny());
  put_f64(os, g.delta());
  put_u64(os, f.components());
  for (const Complex& v : f.data()) {
    put_f64(os, v.real());
    put_f64(os, v.imag());
  }
  if (!os) throw std::runtime_error("snapshot: write failed");
}

SpectralField read_snapshot(std::istream& is) {
  expect_magic(is, "HSF1");
  const auto n1 = get_u64(is), n2 = get_u64(is), ny = get_u64(is);
  const double delta = get_f64(is);
  const auto rank = get_u64(is);
  if (rank != 1 && rank != 3) throw std::runtime_error("snapshot: rank must be 1 or 3");
  SpectralField f(TorusGrid(n1, n2, ny, delta), static_cast<Rank>(rank));
  for (Complex& v : f.data()) {
    const double re = get_f64(is);
    v = Complex(re, get_f64(is));
  }
  return f;
}

void write_matrix(std::ostream& os, const OperatorMatrix& A) {
  os.write("HSM1", 4);
  put_u64(os, A.entries.rows());
  put_u64(os, A.entries.cols());
  put_u64(os, A.metric == Metric::star ? 1 : 0);
  for (Eigen::Index i = 0; i < A.entries.rows(); ++i)
    for (Eigen::Index j = 0; j < A.entries.cols(); ++j) {
      put_f64(os, A.entries(i, j).real());
      put_f64(os, A.entries(i, j).imag());
    }
  for (Eigen::Index i = 0; i < A.entries.rows(); ++i) put_f64(os, A.gram(i));
  if (!os) throw std::runtime_error("matrix: write failed");
}

OperatorMatrix read_matrix(std::istream& is) {
  expect_magic(is, "HSM1");
  const auto rows = static_cast<Eigen::Index>(get_u64(is));
  const auto cols = static_cast<Eigen::Index>(get_u64(is));
  const auto metric = get_u64(is);
  if (rows != cols || rows % 2 == 0) throw std::runtime_error("matrix: expected odd square size");
  OperatorMatrix A;
  A.trunc = static_cast<int>((rows - 1) / 2);
  A.metric = metric == 1 ? Metric::star : Metric::euclidean;
  A.entries.resize(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) {
      const double re = get_f64(is);
      A.entries(i, j) = Complex(re, get_f64(is));
    }
  A.gram.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) A.gram(i) = get_f64(is);
  return A;
}

void write_snapshot(const std::filesystem::path& p, const SpectralField& f) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("snapshot: cannot open " + p.string());
  write_snapshot(os, f);
}

SpectralField read_snapshot(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("snapshot: cannot open " + p.string());
  return read_snapshot(is);
}

void write_matrix(const std::filesystem::path& p, const OperatorMatrix& A) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("matrix: cannot open " + p.string());
  write_matrix(os, A);
}

OperatorMatrix read_matrix(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("matrix: cannot open " + p.string());
  return read_matrix(is);
}

}  // namespace helistab
