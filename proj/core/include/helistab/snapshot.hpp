#pragma once

#include <filesystem>
#include <iosfwd>

#include "helistab/operators.hpp"
#include "helistab/spectral_field.hpp"

namespace helistab {

// HSF1: "HSF1", n1, n2, ny (u64 LE), delta (f64 LE), rank (u64 LE), then
// components in order, each row-major over FFT indices (k1, k2, m), as
// interleaved real/imag f64 LE.
void write_snapshot(std::ostream& os, const SpectralField& f);
SpectralField read_snapshot(std::istream& is);
void write_snapshot(const std::filesystem::path& p, const SpectralField& f);
SpectralField read_snapshot(const std::filesystem::path& p);

// HSM1: "HSM1", rows, cols, metric (0 euclidean, 1 star) as u64 LE, entries
// row-major as interleaved f64, then the Gram diagonal (rows f64).
void write_matrix(std::ostream& os, const OperatorMatrix& A);
OperatorMatrix read_matrix(std::istream& is);
void write_matrix(const std::filesystem::path& p, const OperatorMatrix& A);
OperatorMatrix read_matrix(const std::filesystem::path& p);

}  // namespace helistab
