#pragma once

// Slow, direct reference computations used as test oracles. Nothing here
// calls into the library's numerical code; only the Matrix container is shared.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "sonoclass/matrix.hpp"

namespace oracle {

using sonoclass::ComplexMatrix;
using sonoclass::RealMatrix;

// X[k] = sum_n x[n] exp(-i 2 pi k n / N), all N bins.
std::vector<std::complex<double>> direct_dft(std::span<const double> x);

// 2-D DFT by the double sum; inverse includes the 1/(R C) factor.
ComplexMatrix direct_dft2(const ComplexMatrix& x, bool inverse);

// |x (*) h| with h the inverse DFT of the real frequency mask, by a direct
// circular convolution in the spatial domain.
RealMatrix circular_filter_magnitude(const RealMatrix& x, const RealMatrix& mask);

// Undecimated Haar detail plane for 1-based scale j and orientation k
// (0 horizontal, 1 vertical, 2 diagonal) by the explicit double sum over
// every input sample against equivalent 1-D filters built on a periodic ring.
RealMatrix haar_detail_double_sum(const RealMatrix& s, int j, int k);

// S2 plane: out(u, v) = sum_k sum_a sum_b map_k(u + a, v + b) * patch_k(a, b).
RealMatrix s2_triple_loop(const std::vector<RealMatrix>& maps, const std::vector<RealMatrix>& patch);

// I(X;Y) in bits straight from a joint count table.
double mi_from_counts(const std::vector<std::vector<double>>& counts);

// Corner-aligned bilinear sample of `in` at output (i, j) of an R x C grid.
double bilinear_at(const RealMatrix& in, std::size_t rows, std::size_t cols, std::size_t i,
                   std::size_t j);

struct QpSolution {
  std::vector<double> alpha;
  double bias = 0.0;
  double objective = 0.0;  // W(alpha) = sum alpha - 1/2 alpha' Q alpha
};

// Soft-margin dual by accelerated projected gradient followed by exact
// active-set refinement (KKT linear solves on the free set).
QpSolution dense_svm_dual(const RealMatrix& kernel, std::span<const int> y, double c);

// Dual objective evaluated directly.
double dual_value(const RealMatrix& kernel, std::span<const int> y, std::span<const double> alpha);

// Vote winner for k classes given pair decision values in (0,1), (0,2), ...
// order: most votes, then largest summed |value| over the class's own pairs,
// then lowest index. Written as a plain enumeration over classes.
int ovo_vote(std::size_t k, std::span<const double> pair_values);

}  // namespace oracle
