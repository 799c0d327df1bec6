#pragma once

#include <cstdint>

namespace semiconj {

/// Eigenvalue moduli within this band of 1 are treated as unit (neutral).
inline constexpr double kTolUnit = 1e-9;

/// Radius used to merge nearby computed eigenvalues into one cluster when
/// reporting multiplicities.
inline constexpr double kClusterRadius = 1e-8;

/// Singular values below this relative threshold are treated as zero when
/// measuring numerical rank of stacked subspace bases.
inline constexpr double kRankTol = 1e-8;

/// Default residual tolerance for the certified series tail.
inline constexpr double kTolTail = 1e-8;

/// Hard cap on the number of series terms.
inline constexpr int kMaxN = 200;

/// Default reduced-word length for the word set used in assembly.
inline constexpr int kWordLen = 4;

/// Default tolerance and iteration cap for inverting a perturbed torus map at
/// a point.
inline constexpr double kInvertTol = 1e-12;
inline constexpr int kInvertMaxIter = 200;

/// Accuracy assumed for point inversion when charging it to the error budget.
inline constexpr double kTolInv = 1e-8;

/// Entries of the induced map on H_1 must sit within this distance of an
/// integer.
inline constexpr double kH1IntegerTol = 1e-6;

/// Default seed for randomized spot checks.
inline constexpr std::uint64_t kSeed = 0x5EED;

/// Default per-axis grid resolution by torus dimension.
inline constexpr int default_resolution(int n) {
  if (n <= 2) return 256;
  if (n == 3) return 64;
  if (n == 4) return 24;
  if (n == 5) return 12;
  return 8;
}

}  // namespace semiconj
