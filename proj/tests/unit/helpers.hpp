#pragma once

#include <catch2/catch_amalgamated.hpp>
#include <unistd.h>

#include <filesystem>
#include <random>
#include <string>

#include "semiconj/semiconj.hpp"

// Asserts that the expression fails with the given error code.
#define REQUIRE_FAILS_WITH(expr, code_)                      \
  do {                                                       \
    try {                                                    \
      (void)(expr);                                          \
      FAIL("expected failure with " #code_);                 \
    } catch (const semiconj::Error& caught_) {               \
      REQUIRE(caught_.code() == (code_));                    \
    }                                                        \
  } while (0)

namespace testutil {

/// Random unimodular matrix: a seeded product of elementary row operations
/// E_ij(k), each of determinant exactly 1.
inline semiconj::IntMatrix random_unimodular(int n, std::uint32_t seed, int factors = 10) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::uniform_int_distribution<int> amount(-2, 2);
  semiconj::IntMatrix m = semiconj::IntMatrix::identity(n);
  for (int f = 0; f < factors; ++f) {
    int i = pick(rng), j = pick(rng);
    if (i == j) continue;
    semiconj::IntMatrix e = semiconj::IntMatrix::identity(n);
    e(i, j) = amount(rng);
    m = m * e;
  }
  return m;
}

/// Fresh scratch directory under the system temp root.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("semiconj_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
