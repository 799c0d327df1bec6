#pragma once

#include <stdexcept>
#include <string>

namespace semiconj {

/// Failure categories surfaced by the library. The CLI maps these onto
/// process exit codes (see tools/).
enum class errc {
  bad_argument,
  parse_error,
  io_error,
  not_unimodular,
  word_overflow,
  eigen_failed,
  tail_not_summable,
  budget_exceeded,
  insufficient_span,
  invert_diverged,
  sample_not_finite,
  conjugator_not_certified,
  not_integer,
  not_constant,
  not_certified,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::bad_argument: return "BAD_ARGUMENT";
    case errc::parse_error: return "PARSE_ERROR";
    case errc::io_error: return "IO_ERROR";
    case errc::not_unimodular: return "NOT_UNIMODULAR";
    case errc::word_overflow: return "WORD_OVERFLOW";
    case errc::eigen_failed: return "EIGEN_FAILED";
    case errc::tail_not_summable: return "TAIL_NOT_SUMMABLE";
    case errc::budget_exceeded: return "BUDGET_EXCEEDED";
    case errc::insufficient_span: return "INSUFFICIENT_SPAN";
    case errc::invert_diverged: return "INVERT_DIVERGED";
    case errc::sample_not_finite: return "SAMPLE_NOT_FINITE";
    case errc::conjugator_not_certified: return "CONJUGATOR_NOT_CERTIFIED";
    case errc::not_integer: return "NOT_INTEGER";
    case errc::not_constant: return "NOT_CONSTANT";
    case errc::not_certified: return "NOT_CERTIFIED";
  }
  return "UNKNOWN";
}

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw Error(code, what); }

}  // namespace semiconj
