#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace specmt {

/// Machine-readable error categories shared by every module. The CLI maps
/// these to exit codes and the campaign service to JSON error codes.
enum class Errc {
  parse,
  encoding,
  empty_input,
  invalid_argument,
  not_found,
  duplicate,
  out_of_range,
  mode_mismatch,
  precondition,
  indeterminate,
  timeout,
  http_status,
  transport,
  empty_response,
  io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Parse failure with the 1-based line and the field/section being read.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string field, const std::string& message)
      : Error(Errc::parse, "line " + std::to_string(line) +
                               (field.empty() ? "" : " [" + field + "]") +
                               ": " + message),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace specmt
