#include "specmt/error.hpp"

namespace specmt {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::parse: return "parse_error";
    case Errc::encoding: return "invalid_encoding";
    case Errc::empty_input: return "empty_input";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::not_found: return "not_found";
    case Errc::duplicate: return "duplicate";
    case Errc::out_of_range: return "out_of_range";
    case Errc::mode_mismatch: return "mode_mismatch";
    case Errc::precondition: return "precondition_failed";
    case Errc::indeterminate: return "indeterminate";
    case Errc::timeout: return "timeout";
    case Errc::http_status: return "http_status";
    case Errc::transport: return "transport_error";
    case Errc::empty_response: return "empty_response";
    case Errc::io: return "io_error";
  }
  return "unknown";
}

}  // namespace specmt
