#pragma once

#include <ostream>

#include "specmt/error.hpp"

namespace specmt::cli {

/// Exit status per error category. 0 is success, 1 an unexpected failure,
/// 2 a usage error.
int exit_code_for(Errc code);

/// Runs one subcommand: ingest, prompt, translate, score, ranks, agree,
/// syntax, report, serve or export.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace specmt::cli
