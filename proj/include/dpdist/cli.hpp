#pragma once

namespace dpdist::cli {

/// Entry point of the command-line tool. Returns 0 on success, 1 on a usage
/// error, 2 on a data or format error and 3 on a numeric failure.
int run(int argc, char** argv);

}  // namespace dpdist::cli
