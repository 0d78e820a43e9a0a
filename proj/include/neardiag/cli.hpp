#pragma once

#include <string>
#include <vector>

namespace neardiag {

/// Batch front-end. Subcommands: eigen, decouple, check, simulate, probe.
/// Exit codes: 0 success/consensus, 1 usage error, 2 computation error,
/// 3 no_consensus, 4 inconclusive.
int run_cli(const std::vector<std::string>& args);

}  // namespace neardiag
