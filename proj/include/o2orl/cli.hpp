#pragma once

#include <string>
#include <vector>

namespace o2orl {

// Command-line entry point. Subcommands: gen-data, pretrain, finetune,
// evaluate, sweep. Each reads an optional --config=FILE of key = value lines
// and accepts --key=value overrides for any key. Exit codes: 0 success,
// 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace o2orl
