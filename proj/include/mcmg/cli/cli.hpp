// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace mcmg::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumericError = 3 };

// Entry point of the mcmg executable.
int run(int argc, const char* const* argv);

}  // namespace mcmg::cli
