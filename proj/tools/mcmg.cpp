// SPDX-License-Identifier: Apache-2.0

#include "mcmg/cli/cli.hpp"

int main(int argc, char** argv) { return mcmg::cli::run(argc, argv); }
