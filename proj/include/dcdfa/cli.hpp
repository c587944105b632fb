// Copyright 2026 The DCDFA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DCDFA_CLI_HPP_
#define DCDFA_CLI_HPP_

#include <iostream>

namespace dcdfa {

/// Entry point of the dcdfa command-line tool. Subcommands: gen-data,
/// pretrain, adapt, eval, gradcheck, ablate, selftest. Returns the process
/// exit code; usage problems and failed checks are nonzero.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace dcdfa

#endif  // DCDFA_CLI_HPP_
