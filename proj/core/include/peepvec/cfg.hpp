// Copyright 2026 The peepvec Authors. All Rights Reserved.
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

#ifndef PEEPVEC_CFG_HPP
#define PEEPVEC_CFG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "peepvec/ir.hpp"

namespace peepvec {

enum class CfgIssue {
  kMissingEntry,
  kDuplicateBlockId,
  kNonDenseBlockId,
  kDanglingSuccessor,
  kDuplicateTmp,
};

// "missing-entry", "dangling-successor", ...
const char* issue_name(CfgIssue issue);

struct Diagnostic {
  CfgIssue issue;
  std::uint32_t block = 0;  // offending block id (entry id for kMissingEntry)
  std::string message;
};

// One diagnostic per violated IrFunction / BasicBlock invariant; empty iff
// the function is well formed.
std::vector<Diagnostic> validate_cfg(const IrFunction& f);

// Number of CFG edges (successor list entries).
std::size_t edge_count(const IrFunction& f);

}  // namespace peepvec

#endif  // PEEPVEC_CFG_HPP
