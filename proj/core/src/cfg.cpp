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

#include "peepvec/cfg.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace peepvec {

const char* issue_name(CfgIssue issue) {
  switch (issue) {
    case CfgIssue::kMissingEntry: return "missing-entry";
    case CfgIssue::kDuplicateBlockId: return "duplicate-block-id";
    case CfgIssue::kNonDenseBlockId: return "non-dense-block-id";
    case CfgIssue::kDanglingSuccessor: return "dangling-successor";
    case CfgIssue::kDuplicateTmp: return "duplicate-tmp";
  }
  return "unknown";
}

std::vector<Diagnostic> validate_cfg(const IrFunction& f) {
  std::vector<Diagnostic> out;
  std::unordered_map<std::uint32_t, std::size_t> seen;
  for (const auto& b : f.blocks) {
    if (++seen[b.id] == 2) {
      out.push_back({CfgIssue::kDuplicateBlockId, b.id,
                     "block id " + std::to_string(b.id) + " appears more than once"});
    }
  }
  // Ids must be exactly {0, ..., n-1} once duplicates are set aside.
  for (const auto& [id, count] : seen) {
    (void)count;
    if (id >= seen.size()) {
      out.push_back({CfgIssue::kNonDenseBlockId, id,
                     "block id " + std::to_string(id) + " leaves a gap in 0.." +
                         std::to_string(seen.size() - 1)});
    }
  }
  if (seen.count(f.entry) == 0) {
    out.push_back({CfgIssue::kMissingEntry, f.entry,
                   "entry block " + std::to_string(f.entry) + " does not exist"});
  }
  std::unordered_set<std::uint32_t> tmps;
  for (const auto& b : f.blocks) {
    for (std::uint32_t s : b.successors) {
      if (seen.count(s) == 0) {
        out.push_back({CfgIssue::kDanglingSuccessor, b.id,
                       "block " + std::to_string(b.id) + " targets missing block " +
                           std::to_string(s)});
      }
    }
    for (const auto& s : b.statements) {
      auto t = defined_tmp(s);
      if (t && *t != kAbstractId && !tmps.insert(*t).second) {
        out.push_back({CfgIssue::kDuplicateTmp, b.id,
                       "tmp t" + std::to_string(*t) + " assigned more than once"});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return a.issue != b.issue ? a.issue < b.issue : a.block < b.block;
  });
  return out;
}

std::size_t edge_count(const IrFunction& f) {
  std::size_t n = 0;
  for (const auto& b : f.blocks) n += b.successors.size();
  return n;
}

}  // namespace peepvec
