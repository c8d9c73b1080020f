// Copyright 2026 The kpm Authors.
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

#ifndef KPM_FOLD_H_
#define KPM_FOLD_H_

#include <string>
#include <vector>

namespace kpm {

// One cross-validation fold over topics. The three topic sets are disjoint.
struct Fold {
  int index = 0;
  std::vector<std::string> test_topics;
  std::vector<std::string> train_topics;
  std::vector<std::string> dev_topics;

  bool operator==(const Fold&) const = default;
};

}  // namespace kpm

#endif  // KPM_FOLD_H_
