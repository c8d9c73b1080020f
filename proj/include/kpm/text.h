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

#ifndef KPM_TEXT_H_
#define KPM_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace kpm {

// Lowercases ASCII and splits on every run of characters that are not ASCII
// alphanumerics. Bytes >= 0x80 count as token characters so UTF-8 words stay
// whole. Shared by the tf-idf scorer and the corpus statistics.
std::vector<std::string> Tokenize(std::string_view text);

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Segments consisting only of whitespace are not counted.
std::vector<std::string_view> SplitSentences(std::string_view text);

// Text with leading and trailing ASCII whitespace removed.
std::string_view Trim(std::string_view text);

}  // namespace kpm

#endif  // KPM_TEXT_H_
