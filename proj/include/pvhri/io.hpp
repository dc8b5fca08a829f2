// Copyright 2026 The pvhri Authors
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

#pragma once

#include <string>

namespace pvhri::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);
void ensure_dir(const std::string& path);
bool exists(const std::string& path);
std::string join(const std::string& dir, const std::string& name);

// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace pvhri::io
