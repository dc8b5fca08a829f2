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

#include "pvhri/trainer.hpp"

namespace pvhri {

inline constexpr int kCheckpointVersion = 1;

std::string checkpoint_to_string(const TrainerState& state);
/// Throws FormatError for corrupt documents or a different schema version.
TrainerState checkpoint_from_string(const std::string& text);

void save_checkpoint(const TrainerState& state, const std::string& path);
TrainerState load_checkpoint(const std::string& path);

/// <dir>/<profile>.json, the layout used by `train --out` and read by trial/matrix.
std::string checkpoint_path(const std::string& dir, const std::string& profile);

}  // namespace pvhri
