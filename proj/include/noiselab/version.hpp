// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace noiselab {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kCsvSchemaVersion = 1;

}  // namespace noiselab
