// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "noiselab/vec.hpp"

namespace noiselab {

// Vector files are plain text: a one-line header "dim=<d>" followed by one
// real per line.
void write_vector(std::ostream& os, const NoiseVector& v);
void write_vector_file(const std::string& path, const NoiseVector& v);
NoiseVector read_vector(std::istream& is);
NoiseVector read_vector_file(const std::string& path);

}  // namespace noiselab
