// Copyright (c) 2026 noiselab contributors
// SPDX-License-Identifier: Apache-2.0

#include "noiselab/vector_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "noiselab/errors.hpp"

namespace noiselab {

void write_vector(std::ostream& os, const NoiseVector& v) {
    os << "dim=" << v.size() << "\n";
    char buf[40];
    for (double x : v) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        os << buf << "\n";
    }
}

void write_vector_file(const std::string& path, const NoiseVector& v) {
    std::ofstream os(path);
    if (!os) {
        throw ConfigError("cannot open vector file '" + path + "' for writing");
    }
    write_vector(os, v);
}

NoiseVector read_vector(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("dim=", 0) != 0) {
        throw ConfigError("vector file: missing 'dim=<d>' header");
    }
    std::size_t dim = 0;
    try {
        dim = std::stoul(header.substr(4));
    } catch (const std::exception&) {
        throw ConfigError("vector file: malformed header '" + header + "'");
    }
    NoiseVector v;
    v.reserve(dim);
    std::string line;
    while (v.size() < dim && std::getline(is, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            v.push_back(std::stod(line));
        } catch (const std::exception&) {
            throw ConfigError("vector file: malformed value '" + line + "'");
        }
    }
    if (v.size() != dim) {
        throw ConfigError("vector file: expected " + std::to_string(dim) + " values, got " +
                          std::to_string(v.size()));
    }
    return v;
}

NoiseVector read_vector_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) {
        throw ConfigError("cannot open vector file '" + path + "'");
    }
    return read_vector(is);
}

}  // namespace noiselab
