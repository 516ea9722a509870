#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include "irsim/errors.hpp"

namespace irsim::lab {

/// Floating values are printed with 6 significant digits.
inline void append_g6(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    out += buf;
}

inline std::string format_g6(double v) {
    std::string s;
    append_g6(s, v);
    return s;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace irsim::lab
