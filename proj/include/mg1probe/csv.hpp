#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "mg1probe/errors.hpp"

namespace mg1probe {

// Locale-independent, byte-stable double formatting for CSV output.
inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& field) {
    char* end = nullptr;
    double v = std::strtod(field.c_str(), &end);
    if (end == field.c_str() || (end && *end != '\0'))
        throw config_error("csv: cannot parse number \"" + field + "\"");
    return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

}  // namespace mg1probe
