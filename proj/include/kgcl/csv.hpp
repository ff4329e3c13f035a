#pragma once

#include <istream>
#include <string>
#include <vector>

#include <kgcl/common.hpp>

namespace kgcl::csv {

// Minimal RFC-4180 reader: quoted fields, embedded commas/newlines, "" escapes.
inline bool read_row(std::istream& in, std::vector<std::string>& row) {
    row.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    bool row_done = false;
    while (!row_done) {
        if (quoted) {
            if (c == EOF) throw ParseError("unterminated quoted field");
            if (c == '"') {
                int peek = in.get();
                if (peek == '"') {
                    field.push_back('"');
                } else {
                    quoted = false;
                    c = peek;
                    continue;
                }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == EOF || c == '\n') {
                if (!field.empty() && field.back() == '\r') field.pop_back();
                row.push_back(field);
                row_done = true;
                continue;
            }
            if (c == ',') {
                row.push_back(field);
                field.clear();
            } else if (c == '"' && field.empty()) {
                quoted = true;
            } else {
                field.push_back(static_cast<char>(c));
            }
        }
        c = in.get();
    }
    return true;
}

inline std::string quote(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace kgcl::csv
