#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "biasprobe/errors.hpp"

namespace biasprobe::csv {

inline std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t row) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("row " + std::to_string(row) + ": bad number '" + s + "'");
    return v;
}

inline long parse_long(const std::string& s, std::size_t row) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError("row " + std::to_string(row) + ": bad integer '" + s + "'");
    return v;
}

/// Shortest decimal form that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

struct File {
    // Leading '#' lines are metadata (config hash, seed); kept verbatim.
    std::vector<std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline File read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    File f;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            f.meta.push_back(line);
            continue;
        }
        if (!have_header) {
            f.header = split(line);
            have_header = true;
        } else {
            f.rows.push_back(split(line));
        }
    }
    if (!have_header) throw ParseError(path + ": missing header");
    return f;
}

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path) {
        if (!out_) throw DataError("cannot open " + path + " for writing");
    }
    void meta(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

} // namespace biasprobe::csv
