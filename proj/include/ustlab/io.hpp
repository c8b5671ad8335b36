#pragma once

// Output plumbing for the CLI: deterministic number formatting, CSV tables
// with '#' metadata headers, and atomic file writes (temp + rename) so no
// partial files survive a failure.
//
// Timing information is deliberately kept out of output files (it goes to
// stderr) so reruns with the same seed are byte-identical.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ustlab {

inline constexpr const char* kVersion = "0.1.0";

// Shortest round-trip decimal representation; stable across runs.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    double back = std::strtod(buf, nullptr);
    // try shorter forms that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[64];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        if (std::strtod(shorter, nullptr) == back) return shorter;
    }
    return buf;
}

inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    fs::rename(tmp, target);
}

// Builds a CSV document with leading '# key: value' metadata lines.
class CsvDocument {
public:
    void meta(const std::string& key, const std::string& value) {
        meta_ += "# " + key + ": " + value + "\n";
    }
    void header(const std::vector<std::string>& cols) { body_ += join(cols) + "\n"; }
    void row(const std::vector<std::string>& cells) { body_ += join(cells) + "\n"; }

    std::string str() const { return meta_ + body_; }
    void save(const std::string& path) const { write_file_atomic(path, str()); }

private:
    static std::string join(const std::vector<std::string>& parts) {
        std::string line;
        for (std::size_t i = 0; i < parts.size(); ++i) {
            if (i) line += ',';
            line += parts[i];
        }
        return line;
    }
    std::string meta_, body_;
};

}  // namespace ustlab
