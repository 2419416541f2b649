#pragma once

// Shared plumbing: error types, diagnostics, number formatting, CSV reading,
// and a small thread fan-out helper.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

namespace deconf {

/// Input that violates a documented contract (bad label, bad value, empty table).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A preprocessing note. Serialized as one JSON object per line.
struct Warning {
    std::string code;
    std::string message;
    nlohmann::json detail = nlohmann::json::object();

    std::string to_json_line() const {
        nlohmann::json j;
        j["code"] = code;
        j["message"] = message;
        if (!detail.empty()) j["detail"] = detail;
        return j.dump();
    }
};

inline void write_json_lines(std::ostream& os, const std::vector<Warning>& warnings) {
    for (const auto& w : warnings) os << w.to_json_line() << '\n';
}

/// Shortest round-trip representation; stable across runs.
inline std::string fmt_double(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

/// Quote a CSV field when it contains a separator, quote or newline.
inline std::string csv_escape(std::string_view s, bool always_quote = false) {
    bool needs = always_quote || s.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Minimal RFC-4180 style reader over an in-memory buffer. Quoted fields may
/// contain commas and doubled quotes; embedded newlines are not supported.
class CsvReader {
public:
    CsvReader(std::string content, std::string source)
        : data_(std::move(content)), source_(std::move(source)) {
        // UTF-8 byte order mark
        if (data_.size() >= 3 && static_cast<unsigned char>(data_[0]) == 0xEF &&
            static_cast<unsigned char>(data_[1]) == 0xBB && static_cast<unsigned char>(data_[2]) == 0xBF)
            pos_ = 3;
    }

    static CsvReader from_file(const std::string& path) { return CsvReader(read_file(path), path); }

    /// Reads the next non-empty line into `fields`. Returns false at end of input.
    bool next(std::vector<std::string>& fields) {
        while (pos_ < data_.size()) {
            size_t eol = data_.find('\n', pos_);
            if (eol == std::string::npos) eol = data_.size();
            std::string_view line(data_.data() + pos_, eol - pos_);
            pos_ = eol + 1;
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (line.empty()) continue;
            split(line, fields);
            return true;
        }
        return false;
    }

    size_t line() const { return line_no_; }
    const std::string& source() const { return source_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError(source_ + ":" + std::to_string(line_no_) + ": " + what);
    }

private:
    void split(std::string_view line, std::vector<std::string>& fields) const {
        fields.clear();
        size_t i = 0;
        while (true) {
            std::string field;
            if (i < line.size() && line[i] == '"') {
                ++i;
                bool closed = false;
                while (i < line.size()) {
                    char c = line[i++];
                    if (c == '"') {
                        if (i < line.size() && line[i] == '"') {
                            field += '"';
                            ++i;
                        } else {
                            closed = true;
                            break;
                        }
                    } else {
                        field += c;
                    }
                }
                if (!closed) fail("unterminated quoted field");
                if (i < line.size() && line[i] != ',') fail("unexpected character after quoted field");
            } else {
                size_t comma = line.find(',', i);
                if (comma == std::string_view::npos) comma = line.size();
                field.assign(line.substr(i, comma - i));
                i = comma;
            }
            fields.push_back(std::move(field));
            if (i >= line.size()) break;
            ++i;  // skip comma
            if (i == line.size()) {
                fields.emplace_back();
                break;
            }
        }
    }

    std::string data_;
    std::string source_;
    size_t pos_ = 0;
    size_t line_no_ = 0;
};

inline int64_t parse_int(const std::string& s, const CsvReader& r, const char* what) {
    int64_t v = 0;
    auto t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        r.fail(std::string("malformed ") + what + " '" + s + "'");
    return v;
}

inline double parse_double(const std::string& s, const CsvReader& r, const char* what) {
    double v = 0;
    auto t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        r.fail(std::string("malformed ") + what + " '" + s + "'");
    return v;
}

/// Worker count: DECONFOUND_THREADS caps hardware concurrency.
inline unsigned thread_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("DECONFOUND_THREADS")) {
        int cap = std::atoi(env);
        if (cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

/// Runs fn(i) for i in [0, n). Each index is handled exactly once; callers write
/// into pre-sized per-index slots so results do not depend on scheduling.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    unsigned workers = static_cast<unsigned>(std::min<size_t>(thread_count(), n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace deconf
