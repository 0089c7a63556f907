#include "core/kvfile.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "core/dense.hpp"
#include "core/error.hpp"

namespace sign {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::uint64_t fnv1a_file(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    Fnv1a h;
    h.add_bytes(bytes.data(), bytes.size());
    return h.value();
}

std::string hex_u64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t parse_hex_u64(const std::string& s, const std::string& origin) {
    require(!s.empty(), ErrorCode::Parse, origin + ": empty hex value");
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(s.c_str(), &end, 16);
    require(errno == 0 && end == s.c_str() + s.size(), ErrorCode::Parse,
            origin + ": malformed hex value '" + s + "'");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t parse_u64_value(const std::string& value, const std::string& context) {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    require(errno == 0 && !value.empty() && end == value.c_str() + value.size() &&
                value.find('-') == std::string::npos,
            ErrorCode::Parse, context + ": expected unsigned integer, got '" + value + "'");
    return v;
}

double parse_double_value(const std::string& value, const std::string& context) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(value.c_str(), &end);
    require(!value.empty() && end == value.c_str() + value.size(), ErrorCode::Parse,
            context + ": expected number, got '" + value + "'");
    return v;
}

bool parse_bool_value(const std::string& value, const std::string& context) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(ErrorCode::Parse, context + ": expected true/false, got '" + value + "'");
}

void KvFile::set(const std::string& key, const std::string& value) {
    for (auto& e : entries_) {
        if (e.first == key) {
            e.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KvFile::set_u64(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }
void KvFile::set_double(const std::string& key, double v) { set(key, format_double(v)); }
void KvFile::set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }

bool KvFile::has(const std::string& key) const { return find(key) != nullptr; }

const std::string* KvFile::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.first == key) return &e.second;
    return nullptr;
}

std::string KvFile::get(const std::string& key) const {
    const std::string* v = find(key);
    require(v != nullptr, ErrorCode::Parse, origin_ + ": missing key '" + key + "'");
    return *v;
}

std::uint64_t KvFile::get_u64(const std::string& key) const {
    return parse_u64_value(get(key), origin_ + ": key '" + key + "'");
}

double KvFile::get_double(const std::string& key) const {
    return parse_double_value(get(key), origin_ + ": key '" + key + "'");
}

bool KvFile::get_bool(const std::string& key) const {
    return parse_bool_value(get(key), origin_ + ": key '" + key + "'");
}

std::string KvFile::get_or(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

std::uint64_t KvFile::get_u64_or(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? get_u64(key) : fallback;
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

bool KvFile::get_bool_or(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
    KvFile kv;
    kv.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        const std::size_t eq = line.find('=');
        require(eq != std::string::npos, ErrorCode::Parse,
                origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(!key.empty(), ErrorCode::Parse,
                origin + ":" + std::to_string(line_no) + ": empty key");
        require(kv.find(key) == nullptr, ErrorCode::Parse,
                origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        kv.entries_.emplace_back(key, value);
    }
    return kv;
}

KvFile KvFile::parse_file(const std::string& path) {
    const std::vector<std::uint8_t> bytes = read_file_bytes(path);
    return parse_text(std::string(bytes.begin(), bytes.end()), path);
}

std::string KvFile::to_text() const {
    std::string out;
    for (const auto& e : entries_) {
        out += e.first;
        out += " = ";
        out += e.second;
        out += "\n";
    }
    return out;
}

void KvFile::write_file(const std::string& path) const {
    const std::string text = to_text();
    write_file_bytes_atomic(path, text.data(), text.size());
}

} // namespace sign
