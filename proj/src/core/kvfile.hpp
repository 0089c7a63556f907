#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sign {

// 64-bit FNV-1a.
class Fnv1a {
public:
    void add_byte(std::uint8_t b) {
        hash_ = (hash_ ^ b) * 0x100000001B3ull;
    }
    void add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < n; ++i) add_byte(p[i]);
    }
    void add_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) add_byte(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    std::uint64_t value() const { return hash_; }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

std::uint64_t fnv1a_file(const std::string& path);
std::string hex_u64(std::uint64_t v);              // 16 lowercase hex digits
std::uint64_t parse_hex_u64(const std::string& s,
                            const std::string& origin = "<memory>"); // inverse

// Round-trip-exact decimal form of a double (%.17g).
std::string format_double(double v);

// Flat "key = value" text files. One pair per line, '#'-prefixed comment lines
// and blank lines ignored, keys unique, insertion order preserved on write.
class KvFile {
public:
    void set(const std::string& key, const std::string& value);
    void set_u64(const std::string& key, std::uint64_t v);
    void set_double(const std::string& key, double v);
    void set_bool(const std::string& key, bool v);

    bool has(const std::string& key) const;
    const std::string* find(const std::string& key) const;

    // Typed getters; "get" variants throw Parse when the key is missing or the
    // value does not parse.
    std::string get(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    std::string get_or(const std::string& key, const std::string& fallback) const;
    std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
    double get_double_or(const std::string& key, double fallback) const;
    bool get_bool_or(const std::string& key, bool fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    static KvFile parse_text(const std::string& text, const std::string& origin);
    static KvFile parse_file(const std::string& path);

    std::string to_text() const;
    void write_file(const std::string& path) const; // atomic (.tmp + rename)

    std::string origin() const { return origin_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string origin_ = "<memory>";
};

std::uint64_t parse_u64_value(const std::string& value, const std::string& context);
double parse_double_value(const std::string& value, const std::string& context);
bool parse_bool_value(const std::string& value, const std::string& context);

} // namespace sign
