#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mmdq {

/// Flat key/value configuration read from an INI-style file:
///
///   # comment
///   [section]
///   key = value
///
/// Keys are stored as "section.key". Later assignments win.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<string>");
    static Config load(const std::string& path);

    /// "key=value" from the command line.
    void apply_override(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Comma-separated numbers; empty when the key is absent.
    std::vector<double> get_doubles(const std::string& key) const;

    /// Keys never read through a getter, for typo detection.
    std::vector<std::string> unused_keys() const;

    /// Every stored key, grouped by section, in a form parse() reads back.
    std::string dump() const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    const std::string* find(const std::string& key) const;

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace mmdq
