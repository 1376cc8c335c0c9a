#include "mmdq/config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

/// Full-line comments start with # or ;, inline ones with whitespace then #.
std::string strip_comment(const std::string& line) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && (line[first] == '#' || line[first] == ';')) {
        return {};
    }
    for (std::size_t i = 1; i < line.size(); ++i) {
        if (line[i] == '#' && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string unquote(const std::string& v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

double to_double(const std::string& key, const std::string& text) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
    }
    return v;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trim(strip_comment(line));
        if (body.empty()) {
            continue;
        }
        if (body.front() == '[') {
            if (body.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
            }
            section = trim(body.substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        cfg.set(section.empty() ? key : section + "." + key, unquote(trim(body.substr(eq + 1))));
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || trim(assignment.substr(0, eq)).empty()) {
        throw ConfigError("override '" + assignment + "' is not of the form key=value");
    }
    set(trim(assignment.substr(0, eq)), unquote(trim(assignment.substr(eq + 1))));
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

const std::string* Config::find(const std::string& key) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get(const std::string& key, const std::string& fallback) const {
    const std::string* v = find(key);
    return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
    const std::string* v = find(key);
    return v ? to_double(key, *v) : fallback;
}

long Config::get_long(const std::string& key, long fallback) const {
    const std::string* v = find(key);
    if (!v) {
        return fallback;
    }
    errno = 0;
    char* end = nullptr;
    const long out = std::strtol(v->c_str(), &end, 10);
    if (v->empty() || end != v->c_str() + v->size() || errno == ERANGE) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + *v + "'");
    }
    return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const std::string* v = find(key);
    if (!v) {
        return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") {
        return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off") {
        return false;
    }
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
    const std::string* v = find(key);
    std::vector<double> out;
    if (!v || trim(*v).empty()) {
        return out;
    }
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(to_double(key, trim(item)));
    }
    return out;
}

std::vector<std::string> Config::unused_keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) {
        if (!used_.count(k)) {
            out.push_back(k);
        }
    }
    return out;
}

std::string Config::dump() const {
    std::ostringstream out;
    std::string current = "\x01";
    std::vector<std::pair<std::string, std::string>> ordered;
    for (const auto& kv : values_) {
        if (kv.first.find('.') == std::string::npos) {
            ordered.push_back(kv);
        }
    }
    for (const auto& kv : values_) {
        if (kv.first.find('.') != std::string::npos) {
            ordered.push_back(kv);
        }
    }
    for (const auto& [k, v] : ordered) {
        const auto dot = k.rfind('.');
        const std::string section = dot == std::string::npos ? "" : k.substr(0, dot);
        const std::string name = dot == std::string::npos ? k : k.substr(dot + 1);
        if (section != current) {
            if (current != "\x01") {
                out << '\n';
            }
            if (!section.empty()) {
                out << '[' << section << "]\n";
            }
            current = section;
        }
        out << name << " = " << v << '\n';
    }
    return out.str();
}

}  // namespace mmdq
