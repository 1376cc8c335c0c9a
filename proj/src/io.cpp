#include "mmdq/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "mmdq/errors.hpp"

namespace mmdq {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

bool parse_number(const std::string& s, double& value) {
    if (s.empty()) {
        return false;
    }
    errno = 0;
    char* end = nullptr;
    value = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    Table t;
    std::string line;
    long lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line) || line[0] == '#') {
            continue;
        }
        const auto fields = split(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            numeric = numeric && parse_number(fields[k], row[k]);
        }
        if (!numeric) {
            if (t.rows.empty() && t.header.empty()) {
                t.header = fields;
                width = fields.size();
                continue;
            }
            throw InputError(path + ":" + std::to_string(lineno) + ": non-numeric field");
        }
        if (width == 0) {
            width = row.size();
        }
        if (row.size() != width) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                             " columns, got " + std::to_string(row.size()));
        }
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) {
        throw InputError(path + ": no data rows");
    }
    return t;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    return out;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "iteration,time,mmd,min_weight,max_weight,wall_ms";
    for (const auto& c : trace.extra_columns) {
        out << ',' << c;
    }
    out << '\n';
    for (const auto& r : trace.records) {
        out << r.iteration << ',' << format_double(r.time) << ',' << format_double(r.mmd) << ','
            << format_double(r.min_weight) << ',' << format_double(r.max_weight) << ',' << format_double(r.wall_ms);
        for (double v : r.extra) {
            out << ',' << format_double(v);
        }
        out << '\n';
    }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
    auto out = open_out(path);
    write_trace_csv(out, trace);
}

Trace read_trace_csv(const std::string& path) {
    const Table t = read_table(path);
    if (t.header.size() < 6 || t.header[0] != "iteration" || t.header[2] != "mmd") {
        throw InputError(path + ": not a trace file");
    }
    Trace trace;
    trace.extra_columns.assign(t.header.begin() + 6, t.header.end());
    for (const auto& row : t.rows) {
        TraceRecord r;
        r.iteration = static_cast<long>(row[0]);
        r.time = row[1];
        r.mmd = row[2];
        r.min_weight = row[3];
        r.max_weight = row[4];
        r.wall_ms = row[5];
        r.extra.assign(row.begin() + 6, row.end());
        trace.records.push_back(std::move(r));
    }
    return trace;
}

void write_final_state_csv(std::ostream& out, const FlowState& state) {
    out << "weight";
    for (Index k = 0; k < state.positions.cols(); ++k) {
        out << ",coord_" << (k + 1);
    }
    out << '\n';
    for (Index i = 0; i < state.positions.rows(); ++i) {
        out << format_double(state.weights[i]);
        for (Index k = 0; k < state.positions.cols(); ++k) {
            out << ',' << format_double(state.positions(i, k));
        }
        out << '\n';
    }
}

void write_final_state_csv(const std::string& path, const FlowState& state) {
    auto out = open_out(path);
    write_final_state_csv(out, state);
}

FlowState read_final_state_csv(const std::string& path) {
    const Table t = read_table(path);
    const std::size_t width = t.rows.front().size();
    if (width < 2) {
        throw InputError(path + ": final state needs a weight and at least one coordinate");
    }
    FlowState s;
    s.positions.resize(static_cast<Index>(t.rows.size()), static_cast<Index>(width - 1));
    s.weights.resize(static_cast<Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        s.weights[static_cast<Index>(i)] = t.rows[i][0];
        for (std::size_t k = 1; k < width; ++k) {
            s.positions(static_cast<Index>(i), static_cast<Index>(k - 1)) = t.rows[i][k];
        }
    }
    return s;
}

WeightedQuantization read_points_csv(const std::string& path, bool* has_weights) {
    const Table t = read_table(path);
    // `weight` may be the last column (target format) or the first (final-state format).
    const bool leading = !t.header.empty() && t.header.front() == "weight";
    const bool trailing = !leading && !t.header.empty() && t.header.back() == "weight";
    const bool weighted = leading || trailing;
    const std::size_t width = t.rows.front().size();
    const std::size_t d = weighted ? width - 1 : width;
    const std::size_t first = leading ? 1 : 0;
    if (d < 1) {
        throw InputError(path + ": no coordinate columns");
    }
    WeightedQuantization q;
    const auto n = static_cast<Index>(t.rows.size());
    q.positions.resize(n, static_cast<Index>(d));
    q.weights = Vector::Constant(n, 1.0 / static_cast<double>(n));
    for (Index i = 0; i < n; ++i) {
        const auto& row = t.rows[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < d; ++k) {
            q.positions(i, static_cast<Index>(k)) = row[first + k];
        }
        if (weighted) {
            q.weights[i] = leading ? row[0] : row[d];
        }
    }
    if (has_weights) {
        *has_weights = weighted;
    }
    return q;
}

EmpiricalTarget read_target_csv(const std::string& path) {
    bool weighted = false;
    WeightedQuantization q = read_points_csv(path, &weighted);
    if (!weighted) {
        return EmpiricalTarget(std::move(q.positions));
    }
    if (!q.weights.allFinite() || (q.weights.array() < 0.0).any() || q.weights.sum() <= 0.0) {
        throw InputError(path + ": weight column must be nonnegative with positive sum");
    }
    q.weights /= q.weights.sum();
    return EmpiricalTarget(std::move(q.positions), std::move(q.weights));
}

void write_points_csv(const std::string& path, const Points& points) {
    auto out = open_out(path);
    for (Index k = 0; k < points.cols(); ++k) {
        out << (k ? "," : "") << "x" << (k + 1);
    }
    out << '\n';
    for (Index i = 0; i < points.rows(); ++i) {
        for (Index k = 0; k < points.cols(); ++k) {
            out << (k ? "," : "") << format_double(points(i, k));
        }
        out << '\n';
    }
}

}  // namespace mmdq
