#pragma once

#include <string>
#include <vector>

#include "mmdq/types.hpp"

namespace mmdq {

/// Particle positions and weights at a given (pseudo-)time.
struct FlowState {
    Points positions;
    Vector weights;
    double time = 0.0;
};

struct TraceRecord {
    long iteration = 0;
    double time = 0.0;
    double mmd = 0.0;
    double min_weight = 0.0;
    double max_weight = 0.0;
    double wall_ms = 0.0;
    /// Values for Trace::extra_columns, same order.
    std::vector<double> extra;
};

struct Trace {
    std::vector<TraceRecord> records;
    FlowState final_state;
    /// Algorithm-specific diagnostic columns (e.g. empty_cells for Lloyd).
    std::vector<std::string> extra_columns;
    /// Non-fatal events: descent violations, exhausted backtracking.
    std::vector<std::string> warnings;
    /// Why the run stopped: "max_iterations", "stationary", "max_time", ...
    std::string stop_reason;

    void add(long iteration, double time, double mmd, const Vector& weights, double wall_ms,
             std::vector<double> extra = {});
};

}  // namespace mmdq
