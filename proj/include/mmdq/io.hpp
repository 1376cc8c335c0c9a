#pragma once

#include <iosfwd>
#include <string>

#include "mmdq/embedding.hpp"
#include "mmdq/trace.hpp"

namespace mmdq {

/// Shortest round-trip formatting (%.17g).
std::string format_double(double value);

/// iteration,time,mmd,min_weight,max_weight,wall_ms[,extra...]
void write_trace_csv(std::ostream& out, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);
Trace read_trace_csv(const std::string& path);

/// weight,coord_1,...,coord_d
void write_final_state_csv(std::ostream& out, const FlowState& state);
void write_final_state_csv(const std::string& path, const FlowState& state);
FlowState read_final_state_csv(const std::string& path);

/// One sample per row, d numeric columns, optional header. A final column
/// named `weight` (header required) gives sample weights; they are normalized.
EmpiricalTarget read_target_csv(const std::string& path);
/// Reads a point set with the same rules, returning raw (unnormalized) weights
/// when a weight column is present. A leading `weight` column (final-state
/// files) is also accepted.
WeightedQuantization read_points_csv(const std::string& path, bool* has_weights = nullptr);
void write_points_csv(const std::string& path, const Points& points);

}  // namespace mmdq
