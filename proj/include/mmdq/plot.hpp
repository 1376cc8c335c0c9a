#pragma once

#include <string>
#include <vector>

#include "mmdq/embedding.hpp"
#include "mmdq/trace.hpp"

namespace mmdq {

enum class PlotKind { MmdCurve, Scatter2d };

/// Writes a standalone SVG.
///   MmdCurve: one polyline per trace; x spans [min iteration, max iteration],
///             y spans [0, max mmd]. The root element carries the ranges as
///             data-x-min / data-x-max / data-y-min / data-y-max.
///   Scatter2d: final particles of every trace, marker area proportional to
///             |weight|; positive weights filled, negative hollow. Samples of
///             `target` (if given) are drawn underneath.
/// Throws InputError for an empty trace list or, for Scatter2d, d != 2.
void emit_plot(const std::vector<Trace>& traces, PlotKind kind, const std::string& path,
               const EmpiricalTarget* target = nullptr);

}  // namespace mmdq
