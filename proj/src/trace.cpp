#include "mmdq/trace.hpp"

namespace mmdq {

void Trace::add(long iteration, double time, double mmd, const Vector& weights, double wall_ms,
                std::vector<double> extra) {
    TraceRecord r;
    r.iteration = iteration;
    r.time = time;
    r.mmd = mmd;
    r.min_weight = weights.size() ? weights.minCoeff() : 0.0;
    r.max_weight = weights.size() ? weights.maxCoeff() : 0.0;
    r.wall_ms = wall_ms;
    r.extra = std::move(extra);
    records.push_back(std::move(r));
}

}  // namespace mmdq
