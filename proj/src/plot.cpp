#include "mmdq/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mmdq/errors.hpp"
#include "mmdq/io.hpp"

namespace mmdq {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const {
        return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void header(std::ostringstream& svg, const Frame& f, const std::string& kind) {
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" data-kind=\"" << kind << "\" data-x-min=\""
        << format_double(f.x0) << "\" data-x-max=\"" << format_double(f.x1) << "\" data-y-min=\""
        << format_double(f.y0) << "\" data-y-max=\"" << format_double(f.y1) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& svg, const Frame& f, const std::string& xlabel, const std::string& ylabel) {
    const double l = kLeft;
    const double r = kWidth - kRight;
    const double t = kTop;
    const double b = kHeight - kBottom;
    svg << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n"
        << "<line x1=\"" << l << "\" y1=\"" << b << "\" x2=\"" << r << "\" y2=\"" << b << "\"/>\n"
        << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << b << "\"/>\n"
        << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        svg << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << b + 16 << "\" text-anchor=\"middle\">" << num(xv)
            << "</text>\n"
            << "<text x=\"" << l - 6 << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << num(yv)
            << "</text>\n";
    }
    svg << "<text x=\"" << (l + r) / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">" << xlabel
        << "</text>\n"
        << "<text x=\"14\" y=\"" << (t + b) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
        << (t + b) / 2 << ")\">" << ylabel << "</text>\n</g>\n";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write " + path);
    }
    out << text;
}

}  // namespace

void emit_plot(const std::vector<Trace>& traces, PlotKind kind, const std::string& path,
               const EmpiricalTarget* target) {
    if (traces.empty()) {
        throw InputError("plot: no traces");
    }
    std::ostringstream svg;
    if (kind == PlotKind::MmdCurve) {
        Frame f{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), 0.0, 0.0};
        for (const auto& t : traces) {
            for (const auto& r : t.records) {
                f.x0 = std::min(f.x0, static_cast<double>(r.iteration));
                f.x1 = std::max(f.x1, static_cast<double>(r.iteration));
                f.y1 = std::max(f.y1, r.mmd);
            }
        }
        if (!std::isfinite(f.x0)) {
            throw InputError("plot: traces have no records");
        }
        header(svg, f, "mmd");
        axes(svg, f, "iteration", "MMD");
        for (std::size_t k = 0; k < traces.size(); ++k) {
            svg << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << kPalette[k % 10] << "\" points=\"";
            for (const auto& r : traces[k].records) {
                svg << num(f.px(static_cast<double>(r.iteration))) << ',' << num(f.py(r.mmd)) << ' ';
            }
            svg << "\"/>\n";
        }
    } else {
        for (const auto& t : traces) {
            if (t.final_state.positions.cols() != 2) {
                throw InputError("plot: scatter needs 2-d particles");
            }
        }
        if (target && target->dim() != 2) {
            throw InputError("plot: scatter needs a 2-d target");
        }
        Point lo = traces.front().final_state.positions.colwise().minCoeff();
        Point hi = traces.front().final_state.positions.colwise().maxCoeff();
        for (const auto& t : traces) {
            lo = lo.cwiseMin(t.final_state.positions.colwise().minCoeff());
            hi = hi.cwiseMax(t.final_state.positions.colwise().maxCoeff());
        }
        if (target) {
            lo = lo.cwiseMin(target->lower());
            hi = hi.cwiseMax(target->upper());
        }
        const Point pad = 0.05 * (hi - lo).cwiseMax(1e-9);
        Frame f{lo[0] - pad[0], hi[0] + pad[0], lo[1] - pad[1], hi[1] + pad[1]};
        header(svg, f, "scatter");
        axes(svg, f, "x1", "x2");
        if (target) {
            svg << "<g fill=\"#bbbbbb\" fill-opacity=\"0.5\">\n";
            for (Index l = 0; l < target->size(); ++l) {
                svg << "<circle cx=\"" << num(f.px(target->samples()(l, 0))) << "\" cy=\""
                    << num(f.py(target->samples()(l, 1))) << "\" r=\"1.2\"/>\n";
            }
            svg << "</g>\n";
        }
        double wmax = 0.0;
        for (const auto& t : traces) {
            if (t.final_state.weights.size()) {
                wmax = std::max(wmax, t.final_state.weights.cwiseAbs().maxCoeff());
            }
        }
        constexpr double kMaxRadius = 10.0;
        for (std::size_t k = 0; k < traces.size(); ++k) {
            const auto& s = traces[k].final_state;
            const char* colour = kPalette[k % 10];
            for (Index i = 0; i < s.positions.rows(); ++i) {
                const double w = i < s.weights.size() ? s.weights[i] : 0.0;
                const double r = wmax > 0.0 ? kMaxRadius * std::sqrt(std::abs(w) / wmax) : 3.0;
                svg << "<circle cx=\"" << num(f.px(s.positions(i, 0))) << "\" cy=\"" << num(f.py(s.positions(i, 1)))
                    << "\" r=\"" << num(std::max(r, 0.5)) << "\" stroke=\"" << colour << "\" fill=\""
                    << (w >= 0.0 ? colour : "none") << "\" data-weight=\"" << format_double(w) << "\"/>\n";
            }
        }
    }
    svg << "</svg>\n";
    write_file(path, svg.str());
}

}  // namespace mmdq
