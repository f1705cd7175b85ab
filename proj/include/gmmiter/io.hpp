#pragma once

// CSV serialization for traces, rank grids, convexity maps, and point sets.
// All floating-point fields use %.17g so files round-trip doubles exactly
// and reruns are byte-identical.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gmmiter/diagnostics.hpp"
#include "gmmiter/numerics.hpp"
#include "gmmiter/optimizers.hpp"
#include "gmmiter/quasirandom.hpp"

namespace gmmiter {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

namespace detail {

// Grid nodes are scalar for 1-d parameters; higher dimensions join the
// coordinates with ';' so the pair-grid schema stays two columns wide.
inline std::string format_node(const Vector& theta) {
    std::string out = format_double(theta(0));
    for (int j = 1; j < theta.size(); ++j) {
        out += ';';
        out += format_double(theta(j));
    }
    return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInputError("cannot open for writing: " + path);
    out << text;
    if (!out) throw InvalidInputError("write failed: " + path);
}

}  // namespace detail

inline std::string trace_to_csv(const IterationTrace& trace) {
    if (trace.records.empty()) throw InvalidInputError("trace_to_csv: empty trace");
    const int d = static_cast<int>(trace.records.front().theta.size());
    std::ostringstream out;
    out << "k";
    for (int j = 1; j <= d; ++j) out << ",theta_" << j;
    out << ",Q,step_norm,grad_norm,status,global_accepted\n";
    for (const IterationRecord& rec : trace.records) {
        out << rec.k;
        for (int j = 0; j < d; ++j) out << ',' << format_double(rec.theta(j));
        out << ',' << format_double(rec.q) << ',' << format_double(rec.step_norm) << ','
            << format_double(rec.grad_norm) << ',' << rec.status << ','
            << (rec.global_accepted ? 1 : 0) << '\n';
    }
    return out.str();
}

inline void write_trace_csv(const std::string& path, const IterationTrace& trace) {
    detail::write_text_file(path, trace_to_csv(trace));
}

// Just-identified grids emit the diagonal (theta2 == theta1); pair grids
// emit every ordered pair. Failed nodes appear with sigma_min = nan.
inline std::string rank_grid_to_csv(const RankGridReport& report) {
    std::ostringstream out;
    out << "theta1,theta2,sigma_min\n";
    const int n = static_cast<int>(report.grid.size());
    if (!report.over_identified) {
        for (int i = 0; i < n; ++i) {
            const std::string node = detail::format_node(report.grid[i]);
            out << node << ',' << node << ',' << format_double(report.values(i, 0)) << '\n';
        }
    } else {
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                out << detail::format_node(report.grid[i]) << ','
                    << detail::format_node(report.grid[j]) << ','
                    << format_double(report.values(i, j)) << '\n';
            }
        }
    }
    return out.str();
}

inline void write_rank_grid_csv(const std::string& path, const RankGridReport& report) {
    detail::write_text_file(path, rank_grid_to_csv(report));
}

inline std::string convexity_map_to_csv(const ConvexityMapReport& report) {
    if (report.grid.empty()) throw InvalidInputError("convexity_map_to_csv: empty report");
    const int d = static_cast<int>(report.grid.front().size());
    std::ostringstream out;
    for (int j = 1; j <= d; ++j) out << (j == 1 ? "" : ",") << "theta_" << j;
    out << ",lambda_min\n";
    for (std::size_t i = 0; i < report.grid.size(); ++i) {
        for (int j = 0; j < d; ++j) {
            if (j) out << ',';
            out << format_double(report.grid[i](j));
        }
        out << ',' << format_double(report.lambda_min[i]) << '\n';
    }
    return out.str();
}

inline void write_convexity_map_csv(const std::string& path, const ConvexityMapReport& report) {
    detail::write_text_file(path, convexity_map_to_csv(report));
}

inline std::string points_to_csv(const PointSet& points) {
    std::ostringstream out;
    for (int j = 1; j <= points.dim; ++j) out << (j == 1 ? "" : ",") << 'x' << j;
    out << '\n';
    for (const Vector& p : points.points) {
        for (int j = 0; j < points.dim; ++j) {
            if (j) out << ',';
            out << format_double(p(j));
        }
        out << '\n';
    }
    return out.str();
}

inline void write_points_csv(const std::string& path, const PointSet& points) {
    detail::write_text_file(path, points_to_csv(points));
}

}  // namespace gmmiter
