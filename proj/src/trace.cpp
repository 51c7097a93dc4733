#include "mandala/trace.hpp"

#include "mandala/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace mandala {

namespace {

void check_point(double t, double m) {
    if (!std::isfinite(t)) throw std::invalid_argument("trace: non-finite time");
    if (!(m >= 0.0 && m <= 1.0)) {
        throw std::invalid_argument("trace: m=" + std::to_string(m) + " outside [0,1]");
    }
}

}  // namespace

MTrace::MTrace(std::vector<TracePoint> points, Interpolation interp) : interp_(interp) {
    points_.reserve(points.size());
    for (const auto& p : points) push(p.t, p.m);
}

MTrace MTrace::constant(double m, double t0) { return MTrace({{t0, m}}); }

void MTrace::push(double t, double m) {
    check_point(t, m);
    if (!points_.empty() && !(t > points_.back().t)) {
        throw std::invalid_argument("trace: times must be strictly increasing");
    }
    points_.push_back({t, m});
}

double MTrace::start() const {
    if (points_.empty()) throw std::logic_error("trace is empty");
    return points_.front().t;
}

double MTrace::end() const {
    if (points_.empty()) throw std::logic_error("trace is empty");
    return points_.back().t;
}

double MTrace::at(double t) const {
    if (points_.empty()) throw std::logic_error("trace is empty");
    if (t <= points_.front().t) return points_.front().m;
    if (t >= points_.back().t) return points_.back().m;

    // First point strictly after t; its predecessor is at or before t.
    const auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                                     [](double v, const TracePoint& p) { return v < p.t; });
    const auto lo = hi - 1;
    if (interp_ == Interpolation::kHold || t == lo->t) return lo->m;
    const double u = (t - lo->t) / (hi->t - lo->t);
    return lo->m + u * (hi->m - lo->m);
}

MTrace read_trace_csv(std::istream& in) {
    const auto table = read_csv(in);
    const auto t_col = table.column("t");
    const auto m_col = table.column("m");
    MTrace trace;
    for (const auto& row : table.rows) {
        trace.push(parse_double(row.at(t_col)), parse_double(row.at(m_col)));
    }
    return trace;
}

MTrace read_trace_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
    return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const MTrace& trace) {
    out << "t,m\n";
    for (const auto& p : trace.points()) out << format_double(p.t) << ',' << format_double(p.m) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const MTrace& trace) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace file: " + path.string());
    write_trace_csv(out, trace);
}

}  // namespace mandala
