#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace mandala {

struct TracePoint {
    double t = 0.0;
    double m = 0.0;
    bool operator==(const TracePoint&) const = default;
};

enum class Interpolation { kLinear, kHold };

/// Discretized M(t): strictly increasing times, m in [0, 1]. Values before
/// the first point and after the last are held.
class MTrace {
public:
    MTrace() = default;
    explicit MTrace(std::vector<TracePoint> points, Interpolation interp = Interpolation::kLinear);

    static MTrace constant(double m, double t0 = 0.0);

    [[nodiscard]] double at(double t) const;
    [[nodiscard]] bool empty() const { return points_.empty(); }
    [[nodiscard]] double start() const;
    [[nodiscard]] double end() const;
    [[nodiscard]] const std::vector<TracePoint>& points() const { return points_; }
    [[nodiscard]] Interpolation interpolation() const { return interp_; }

    /// Appends a point; throws if t does not increase or m is out of range.
    void push(double t, double m);

private:
    std::vector<TracePoint> points_;
    Interpolation interp_ = Interpolation::kLinear;
};

/// CSV with a `t,m` header row.
MTrace read_trace_csv(std::istream& in);
MTrace read_trace_csv(const std::filesystem::path& path);
void write_trace_csv(std::ostream& out, const MTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const MTrace& trace);

}  // namespace mandala
