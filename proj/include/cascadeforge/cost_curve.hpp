#pragma once

#include <string>
#include <vector>

namespace cascadeforge {

// One piece of a cost curve. Two shapes cover everything this project
// composes:
//   kLinear:  v0 + slope * (t - t0)
//   kLog:     1 + log2((arg0 + slope * (t - t0)) / denom)
// Anchoring at t0 keeps the family closed under the linear interval
// re-mappings used by curve transfer without catastrophic cancellation
// when the re-mapping is steep.
struct Segment {
    enum class Kind { kLinear, kLog };
    Kind kind = Kind::kLinear;
    double t0 = 0.0;
    double v0 = 0.0;    // kLinear value at t0
    double arg0 = 1.0;  // kLog inner argument at t0
    double slope = 1.0; // d(value)/dt for kLinear, d(arg)/dt for kLog
    double denom = 1.0; // kLog

    static Segment linear(double t0, double v0, double slope);
    static Segment log2_of(double t0, double arg0, double slope, double denom);

    double value(double t) const;
    double inner_arg(double t) const { return arg0 + slope * (t - t0); }
    // Closed-form antiderivative difference over [lo, hi].
    double integral(double lo, double hi) const;
    std::string describe() const;
};

// Piecewise non-decreasing cost-of-time curve over [d^0, d^K], clamped to
// its value at d^K beyond the end.
struct CostCurve {
    std::vector<double> boundaries; // K+1 strictly increasing values
    std::vector<Segment> segments;  // K entries

    int regions() const { return static_cast<int>(segments.size()); }
    double domain_start() const { return boundaries.front(); }
    double domain_end() const { return boundaries.back(); }
    double cap() const; // value at d^K

    // Piecewise evaluation; clamps outside the domain. Throws on negative
    // or non-finite t.
    double value(double t) const;

    // Closed-form integral over [lo, hi] within the domain.
    double integrate(double lo, double hi) const;

    // Continuity at internal boundaries within 1e-9, segments non-decreasing
    // and non-negative. Throws std::runtime_error with the offending boundary.
    void validate() const;

    // The two-region curve used throughout: t/d on [0,d), then
    // 1 + log2(t/d) capped at t_cap.
    static CostCurve two_region(double d, double t_cap);

    // Constant-1 segments between the given boundaries (toy curves).
    static CostCurve uniform(std::vector<double> boundaries);
};

} // namespace cascadeforge
