#include "cascadeforge/cost_curve.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cascadeforge {

namespace {
constexpr double kLn2 = 0.69314718055994530941723212145818;

// Antiderivative of 1 + log2(x/d) in x.
double log_antiderivative(double x, double d) {
    if (!(x > 0.0)) throw std::domain_error("log segment evaluated at non-positive point");
    return x + (x * std::log(x / d) - x) / kLn2;
}
} // namespace

Segment Segment::linear(double t0, double v0, double slope) {
    Segment s;
    s.kind = Kind::kLinear;
    s.t0 = t0;
    s.v0 = v0;
    s.slope = slope;
    return s;
}

Segment Segment::log2_of(double t0, double arg0, double slope, double denom) {
    Segment s;
    s.kind = Kind::kLog;
    s.t0 = t0;
    s.arg0 = arg0;
    s.slope = slope;
    s.denom = denom;
    return s;
}

double Segment::value(double t) const {
    if (kind == Kind::kLinear) return v0 + slope * (t - t0);
    double x = inner_arg(t);
    if (!(x > 0.0)) throw std::domain_error("log segment evaluated at non-positive point");
    return 1.0 + std::log2(x / denom);
}

double Segment::integral(double lo, double hi) const {
    if (kind == Kind::kLinear) {
        double dlo = lo - t0, dhi = hi - t0;
        return v0 * (hi - lo) + 0.5 * slope * (dhi * dhi - dlo * dlo);
    }
    // substitute x = arg0 + slope*(t - t0)
    double xlo = inner_arg(lo), xhi = inner_arg(hi);
    return (log_antiderivative(xhi, denom) - log_antiderivative(xlo, denom)) / slope;
}

std::string Segment::describe() const {
    std::ostringstream os;
    if (kind == Kind::kLinear) os << "linear(t0=" << t0 << ",v0=" << v0 << ",slope=" << slope << ")";
    else os << "log(t0=" << t0 << ",arg0=" << arg0 << ",slope=" << slope << ",denom=" << denom << ")";
    return os.str();
}

double CostCurve::cap() const { return segments.back().value(boundaries.back()); }

double CostCurve::value(double t) const {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("cost curve requires finite t >= 0");
    if (t <= boundaries.front()) return segments.front().value(boundaries.front());
    if (t >= boundaries.back()) return cap();
    // boundaries are few; linear scan is fine
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        if (t < boundaries[i + 1]) return segments[i].value(t);
    return cap();
}

double CostCurve::integrate(double lo, double hi) const {
    if (!(lo <= hi)) throw std::invalid_argument("integrate: need lo <= hi");
    if (lo < boundaries.front() - 1e-12 || hi > boundaries.back() + 1e-12)
        throw std::invalid_argument("integrate: interval outside curve domain");
    lo = std::max(lo, boundaries.front());
    hi = std::min(hi, boundaries.back());
    double total = 0.0;
    for (std::size_t i = 0; i < segments.size(); ++i) {
        double a = std::max(lo, boundaries[i]);
        double b = std::min(hi, boundaries[i + 1]);
        if (a < b) total += segments[i].integral(a, b);
    }
    return total;
}

void CostCurve::validate() const {
    if (segments.empty() || boundaries.size() != segments.size() + 1)
        throw std::runtime_error("cost curve needs K segments and K+1 boundaries");
    for (std::size_t i = 0; i + 1 < boundaries.size(); ++i)
        if (!(boundaries[i] < boundaries[i + 1]))
            throw std::runtime_error("cost curve boundaries must be strictly increasing");
    if (boundaries.front() < 0.0)
        throw std::runtime_error("cost curve domain must start at t >= 0");
    for (std::size_t i = 0; i < segments.size(); ++i) {
        const Segment& s = segments[i];
        if (s.kind == Segment::Kind::kLinear) {
            if (s.slope < 0.0)
                throw std::runtime_error("decreasing linear segment at index " + std::to_string(i));
        } else {
            if (!(s.denom > 0.0)) throw std::runtime_error("log segment needs denom > 0");
            if (!(s.slope > 0.0)) throw std::runtime_error("log segment needs slope > 0");
            if (!(s.inner_arg(boundaries[i]) > 0.0))
                throw std::runtime_error("log segment non-positive at segment start");
        }
        if (s.value(boundaries[i]) < -1e-12)
            throw std::runtime_error("negative curve value at boundary " + std::to_string(i));
    }
    for (std::size_t m = 1; m < boundaries.size() - 1; ++m) {
        double left = segments[m - 1].value(boundaries[m]);
        double right = segments[m].value(boundaries[m]);
        if (std::abs(left - right) > 1e-9) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "discontinuity at boundary %zu: |%.17g - %.17g| = %.3e",
                          m, left, right, std::abs(left - right));
            throw std::runtime_error(msg);
        }
    }
}

CostCurve CostCurve::two_region(double d, double t_cap) {
    if (!(d > 0.0) || !(t_cap > d))
        throw std::invalid_argument("two_region curve needs 0 < d < t_cap");
    CostCurve c;
    c.boundaries = {0.0, d, t_cap};
    // t/d up to d, then 1 + log2(t/d)
    c.segments = {Segment::linear(0.0, 0.0, 1.0 / d), Segment::log2_of(d, d, 1.0, d)};
    c.validate();
    return c;
}

CostCurve CostCurve::uniform(std::vector<double> boundaries) {
    CostCurve c;
    c.boundaries = std::move(boundaries);
    for (std::size_t i = 0; i + 1 < c.boundaries.size(); ++i)
        c.segments.push_back(Segment::linear(c.boundaries[i], 1.0, 0.0));
    c.validate();
    return c;
}

} // namespace cascadeforge
