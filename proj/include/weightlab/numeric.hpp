#pragma once

#include <cmath>
#include <limits>

namespace weightlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Neumaier-compensated running sum. An infinite term makes the sum infinite.
class CompensatedSum {
 public:
  void add(double v) {
    if (std::isinf(v) || std::isinf(s_)) {
      s_ += v;
      return;
    }
    double u = s_ + v;
    if (std::fabs(s_) >= std::fabs(v))
      c_ += (s_ - u) + v;
    else
      c_ += (v - u) + s_;
    s_ = u;
  }
  double value() const { return std::isinf(s_) ? s_ : s_ + c_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// b^a - c^a for b >= c > 0 without cancellation.
inline double power_difference(double b, double c, double a) {
  if (c <= 0.0) return std::pow(b, a);
  return std::pow(c, a) * std::expm1(a * std::log1p((b - c) / c));
}

}  // namespace weightlab
