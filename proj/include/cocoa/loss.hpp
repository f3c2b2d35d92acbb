#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "cocoa/types.hpp"

namespace cocoa {

enum class LossFamily { hinge, smoothed_hinge, logistic };

/// A margin loss l(a; y) together with its conjugate.
///
/// Dual variables follow the convention that the dual objective contains
/// -l*(-alpha), and every family here has conjugate domain alpha*y in [0, 1].
struct LossModel {
  LossFamily family = LossFamily::hinge;
  /// Width of the quadratic smoothing region (smoothed hinge only).
  double smoothing = 1.0;

  static LossModel hinge() { return {LossFamily::hinge, 0.0}; }
  static LossModel smoothed_hinge(double width = 1.0) { return {LossFamily::smoothed_hinge, width}; }
  static LossModel logistic() { return {LossFamily::logistic, 0.0}; }

  /// gamma such that each loss is (1/gamma)-smooth; 0 for the non-smooth hinge.
  double gamma() const {
    switch (family) {
      case LossFamily::hinge: return 0.0;
      case LossFamily::smoothed_hinge: return smoothing;
      case LossFamily::logistic: return 4.0;
    }
    return 0.0;
  }
  bool is_smooth() const { return gamma() > 0.0; }

  /// "hinge", "smoothed_hinge:<width>" or "logistic".
  std::string name() const;
  /// Inverse of name(); "smoothed_hinge" alone means width 1.
  static LossModel parse(const std::string& text);

  friend bool operator==(const LossModel&, const LossModel&) = default;
};

/// Slack allowed on the conjugate domain boundary for accumulated round-off.
inline constexpr double kDomainSlack = 1e-12;

template <typename Scalar>
Scalar loss_value(const LossModel& model, Scalar margin, Scalar label) {
  using std::exp;
  using std::log1p;
  const Scalar z = label * margin;
  switch (model.family) {
    case LossFamily::hinge:
      return z < Scalar(1) ? Scalar(1) - z : Scalar(0);
    case LossFamily::smoothed_hinge: {
      const Scalar g = Scalar(model.smoothing);
      if (z >= Scalar(1)) return Scalar(0);
      if (z <= Scalar(1) - g) return Scalar(1) - z - g / Scalar(2);
      return (Scalar(1) - z) * (Scalar(1) - z) / (Scalar(2) * g);
    }
    case LossFamily::logistic:
      // log(1 + exp(-z)) without overflow
      return z > Scalar(0) ? log1p(exp(-z)) : -z + log1p(exp(z));
  }
  return Scalar(0);
}

/// d l / d margin. For the hinge this is the subgradient choice -y on z < 1, else 0.
template <typename Scalar>
Scalar loss_derivative(const LossModel& model, Scalar margin, Scalar label) {
  using std::exp;
  const Scalar z = label * margin;
  switch (model.family) {
    case LossFamily::hinge:
      return z < Scalar(1) ? -label : Scalar(0);
    case LossFamily::smoothed_hinge: {
      const Scalar g = Scalar(model.smoothing);
      if (z >= Scalar(1)) return Scalar(0);
      if (z <= Scalar(1) - g) return -label;
      return -label * (Scalar(1) - z) / g;
    }
    case LossFamily::logistic: {
      const Scalar s = z > Scalar(0) ? exp(-z) / (Scalar(1) + exp(-z)) : Scalar(1) / (Scalar(1) + exp(z));
      return -label * s;
    }
  }
  return Scalar(0);
}

/// l*(-alpha) for label y; +infinity when alpha*y lies outside [0, 1].
template <typename Scalar>
Scalar conjugate_value(const LossModel& model, Scalar alpha, Scalar label) {
  using std::log;
  Scalar b = alpha * label;
  if (b < Scalar(-kDomainSlack) || b > Scalar(1 + kDomainSlack))
    return std::numeric_limits<Scalar>::infinity();
  b = b < Scalar(0) ? Scalar(0) : (b > Scalar(1) ? Scalar(1) : b);
  switch (model.family) {
    case LossFamily::hinge:
      return -b;
    case LossFamily::smoothed_hinge:
      return -b + Scalar(model.smoothing) / Scalar(2) * b * b;
    case LossFamily::logistic: {
      const Scalar p = b > Scalar(0) ? b * log(b) : Scalar(0);
      const Scalar q = b < Scalar(1) ? (Scalar(1) - b) * log(Scalar(1) - b) : Scalar(0);
      return p + q;
    }
  }
  return Scalar(0);
}

}  // namespace cocoa
