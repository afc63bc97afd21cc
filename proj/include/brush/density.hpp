// Limit density of the teeth-base indicator on the attachment interval:
// exact closed forms for the built-in placement families and a windowed
// moving average for arbitrary placements. The vanishing set collects the
// trace nodes whose density falls below the activation cutoff.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "brush/geometry.hpp"

namespace brush {

struct DensityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DensityRepr { Constant, LinearProfile, Sampled };

struct DensityField {
  DensityRepr repr = DensityRepr::Sampled;
  double rho = 0.0;  // Constant representation
  double attach_lo = 0.0, attach_hi = 0.0;
  std::vector<double> xs;       // trace node positions, increasing
  std::vector<double> samples;  // density at trace nodes, in [0, 1]
  double theta_min = 1e-12;

  // Exact value where a closed form exists, P1 interpolation of the samples
  // otherwise. Zero outside the attachment interval.
  double eval(double x) const {
    if (x < attach_lo || x > attach_hi) return 0.0;
    switch (repr) {
      case DensityRepr::Constant: return rho;
      case DensityRepr::LinearProfile: return std::max(0.0, 0.5 * (1.0 - x));
      case DensityRepr::Sampled: {
        if (xs.empty()) return 0.0;
        if (x <= xs.front()) return samples.front();
        if (x >= xs.back()) return samples.back();
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        size_t k = size_t(it - xs.begin());
        double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
        return samples[k - 1] + t * (samples[k] - samples[k - 1]);
      }
    }
    return 0.0;
  }

  bool active(int k) const { return samples[k] > theta_min; }

  std::vector<int> vanishing_set() const {
    std::vector<int> out;
    for (size_t k = 0; k < samples.size(); ++k)
      if (samples[k] <= theta_min) out.push_back(int(k));
    return out;
  }

  void check() const {
    for (double v : samples)
      if (!(v >= 0.0 && v <= 1.0))
        throw DensityError("density sample outside [0, 1]");
  }
};

inline DensityField theta_constant(double rho, std::vector<double> xs,
                                   double attach_lo, double attach_hi,
                                   double theta_min = 1e-12) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw DensityError("constant density must lie in [0, 1]");
  DensityField d;
  d.repr = DensityRepr::Constant;
  d.rho = rho;
  d.attach_lo = attach_lo;
  d.attach_hi = attach_hi;
  d.theta_min = theta_min;
  d.xs = std::move(xs);
  d.samples.reserve(d.xs.size());
  for (double x : d.xs)
    d.samples.push_back(x >= attach_lo && x <= attach_hi ? rho : 0.0);
  d.check();
  return d;
}

// Closed-form profile (1-x)/2 of the widening-gap family on (0, 1).
inline DensityField theta_linear_profile(std::vector<double> xs,
                                         double theta_min = 1e-12) {
  DensityField d;
  d.repr = DensityRepr::LinearProfile;
  d.attach_lo = 0.0;
  d.attach_hi = 1.0;
  d.theta_min = theta_min;
  d.xs = std::move(xs);
  d.samples.reserve(d.xs.size());
  for (double x : d.xs) d.samples.push_back(d.eval(x));
  d.check();
  return d;
}

inline DensityField theta_zero(std::vector<double> xs, double attach_lo,
                               double attach_hi, double theta_min = 1e-12) {
  return theta_constant(0.0, std::move(xs), attach_lo, attach_hi, theta_min);
}

// Windowed average of the teeth-base indicator: coverage of the window
// (x - h_w, x + h_w), clipped to the attachment interval and renormalized by
// the clipped window length. Interval arithmetic on the placements is exact.
inline DensityField theta_empirical(const BrushSpec& spec, double h_w,
                                    std::vector<double> xs,
                                    double theta_min = 1e-3) {
  if (!(h_w > 2.0 * spec.c_scale * spec.epsilon))
    throw DensityError("window must exceed twice the largest tooth size");
  DensityField d;
  d.repr = DensityRepr::Sampled;
  d.attach_lo = spec.attach_lo;
  d.attach_hi = spec.attach_hi;
  d.theta_min = theta_min;
  d.xs = std::move(xs);
  d.samples.reserve(d.xs.size());
  for (double x : d.xs) {
    double wlo = std::max(x - h_w, spec.attach_lo);
    double whi = std::min(x + h_w, spec.attach_hi);
    double covered = 0.0;
    for (size_t n = 0; n < spec.placements.size(); ++n) {
      double lo = std::max(wlo, spec.tooth_base_lo(int(n)));
      double hi = std::min(whi, spec.tooth_base_hi(int(n)));
      if (hi > lo) covered += hi - lo;
    }
    double len = whi - wlo;
    double v = len > 0.0 ? covered / len : 0.0;
    d.samples.push_back(std::clamp(v, 0.0, 1.0));
  }
  d.check();
  return d;
}

}  // namespace brush
