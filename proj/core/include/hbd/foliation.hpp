#pragma once

// Space-like foliations of Minkowski space given by a generating function f.
// Leaves are the level sets f = s. Three variants are supported:
//
//   FlatTime         f(x) = x^0
//   ConstantNormal   f(x) = n.x for a fixed future unit timelike n
//   GraphLeaf        f(x) = x^0 - h(x^1); leaves are graphs x^0 = s + h
//
// Any variant can be relabeled by an increasing affine map s -> a s + b,
// which changes the parametrization but not the leaves.

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <variant>

#include "hbd/geometry.hpp"

namespace hbd {

// Spatial chart coordinates on a leaf. D11 uses only entry 0.
using ChartPoint = std::array<double, 3>;

struct TanhProfile {
  double amplitude = 0.0;
  double rate = 1.0;
};

// a sin(b x) exp(-x^2 / w^2); an infinite width drops the envelope.
struct SinGaussProfile {
  double amplitude = 0.0;
  double wavenumber = 1.0;
  double width = std::numeric_limits<double>::infinity();
};

using HeightProfile = std::variant<TanhProfile, SinGaussProfile>;

double profile_height(const HeightProfile& h, double x);
double profile_slope(const HeightProfile& h, double x);

// Region of chart coordinates over which validity is enforced. With a period
// set, every active axis is periodic with that period and hi - lo must equal
// it; trajectories may then leave the box freely.
struct ValidityBox {
  ChartPoint lo{-1.0, -1.0, -1.0};
  ChartPoint hi{1.0, 1.0, 1.0};
  std::optional<double> period;
};

struct ValidityReport {
  double min_margin = 1.0;
  ChartPoint worst_point{};
  bool passed = true;
};

enum class FoliationKind { FlatTime, ConstantNormal, GraphLeaf };

class Foliation {
 public:
  static Foliation flat_time(SpinMode mode, ValidityBox box = {});
  static Foliation constant_normal(const FourVector& n, SpinMode mode, ValidityBox box = {});
  static Foliation graph_leaf(const HeightProfile& h, SpinMode mode, ValidityBox box = {});

  // Same leaves, labels s' = scale * s + offset. scale must be positive.
  Foliation relabeled(double scale, double offset) const;

  FoliationKind kind() const noexcept { return kind_; }
  SpinMode mode() const noexcept { return mode_; }
  const ValidityBox& box() const noexcept { return box_; }
  const HeightProfile& profile() const noexcept { return profile_; }
  const FourVector& tilt_normal() const noexcept { return tilt_; }
  double label_scale() const noexcept { return scale_; }
  double label_offset() const noexcept { return offset_; }

  double label(const FourVector& x) const;

  // Contravariant components of the gradient of f.
  FourVector gradient(const FourVector& x) const;

  // Future unit normal. Throws ValidityBreach where the gradient is not timelike.
  FourVector normal(const FourVector& x) const;

  FourVector leaf_point(double s, const ChartPoint& xi) const;
  ChartPoint chart_coordinates(const FourVector& x) const;

  // Induced volume factor of the chart at (s, xi). Throws ValidityBreach if
  // the leaf is not space-like there.
  double area_element(double s, const ChartPoint& xi) const;

  // Box membership on non-periodic active axes.
  bool in_validity_region(const ChartPoint& xi) const;

  // Scans a grid of resolution points per active axis; margin is
  // (df.df) / (df^0)^2, which must stay positive.
  ValidityReport validity_scan(int resolution) const;

  // Maps periodic coordinates into [lo, lo + period). No-op without a period.
  ChartPoint wrap(ChartPoint xi) const;

 private:
  Foliation(FoliationKind kind, SpinMode mode, ValidityBox box);
  void check_box() const;

  FoliationKind kind_;
  SpinMode mode_;
  ValidityBox box_;
  HeightProfile profile_{};
  FourVector tilt_{{1.0, 0.0, 0.0, 0.0}};
  double scale_ = 1.0;
  double offset_ = 0.0;
};

// Covariant components V_mu of a one-form field.
using CovectorField = std::function<FourVector(const FourVector&)>;

// Largest |(V ^ dV)_{mu nu lambda}| at x, with dV from central differences of
// step h. Vanishes for hypersurface-orthogonal (integrable) fields.
double frobenius_residual(const CovectorField& v, const FourVector& x, double h);

// The one-form df of a foliation.
CovectorField gradient_covector_field(const Foliation& f);

// V = (1, 0, c x^3, 0); V ^ dV has magnitude |c| everywhere.
CovectorField twisted_field(double c);

}  // namespace hbd
