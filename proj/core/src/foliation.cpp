#include "hbd/foliation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hbd/errors.hpp"

namespace hbd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double envelope(const SinGaussProfile& p, double x) {
  return std::isinf(p.width) ? 1.0 : std::exp(-x * x / (p.width * p.width));
}

double spatial_dot(const FourVector& a, const ChartPoint& b) {
  return a[1] * b[0] + a[2] * b[1] + a[3] * b[2];
}

}  // namespace

double profile_height(const HeightProfile& h, double x) {
  return std::visit(overloaded{
                        [x](const TanhProfile& p) { return p.amplitude * std::tanh(p.rate * x); },
                        [x](const SinGaussProfile& p) {
                          return p.amplitude * std::sin(p.wavenumber * x) * envelope(p, x);
                        },
                    },
                    h);
}

double profile_slope(const HeightProfile& h, double x) {
  return std::visit(overloaded{
                        [x](const TanhProfile& p) {
                          const double c = std::cosh(p.rate * x);
                          return p.amplitude * p.rate / (c * c);
                        },
                        [x](const SinGaussProfile& p) {
                          const double env = envelope(p, x);
                          const double decay = std::isinf(p.width) ? 0.0 : 2.0 * x / (p.width * p.width);
                          return p.amplitude * env *
                                 (p.wavenumber * std::cos(p.wavenumber * x) - decay * std::sin(p.wavenumber * x));
                        },
                    },
                    h);
}

Foliation::Foliation(FoliationKind kind, SpinMode mode, ValidityBox box)
    : kind_(kind), mode_(mode), box_(box) {}

void Foliation::check_box() const {
  const int dims = spatial_dims(mode_);
  for (int i = 0; i < dims; ++i) {
    const auto a = static_cast<std::size_t>(i);
    if (!(box_.hi[a] > box_.lo[a])) throw InvalidArgument("validity box must have hi > lo on every axis");
    if (box_.period) {
      if (std::abs((box_.hi[a] - box_.lo[a]) - *box_.period) > 1e-9 * *box_.period) {
        throw InvalidArgument("periodic validity box must span exactly one period");
      }
    }
  }
  if (!box_.period) return;
  if (!(*box_.period > 0.0)) throw InvalidArgument("period must be positive");
  if (kind_ == FoliationKind::ConstantNormal) {
    const bool untilted = tilt_[1] == 0.0 && tilt_[2] == 0.0 && tilt_[3] == 0.0;
    if (!untilted) throw InvalidArgument("tilted hyperplanes are not periodic in chart coordinates");
  }
  if (kind_ == FoliationKind::GraphLeaf) {
    const auto* sg = std::get_if<SinGaussProfile>(&profile_);
    if (sg == nullptr || !std::isinf(sg->width)) {
      throw InvalidArgument("only the envelope-free sine profile is periodic");
    }
    const double cycles = sg->wavenumber * *box_.period / (2.0 * M_PI);
    if (std::abs(cycles - std::round(cycles)) > 1e-9) {
      throw InvalidArgument("sine profile wavenumber is not commensurate with the period");
    }
  }
}

Foliation Foliation::flat_time(SpinMode mode, ValidityBox box) {
  Foliation f(FoliationKind::FlatTime, mode, box);
  f.check_box();
  return f;
}

Foliation Foliation::constant_normal(const FourVector& n, SpinMode mode, ValidityBox box) {
  const double nn = minkowski_square(n);
  if (!(nn > 0.0) || !(n[0] > 0.0)) {
    throw InvalidArgument("constant normal must be future-oriented timelike");
  }
  if (mode == SpinMode::D11 && (n[2] != 0.0 || n[3] != 0.0)) {
    throw InvalidArgument("D11 normal must have vanishing components 2 and 3");
  }
  Foliation f(FoliationKind::ConstantNormal, mode, box);
  f.tilt_ = (1.0 / std::sqrt(nn)) * n;
  f.check_box();
  return f;
}

Foliation Foliation::graph_leaf(const HeightProfile& h, SpinMode mode, ValidityBox box) {
  Foliation f(FoliationKind::GraphLeaf, mode, box);
  f.profile_ = h;
  f.check_box();
  return f;
}

Foliation Foliation::relabeled(double scale, double offset) const {
  if (!(scale > 0.0)) throw InvalidArgument("relabeling scale must be positive");
  Foliation f = *this;
  f.scale_ = scale * scale_;
  f.offset_ = scale * offset_ + offset;
  return f;
}

double Foliation::label(const FourVector& x) const {
  double base = 0.0;
  switch (kind_) {
    case FoliationKind::FlatTime:
      base = x[0];
      break;
    case FoliationKind::ConstantNormal:
      base = minkowski_dot(tilt_, x);
      break;
    case FoliationKind::GraphLeaf:
      base = x[0] - profile_height(profile_, x[1]);
      break;
  }
  return scale_ * base + offset_;
}

FourVector Foliation::gradient(const FourVector& x) const {
  FourVector g{{1.0, 0.0, 0.0, 0.0}};
  switch (kind_) {
    case FoliationKind::FlatTime:
      break;
    case FoliationKind::ConstantNormal:
      g = tilt_;
      break;
    case FoliationKind::GraphLeaf:
      // Covector (1, -h', 0, 0); raising the index flips the spatial sign.
      g[1] = profile_slope(profile_, x[1]);
      break;
  }
  return scale_ * g;
}

FourVector Foliation::normal(const FourVector& x) const {
  const FourVector g = gradient(x);
  const double gg = minkowski_square(g);
  if (!(gg > 0.0) || !(g[0] > 0.0)) {
    std::ostringstream msg;
    msg << "foliation gradient not future timelike at x = (" << x[0] << ", " << x[1] << ", " << x[2]
        << ", " << x[3] << ")";
    throw ValidityBreach(msg.str());
  }
  return (1.0 / std::sqrt(gg)) * g;
}

FourVector Foliation::leaf_point(double s, const ChartPoint& xi) const {
  const double base = (s - offset_) / scale_;
  ChartPoint q = xi;
  if (mode_ == SpinMode::D11) q[1] = q[2] = 0.0;
  switch (kind_) {
    case FoliationKind::FlatTime:
      return FourVector{{base, q[0], q[1], q[2]}};
    case FoliationKind::ConstantNormal: {
      // Pure boost taking (1,0,0,0) to n, applied to (base, xi).
      const double nxi = spatial_dot(tilt_, q);
      const double k = nxi / (1.0 + tilt_[0]);
      return FourVector{{tilt_[0] * base + nxi, tilt_[1] * base + q[0] + tilt_[1] * k,
                         tilt_[2] * base + q[1] + tilt_[2] * k, tilt_[3] * base + q[2] + tilt_[3] * k}};
    }
    case FoliationKind::GraphLeaf:
      return FourVector{{base + profile_height(profile_, q[0]), q[0], q[1], q[2]}};
  }
  return {};
}

ChartPoint Foliation::chart_coordinates(const FourVector& x) const {
  ChartPoint xi{x[1], x[2], x[3]};
  if (kind_ == FoliationKind::ConstantNormal) {
    // Inverse boost.
    const double nx = tilt_[1] * x[1] + tilt_[2] * x[2] + tilt_[3] * x[3];
    const double k = nx / (1.0 + tilt_[0]);
    for (std::size_t i = 0; i < 3; ++i) xi[i] = x[i + 1] - tilt_[i + 1] * x[0] + tilt_[i + 1] * k;
  }
  if (mode_ == SpinMode::D11) xi[1] = xi[2] = 0.0;
  return xi;
}

double Foliation::area_element(double s, const ChartPoint& xi) const {
  (void)s;
  if (kind_ != FoliationKind::GraphLeaf) return 1.0;
  const double slope = profile_slope(profile_, xi[0]);
  const double q = 1.0 - slope * slope;
  if (!(q > 0.0)) throw ValidityBreach("graph leaf is not space-like at xi = " + std::to_string(xi[0]));
  return std::sqrt(q);
}

bool Foliation::in_validity_region(const ChartPoint& xi) const {
  if (box_.period) return true;
  for (int i = 0; i < spatial_dims(mode_); ++i) {
    const auto a = static_cast<std::size_t>(i);
    if (xi[a] < box_.lo[a] || xi[a] > box_.hi[a]) return false;
  }
  return true;
}

ChartPoint Foliation::wrap(ChartPoint xi) const {
  if (!box_.period) return xi;
  const double p = *box_.period;
  for (int i = 0; i < spatial_dims(mode_); ++i) {
    const auto a = static_cast<std::size_t>(i);
    double u = std::fmod(xi[a] - box_.lo[a], p);
    if (u < 0.0) u += p;
    if (u >= p) u = 0.0;
    xi[a] = box_.lo[a] + u;
  }
  return xi;
}

ValidityReport Foliation::validity_scan(int resolution) const {
  if (resolution < 1) throw InvalidArgument("validity scan resolution must be positive");
  const int dims = spatial_dims(mode_);
  ValidityReport report;
  report.min_margin = std::numeric_limits<double>::infinity();

  std::array<int, 3> counts{1, 1, 1};
  for (int i = 0; i < dims; ++i) counts[static_cast<std::size_t>(i)] = resolution;
  auto coord = [&](int axis, int idx) {
    const auto a = static_cast<std::size_t>(axis);
    if (resolution == 1) return 0.5 * (box_.lo[a] + box_.hi[a]);
    return box_.lo[a] + (box_.hi[a] - box_.lo[a]) * idx / (resolution - 1);
  };
  for (int i = 0; i < counts[0]; ++i) {
    for (int j = 0; j < counts[1]; ++j) {
      for (int k = 0; k < counts[2]; ++k) {
        ChartPoint xi{coord(0, i), dims > 1 ? coord(1, j) : 0.0, dims > 2 ? coord(2, k) : 0.0};
        const FourVector g = gradient(leaf_point(offset_, xi));
        const double margin = minkowski_square(g) / (g[0] * g[0]);
        if (margin < report.min_margin) {
          report.min_margin = margin;
          report.worst_point = xi;
        }
      }
    }
  }
  report.passed = report.min_margin > 0.0;
  return report;
}

double frobenius_residual(const CovectorField& v, const FourVector& x, double h) {
  if (!(h > 0.0)) throw InvalidArgument("finite-difference step must be positive");
  const FourVector center = v(x);
  // dv[nu][lambda] = d_nu V_lambda
  std::array<std::array<double, 4>, 4> dv{};
  for (std::size_t nu = 0; nu < 4; ++nu) {
    FourVector xp = x, xm = x;
    xp[nu] += h;
    xm[nu] -= h;
    const FourVector vp = v(xp), vm = v(xm);
    for (std::size_t l = 0; l < 4; ++l) dv[nu][l] = (vp[l] - vm[l]) / (2.0 * h);
  }
  auto curl = [&](std::size_t a, std::size_t b) { return dv[a][b] - dv[b][a]; };
  double worst = 0.0;
  for (std::size_t mu = 0; mu < 4; ++mu) {
    for (std::size_t nu = mu + 1; nu < 4; ++nu) {
      for (std::size_t la = nu + 1; la < 4; ++la) {
        const double c = center[mu] * curl(nu, la) + center[nu] * curl(la, mu) + center[la] * curl(mu, nu);
        worst = std::max(worst, std::abs(c));
      }
    }
  }
  return worst;
}

CovectorField gradient_covector_field(const Foliation& f) {
  return [f](const FourVector& x) {
    const FourVector g = f.gradient(x);
    return FourVector{{g[0], -g[1], -g[2], -g[3]}};
  };
}

CovectorField twisted_field(double c) {
  return [c](const FourVector& x) { return FourVector{{1.0, 0.0, c * x[3], 0.0}}; };
}

}  // namespace hbd
