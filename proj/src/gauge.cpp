#include "isocluster/gauge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace isocluster {

namespace detail {

struct GaugeModel {
  virtual ~GaugeModel() = default;
  virtual double eval(Vec2 v) const = 0;
  // Called with v != 0.
  virtual Subgradient grad(Vec2 v) const = 0;
  virtual GaugeKind kind() const = 0;
  virtual std::string describe() const = 0;
  virtual bool c1() const { return true; }
  virtual bool strictly_convex() const { return true; }
  virtual bool symmetric() const = 0;
};

}  // namespace detail

namespace {

using detail::GaugeModel;

constexpr double kKinkTol = 1e-12;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

struct EuclideanModel final : GaugeModel {
  double eval(Vec2 v) const override { return norm(v); }
  Subgradient grad(Vec2 v) const override { return {v / norm(v), false}; }
  GaugeKind kind() const override { return GaugeKind::euclidean; }
  std::string describe() const override { return "euclidean"; }
  bool symmetric() const override { return true; }
};

struct LpModel final : GaugeModel {
  double p;
  explicit LpModel(double p_) : p(p_) {}

  double eval(Vec2 v) const override {
    const double ax = std::abs(v.x), ay = std::abs(v.y);
    const double m = std::max(ax, ay);
    if (m == 0.0) return 0.0;
    if (std::isinf(p)) return m;
    if (p == 1.0) return ax + ay;
    const double rx = ax / m, ry = ay / m;
    return m * std::pow(std::pow(rx, p) + std::pow(ry, p), 1.0 / p);
  }

  Subgradient grad(Vec2 v) const override {
    const double ax = std::abs(v.x), ay = std::abs(v.y);
    if (std::isinf(p)) {
      const double m = std::max(ax, ay);
      if (std::abs(ax - ay) <= kKinkTol * m) return {{0.5 * sgn(v.x), 0.5 * sgn(v.y)}, true};
      if (ax > ay) return {{sgn(v.x), 0.0}, false};
      return {{0.0, sgn(v.y)}, false};
    }
    if (p == 1.0) {
      const double m = std::max(ax, ay);
      const bool kink = std::min(ax, ay) <= kKinkTol * m;
      return {{sgn(v.x), sgn(v.y)}, kink};
    }
    const double n = eval(v);
    return {{sgn(v.x) * std::pow(ax / n, p - 1.0), sgn(v.y) * std::pow(ay / n, p - 1.0)}, false};
  }

  GaugeKind kind() const override { return GaugeKind::lp; }
  std::string describe() const override {
    if (std::isinf(p)) return "lp(inf)";
    std::ostringstream s;
    s << "lp(" << p << ")";
    return s.str();
  }
  bool c1() const override { return p > 1.0 && !std::isinf(p); }
  bool strictly_convex() const override { return p > 1.0 && !std::isinf(p); }
  bool symmetric() const override { return true; }
};

struct EllipseModel final : GaugeModel {
  double a, b, c;
  EllipseModel(double a_, double b_, double c_) : a(a_), b(b_), c(c_) {}
  Vec2 apply(Vec2 v) const { return {a * v.x + b * v.y, b * v.x + c * v.y}; }
  double eval(Vec2 v) const override { return std::sqrt(std::max(0.0, dot(v, apply(v)))); }
  Subgradient grad(Vec2 v) const override { return {apply(v) / eval(v), false}; }
  GaugeKind kind() const override { return GaugeKind::ellipse; }
  std::string describe() const override {
    std::ostringstream s;
    s << "ellipse([[" << a << "," << b << "],[" << b << "," << c << "]])";
    return s.str();
  }
  bool symmetric() const override { return true; }
};

// Unit ball B(c, r) with |c| < r.
struct DiskGauge {
  Vec2 c;
  double r;

  double eval(Vec2 v) const {
    const double vv = dot(v, v);
    if (vv == 0.0) return 0.0;
    const double vc = dot(v, c);
    const double disc = vc * vc + vv * (r * r - dot(c, c));
    // vv / (vc + sqrt(disc)) is the positive root of |v/t - c| = r, written to
    // avoid cancellation when vc < 0.
    const double s = std::sqrt(disc);
    if (vc >= 0.0) return vv / (vc + s);
    return (s - vc) / (r * r - dot(c, c));
  }

  Vec2 grad(Vec2 v) const {
    const Vec2 p = v / eval(v);
    const Vec2 nu = (p - c) / r;
    return nu / dot(p, nu);
  }
};

struct ShiftedDiskModel final : GaugeModel {
  DiskGauge disk;
  explicit ShiftedDiskModel(DiskGauge d) : disk(d) {}
  double eval(Vec2 v) const override { return disk.eval(v); }
  Subgradient grad(Vec2 v) const override { return {disk.grad(v), false}; }
  GaugeKind kind() const override { return GaugeKind::shifted_disk; }
  std::string describe() const override {
    std::ostringstream s;
    s << "shifted-disk(center=(" << disk.c.x << "," << disk.c.y << "), radius=" << disk.r << ")";
    return s.str();
  }
  bool symmetric() const override { return disk.c.x == 0.0 && disk.c.y == 0.0; }
};

struct SmoothedL1Model final : GaugeModel {
  double kappa;
  std::array<DiskGauge, 4> arcs;

  explicit SmoothedL1Model(double k) : kappa(k) {
    const double r = 1.0 / k;
    const double d = std::sqrt(r * r - 1.0);
    const double off = 1.0 - d;
    arcs = {DiskGauge{{off, 0.0}, r}, DiskGauge{{0.0, off}, r}, DiskGauge{{-off, 0.0}, r},
            DiskGauge{{0.0, -off}, r}};
  }

  double eval(Vec2 v) const override {
    double m = 0.0;
    for (const auto& a : arcs) m = std::max(m, a.eval(v));
    return m;
  }

  Subgradient grad(Vec2 v) const override {
    std::array<double, 4> vals{};
    for (int i = 0; i < 4; ++i) vals[i] = arcs[i].eval(v);
    const int best = static_cast<int>(std::max_element(vals.begin(), vals.end()) - vals.begin());
    int second = -1;
    for (int i = 0; i < 4; ++i)
      if (i != best && std::abs(vals[i] - vals[best]) <= kKinkTol * vals[best]) second = i;
    if (second < 0) return {arcs[best].grad(v), false};
    return {(arcs[best].grad(v) + arcs[second].grad(v)) * 0.5, true};
  }

  GaugeKind kind() const override { return GaugeKind::smoothed_l1; }
  std::string describe() const override {
    std::ostringstream s;
    s << "smoothed-l1(kappa=" << kappa << ")";
    return s.str();
  }
  bool c1() const override { return false; }
  bool symmetric() const override { return true; }
};

// Periodic cubic spline on knots x_0 < ... < x_{n-1} with period 2pi.
class PeriodicSpline {
 public:
  PeriodicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    std::vector<double> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double next = (i + 1 < n) ? x_[i + 1] : x_[0] + kTwoPi;
      h[i] = next - x_[i];
    }
    // Cyclic tridiagonal system for second derivatives, solved with the
    // Sherman-Morrison correction.
    std::vector<double> diag(n), lower(n), upper(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t im = (i + n - 1) % n, ip = (i + 1) % n;
      lower[i] = h[im];
      upper[i] = h[i];
      diag[i] = 2.0 * (h[im] + h[i]);
      rhs[i] = 6.0 * ((y_[ip] - y_[i]) / h[i] - (y_[i] - y_[im]) / h[im]);
    }
    m_ = solve_cyclic(lower, diag, upper, rhs);
    h_ = std::move(h);
  }

  double operator()(double t) const {
    t = std::fmod(t - x_[0], kTwoPi);
    if (t < 0.0) t += kTwoPi;
    t += x_[0];
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin());
    i = (i == 0) ? n - 1 : i - 1;
    const std::size_t ip = (i + 1) % n;
    const double h = h_[i];
    const double a = (x_[i] + h - t) / h, b = (t - x_[i]) / h;
    return a * y_[i] + b * y_[ip] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[ip]) * h * h / 6.0;
  }

 private:
  static std::vector<double> solve_tridiagonal(const std::vector<double>& a, std::vector<double> b,
                                               const std::vector<double>& c, std::vector<double> d) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    return x;
  }

  static std::vector<double> solve_cyclic(const std::vector<double>& a, const std::vector<double>& b,
                                          const std::vector<double>& c, const std::vector<double>& d) {
    const std::size_t n = b.size();
    const double alpha = a[0], beta = c[n - 1];
    const double gamma = -b[0];
    std::vector<double> bb = b;
    bb[0] = b[0] - gamma;
    bb[n - 1] = b[n - 1] - alpha * beta / gamma;
    const std::vector<double> x = solve_tridiagonal(a, bb, c, d);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    const std::vector<double> z = solve_tridiagonal(a, bb, c, u);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
    return out;
  }

  std::vector<double> x_, y_, h_, m_;
};

// Gradient of v -> |v| f(theta) is f u + f' u_perp.
constexpr double kAngularStep = 1e-6;

template <class Profile>
Vec2 profile_gradient(const Profile& f, Vec2 v) {
  const double th = polar_angle(v);
  const Vec2 u = unit(th);
  const double fv = f(th);
  const double df = (f(th + kAngularStep) - f(th - kAngularStep)) / (2.0 * kAngularStep);
  return u * fv + rotate_ccw(u) * df;
}

struct TabulatedModel final : GaugeModel {
  PeriodicSpline spline;
  std::size_t samples;
  bool sym = false;
  bool strict = true;

  TabulatedModel(std::vector<double> a, std::vector<double> v) : spline(std::move(a), std::move(v)) {
    samples = 0;
  }
  double eval(Vec2 v) const override {
    const double n = norm(v);
    if (n == 0.0) return 0.0;
    return n * spline(polar_angle(v));
  }
  Subgradient grad(Vec2 v) const override {
    return {profile_gradient([this](double t) { return spline(t); }, v), false};
  }
  GaugeKind kind() const override { return GaugeKind::tabulated; }
  std::string describe() const override {
    std::ostringstream s;
    s << "tabulated(" << samples << " samples)";
    return s.str();
  }
  bool strictly_convex() const override { return strict; }
  bool symmetric() const override { return sym; }
};

struct ProfileModel final : GaugeModel {
  std::function<double(Vec2)> profile;
  bool sym;
  ProfileModel(std::function<double(Vec2)> p, bool s) : profile(std::move(p)), sym(s) {}
  double eval(Vec2 v) const override {
    const double n = norm(v);
    if (n == 0.0) return 0.0;
    return n * profile(v / n);
  }
  Subgradient grad(Vec2 v) const override {
    return {profile_gradient([this](double t) { return profile(unit(t)); }, v), false};
  }
  GaugeKind kind() const override { return GaugeKind::profile; }
  std::string describe() const override { return "profile"; }
  bool symmetric() const override { return sym; }
};

struct TransformedModel final : GaugeModel {
  std::shared_ptr<const GaugeModel> base;
  double m00, m01, m10, m11;
  TransformedModel(std::shared_ptr<const GaugeModel> b, double a, double bb, double c, double d)
      : base(std::move(b)), m00(a), m01(bb), m10(c), m11(d) {}
  Vec2 apply(Vec2 v) const { return {m00 * v.x + m01 * v.y, m10 * v.x + m11 * v.y}; }
  Vec2 apply_transpose(Vec2 v) const { return {m00 * v.x + m10 * v.y, m01 * v.x + m11 * v.y}; }
  double eval(Vec2 v) const override { return base->eval(apply(v)); }
  Subgradient grad(Vec2 v) const override {
    const Subgradient s = base->grad(apply(v));
    return {apply_transpose(s.value), s.kink};
  }
  GaugeKind kind() const override { return GaugeKind::transformed; }
  std::string describe() const override { return base->describe() + " o linear"; }
  bool c1() const override { return base->c1(); }
  bool strictly_convex() const override { return base->strictly_convex(); }
  bool symmetric() const override { return base->symmetric(); }
};

struct SymmetrizedModel final : GaugeModel {
  std::shared_ptr<const GaugeModel> base;
  explicit SymmetrizedModel(std::shared_ptr<const GaugeModel> b) : base(std::move(b)) {}
  double eval(Vec2 v) const override { return 0.5 * (base->eval(v) + base->eval(-v)); }
  Subgradient grad(Vec2 v) const override {
    const Subgradient a = base->grad(v), b = base->grad(-v);
    return {(a.value - b.value) * 0.5, a.kink || b.kink};
  }
  GaugeKind kind() const override { return GaugeKind::symmetrized; }
  std::string describe() const override { return "sym(" + base->describe() + ")"; }
  bool c1() const override { return base->c1(); }
  bool strictly_convex() const override { return base->strictly_convex(); }
  bool symmetric() const override { return true; }
};

struct ScaledModel final : GaugeModel {
  std::shared_ptr<const GaugeModel> base;
  double s;
  ScaledModel(std::shared_ptr<const GaugeModel> b, double f) : base(std::move(b)), s(f) {}
  double eval(Vec2 v) const override { return s * base->eval(v); }
  Subgradient grad(Vec2 v) const override {
    const Subgradient g = base->grad(v);
    return {g.value * s, g.kink};
  }
  GaugeKind kind() const override { return GaugeKind::scaled; }
  std::string describe() const override {
    std::ostringstream o;
    o << s << "*" << base->describe();
    return o.str();
  }
  bool c1() const override { return base->c1(); }
  bool strictly_convex() const override { return base->strictly_convex(); }
  bool symmetric() const override { return base->symmetric(); }
};

}  // namespace

Gauge Gauge::euclidean() { return Gauge(std::make_shared<EuclideanModel>()); }

Gauge Gauge::lp(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("lp gauge needs p >= 1");
  if (p == 2.0) return Gauge(std::make_shared<LpModel>(2.0));
  return Gauge(std::make_shared<LpModel>(p));
}

Gauge Gauge::max_norm() { return lp(std::numeric_limits<double>::infinity()); }

Gauge Gauge::ellipse(double a, double b, double c) {
  if (!(a > 0.0 && a * c - b * b > 0.0)) throw std::invalid_argument("ellipse matrix must be positive definite");
  return Gauge(std::make_shared<EllipseModel>(a, b, c));
}

Gauge Gauge::smoothed_l1(double kappa) {
  if (!(kappa > 0.0 && kappa <= 1.0 / std::sqrt(2.0)))
    throw std::invalid_argument("smoothed-l1 curvature must lie in (0, 1/sqrt(2)]");
  return Gauge(std::make_shared<SmoothedL1Model>(kappa));
}

Gauge Gauge::shifted_disk(Vec2 center, double radius) {
  if (!(radius > 0.0 && norm(center) < radius))
    throw std::invalid_argument("shifted-disk needs the origin strictly inside the disk");
  return Gauge(std::make_shared<ShiftedDiskModel>(DiskGauge{center, radius}));
}

Gauge Gauge::tabulated(std::vector<double> angles, std::vector<double> values) {
  if (angles.size() != values.size() || angles.size() < 4)
    throw std::invalid_argument("tabulated gauge needs at least 4 (angle, value) samples");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i]))
      throw std::invalid_argument("tabulated gauge values must be positive");
    if (i > 0 && !(angles[i] > angles[i - 1]))
      throw std::invalid_argument("tabulated gauge angles must be strictly increasing");
  }
  if (!(angles.back() - angles.front() < kTwoPi))
    throw std::invalid_argument("tabulated gauge angles must span less than a full turn");
  const std::size_t n = angles.size();
  auto model = std::make_shared<TabulatedModel>(std::move(angles), std::move(values));
  model->samples = n;
  bool sym = true;
  for (int k = 0; k < 90 && sym; ++k) {
    const Vec2 u = unit(kTwoPi * k / 180.0);
    const double a = model->eval(u), b = model->eval(-u);
    sym = std::abs(a - b) <= 1e-12 * std::max(a, b);
  }
  model->sym = sym;
  Gauge g(model);
  model->strict = strict_convexity_margin(g, 64).value > 0.0;
  return g;
}

Gauge Gauge::from_profile(std::function<double(Vec2)> profile, bool symmetric) {
  return Gauge(std::make_shared<ProfileModel>(std::move(profile), symmetric));
}

double Gauge::eval(Vec2 v) const { return model_->eval(v); }

Vec2 Gauge::grad(Vec2 v) const { return subgradient(v).value; }

Subgradient Gauge::subgradient(Vec2 v) const {
  if (v.x == 0.0 && v.y == 0.0) throw std::invalid_argument("gauge gradient at the zero vector");
  return model_->grad(v);
}

GaugeKind Gauge::kind() const { return model_->kind(); }
std::string Gauge::describe() const { return model_->describe(); }
bool Gauge::is_c1() const { return model_->c1(); }
bool Gauge::is_strictly_convex() const { return model_->strictly_convex(); }
bool Gauge::is_symmetric() const { return model_->symmetric(); }

Gauge Gauge::precompose(double m00, double m01, double m10, double m11) const {
  if (m00 * m11 - m01 * m10 == 0.0) throw std::invalid_argument("singular linear map");
  return Gauge(std::make_shared<TransformedModel>(model_, m00, m01, m10, m11));
}

Gauge Gauge::rotated(double angle) const {
  // Ball rotated by +angle means eval(R(-angle) v).
  const double c = std::cos(angle), s = std::sin(angle);
  return precompose(c, s, -s, c);
}

Gauge Gauge::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("gauge scale must be positive");
  return Gauge(std::make_shared<ScaledModel>(model_, factor));
}

Gauge tangent_gauge(const Gauge& h) { return h.precompose(0.0, 1.0, -1.0, 0.0); }

Gauge symmetrized(const Gauge& g) { return Gauge(std::make_shared<SymmetrizedModel>(g.model_)); }

}  // namespace isocluster
