#include "swmrac/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "swmrac/matkernel.hpp"

namespace swmrac {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_len(std::span<const real> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Basis

BasisSpec BasisSpec::tanh(std::size_t n, real gain) {
  BasisSpec b;
  b.kind = Kind::Tanh;
  b.state_dim = n;
  b.gain = gain;
  return b;
}

BasisSpec BasisSpec::monomials(std::size_t n, std::size_t degree) {
  BasisSpec b;
  b.kind = Kind::Monomials;
  b.state_dim = n;
  b.degree = degree;
  return b;
}

BasisSpec BasisSpec::sinusoid(std::size_t n, real frequency) {
  BasisSpec b;
  b.kind = Kind::Sinusoid;
  b.state_dim = n;
  b.gain = frequency;
  return b;
}

BasisSpec BasisSpec::table(std::size_t n, std::vector<real> knots, std::vector<real> values) {
  BasisSpec b;
  b.kind = Kind::Table;
  b.state_dim = n;
  b.knots = std::move(knots);
  b.values = std::move(values);
  return b;
}

std::size_t BasisSpec::dim() const {
  return kind == Kind::Monomials ? state_dim * degree : state_dim;
}

std::string BasisSpec::kind_name() const {
  switch (kind) {
    case Kind::Tanh: return "tanh";
    case Kind::Monomials: return "monomials";
    case Kind::Sinusoid: return "sinusoid";
    case Kind::Table: return "table";
  }
  return "?";
}

void BasisSpec::validate() const {
  if (state_dim == 0) throw DomainError("basis: state dimension must be positive");
  if (!std::isfinite(gain)) throw DomainError("basis: gain must be finite");
  if (kind == Kind::Monomials && degree == 0) throw DomainError("basis: monomial degree must be >= 1");
  if (kind == Kind::Table) {
    if (knots.size() < 2 || knots.size() != values.size())
      throw DomainError("basis: table needs >= 2 knots and one value per knot");
    for (std::size_t k = 1; k < knots.size(); ++k)
      if (!(knots[k] > knots[k - 1])) throw DomainError("basis: table knots must increase strictly");
    if (!swmrac::all_finite(knots) || !swmrac::all_finite(values))
      throw DomainError("basis: table entries must be finite");
  }
}

Vector BasisSpec::eval(std::span<const real> x) const {
  require_len(x, state_dim, "basis");
  Vector psi;
  psi.reserve(dim());
  switch (kind) {
    case Kind::Tanh:
      for (real xi : x) psi.push_back(std::tanh(gain * xi));
      break;
    case Kind::Sinusoid:
      for (real xi : x) psi.push_back(std::sin(gain * xi));
      break;
    case Kind::Monomials:
      for (real xi : x) {
        real pw = 1;
        for (std::size_t d = 0; d < degree; ++d) psi.push_back(pw *= xi);
      }
      break;
    case Kind::Table:
      for (real xi : x) {
        if (xi <= knots.front()) {
          psi.push_back(values.front());
        } else if (xi >= knots.back()) {
          psi.push_back(values.back());
        } else {
          const auto it = std::upper_bound(knots.begin(), knots.end(), xi);
          const std::size_t k = static_cast<std::size_t>(it - knots.begin());
          const real w = (xi - knots[k - 1]) / (knots[k] - knots[k - 1]);
          psi.push_back(values[k - 1] + w * (values[k] - values[k - 1]));
        }
      }
      break;
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Plant

void SwitchedPlantSpec::validate() const {
  if (segments.empty()) throw DomainError("plant: at least one segment is required");
  if (x0.empty()) throw DomainError("plant: x0 must be non-empty");
  basis.validate();
  if (basis.state_dim != n())
    throw DimensionError("plant: basis state dimension " + std::to_string(basis.state_dim) +
                         " does not match n = " + std::to_string(n()));
  const std::size_t nn = n(), mm = m(), pp = p();
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string tag = "plant segment " + std::to_string(i);
    if (s.A.rows() != nn || s.A.cols() != nn) throw DimensionError(tag + ": A is " + shape(s.A));
    if (s.B.rows() != nn || s.B.cols() != mm || mm == 0)
      throw DimensionError(tag + ": B is " + shape(s.B));
    if (s.theta_unc.rows() != pp || s.theta_unc.cols() != mm)
      throw DimensionError(tag + ": theta_unc is " + shape(s.theta_unc) + ", expected " +
                           std::to_string(pp) + "x" + std::to_string(mm));
    if (!s.A.all_finite() || !s.B.all_finite() || !s.theta_unc.all_finite() ||
        !std::isfinite(s.t_start))
      throw DomainError(tag + ": non-finite entry");
    if (i > 0 && !(s.t_start > segments[i - 1].t_start))
      throw DomainError(tag + ": switch instants must increase strictly");
  }
  if (!swmrac::all_finite(x0)) throw DomainError("plant: non-finite x0");
}

std::size_t active_segment(real t, const SwitchedPlantSpec& spec) {
  if (spec.segments.empty()) throw DomainError("active_segment: no segments");
  if (t < spec.segments.front().t_start)
    throw DomainError("active_segment: t precedes the first segment");
  std::size_t k = 0;
  while (k + 1 < spec.segments.size() && spec.segments[k + 1].t_start <= t) ++k;
  return k;
}

Vector plant_derivative(std::span<const real> x, std::span<const real> u, const PlantSegment& seg,
                        const BasisSpec& basis) {
  require_len(x, seg.A.rows(), "plant_derivative: x");
  require_len(u, seg.B.cols(), "plant_derivative: u");
  const Vector psi = basis.eval(x);
  require_len(psi, seg.theta_unc.rows(), "plant_derivative: basis");
  Vector total(u.begin(), u.end());
  const Vector unc = seg.theta_unc.transpose() * std::span<const real>(psi);
  axpy(total, unc, 1);
  Vector dx = seg.A * x;
  axpy(dx, seg.B * std::span<const real>(total), 1);
  return dx;
}

// ---------------------------------------------------------------------------
// Reference model

ReferenceChannel ReferenceChannel::constant(real v) {
  ReferenceChannel c;
  c.kind = Kind::Constant;
  c.a = v;
  return c;
}

ReferenceChannel ReferenceChannel::exp_decay(real a, real b, real c) {
  ReferenceChannel ch;
  ch.kind = Kind::ExpDecay;
  ch.a = a;
  ch.b = b;
  ch.c = c;
  return ch;
}

ReferenceChannel ReferenceChannel::sinusoid(real amplitude, real frequency, real phase, real offset) {
  ReferenceChannel ch;
  ch.kind = Kind::Sinusoid;
  ch.a = amplitude;
  ch.b = frequency;
  ch.phase = phase;
  ch.c = offset;
  return ch;
}

ReferenceChannel ReferenceChannel::piecewise_constant(std::vector<real> times,
                                                      std::vector<real> levels) {
  ReferenceChannel ch;
  ch.kind = Kind::PiecewiseConstant;
  ch.times = std::move(times);
  ch.levels = std::move(levels);
  return ch;
}

void ReferenceChannel::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(phase))
    throw DomainError("reference channel: non-finite parameter");
  if (kind == Kind::PiecewiseConstant) {
    if (times.empty() || times.size() != levels.size())
      throw DomainError("reference channel: piecewise_constant needs matching times/levels");
    for (std::size_t k = 1; k < times.size(); ++k)
      if (!(times[k] > times[k - 1]))
        throw DomainError("reference channel: breakpoints must increase strictly");
  }
}

real ReferenceChannel::eval(real t) const {
  switch (kind) {
    case Kind::Constant: return a;
    case Kind::ExpDecay: return a * std::exp(-b * t) + c;
    case Kind::Sinusoid: return a * std::sin(b * t + phase) + c;
    case Kind::PiecewiseConstant: {
      if (t < times.front()) return levels.front();
      const auto it = std::upper_bound(times.begin(), times.end(), t);
      return levels[static_cast<std::size_t>(it - times.begin()) - 1];
    }
  }
  return 0;
}

Vector ReferenceModelSpec::reference(real t) const {
  Vector v(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) v[k] = r[k].eval(t);
  return v;
}

void ReferenceModelSpec::validate() const {
  const std::size_t n = A_ref.rows();
  if (n == 0 || !A_ref.is_square()) throw DimensionError("reference model: A_ref is " + shape(A_ref));
  if (B_ref.rows() != n) throw DimensionError("reference model: B_ref is " + shape(B_ref));
  if (x0_ref.size() != n) throw DimensionError("reference model: x0_ref length mismatch");
  if (r.size() != B_ref.cols())
    throw DimensionError("reference model: " + std::to_string(r.size()) +
                         " reference channels for " + std::to_string(B_ref.cols()) + " inputs");
  if (!A_ref.all_finite() || !B_ref.all_finite() || !swmrac::all_finite(x0_ref))
    throw DomainError("reference model: non-finite entry");
  for (const auto& ch : r) ch.validate();
  if (!is_hurwitz(A_ref)) throw DomainError("reference model: A_ref is not Hurwitz");
}

Vector ref_model_derivative(std::span<const real> x_ref, std::span<const real> r,
                            const ReferenceModelSpec& rm) {
  require_len(x_ref, rm.A_ref.rows(), "ref_model_derivative: x_ref");
  require_len(r, rm.B_ref.cols(), "ref_model_derivative: r");
  Vector d = rm.A_ref * x_ref;
  axpy(d, rm.B_ref * r, 1);
  return d;
}

// ---------------------------------------------------------------------------
// Controller structure

Vector control_regressor(std::span<const real> x, std::span<const real> r, const BasisSpec& basis) {
  const Vector psi = basis.eval(x);
  Vector omega;
  omega.reserve(x.size() + r.size() + psi.size());
  omega.insert(omega.end(), x.begin(), x.end());
  omega.insert(omega.end(), r.begin(), r.end());
  for (real v : psi) omega.push_back(-v);
  return omega;
}

Vector control_law(const Matrix& theta_hat, std::span<const real> omega) {
  require_len(omega, theta_hat.rows(), "control_law: omega");
  Vector u(theta_hat.cols(), 0);
  for (std::size_t i = 0; i < theta_hat.rows(); ++i)
    for (std::size_t j = 0; j < theta_hat.cols(); ++j) u[j] += theta_hat(i, j) * omega[i];
  return u;
}

IdealParameters ideal_parameters(const PlantSegment& seg, const ReferenceModelSpec& rm, real tol) {
  const std::size_t n = seg.A.rows();
  const std::size_t m = seg.B.cols();
  if (rm.A_ref.rows() != n || rm.B_ref.cols() != m || seg.B.rows() != n)
    throw DimensionError("ideal_parameters: plant and reference model shapes disagree");

  // Left inverse: B^{-1} for square B, (B^T B)^{-1} B^T otherwise.
  Matrix left_inv;
  try {
    if (n == m) {
      left_inv = invert(seg.B);
    } else {
      const Matrix bt = seg.B.transpose();
      left_inv = invert(bt * seg.B) * bt;
    }
  } catch (const SingularMatrixError& e) {
    throw AssumptionViolation("matching conditions unsolvable: B is rank deficient (det = " +
                              std::to_string(static_cast<double>(e.det())) + ")");
  }

  IdealParameters ip;
  ip.Kx = left_inv * (rm.A_ref - seg.A);
  ip.Kr = left_inv * rm.B_ref;

  const real rx = (seg.A + seg.B * ip.Kx - rm.A_ref).max_abs();
  const real rr = (seg.B * ip.Kr - rm.B_ref).max_abs();
  if (rx > tol || rr > tol) {
    throw AssumptionViolation("matching conditions unsolvable: residuals " +
                              std::to_string(static_cast<double>(rx)) + " (A) and " +
                              std::to_string(static_cast<double>(rr)) + " (B)");
  }

  const std::size_t p = seg.theta_unc.rows();
  ip.theta = Matrix(n + m + p, m);
  ip.theta.set_block(0, 0, ip.Kx.transpose());
  ip.theta.set_block(n, 0, ip.Kr.transpose());
  ip.theta.set_block(n + m, 0, seg.theta_unc);
  return ip;
}

}  // namespace swmrac
