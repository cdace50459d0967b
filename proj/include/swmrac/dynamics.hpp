#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "swmrac/matrix.hpp"

namespace swmrac {

// Known basis Psi(x) of the matched uncertainty.
struct BasisSpec {
  enum class Kind { Tanh, Monomials, Sinusoid, Table };

  Kind kind = Kind::Tanh;
  std::size_t state_dim = 0;  // n

  real gain = 1;               // Tanh: tanh(gain * x_i); Sinusoid: sin(gain * x_i)
  std::size_t degree = 1;      // Monomials: x_i^1 .. x_i^degree for every i
  std::vector<real> knots;     // Table: strictly increasing abscissae
  std::vector<real> values;    // Table: ordinates, clamped outside the knots

  static BasisSpec tanh(std::size_t n, real gain = 1);
  static BasisSpec monomials(std::size_t n, std::size_t degree);
  static BasisSpec sinusoid(std::size_t n, real frequency);
  static BasisSpec table(std::size_t n, std::vector<real> knots, std::vector<real> values);

  std::size_t dim() const;  // p
  Vector eval(std::span<const real> x) const;
  // Throws DomainError on malformed parameters.
  void validate() const;
  std::string kind_name() const;
};

struct PlantSegment {
  Matrix A;          // n x n
  Matrix B;          // n x m
  Matrix theta_unc;  // p x m
  real t_start = 0;
};

struct SwitchedPlantSpec {
  std::vector<PlantSegment> segments;
  Vector x0;
  BasisSpec basis;

  std::size_t n() const { return x0.size(); }
  std::size_t m() const { return segments.empty() ? 0 : segments.front().B.cols(); }
  std::size_t p() const { return basis.dim(); }
  // Shapes, strictly increasing switch instants, finite entries.
  void validate() const;
};

// One channel of r(t).
struct ReferenceChannel {
  enum class Kind { Constant, ExpDecay, Sinusoid, PiecewiseConstant };

  Kind kind = Kind::Constant;
  real a = 0;  // Constant: value; ExpDecay: a*exp(-b t) + c; Sinusoid: a*sin(b t + phase) + c
  real b = 0;
  real c = 0;
  real phase = 0;
  std::vector<real> times;   // PiecewiseConstant: breakpoints, value k holds on [times[k], times[k+1])
  std::vector<real> levels;

  static ReferenceChannel constant(real v);
  static ReferenceChannel exp_decay(real a, real b, real c);
  static ReferenceChannel sinusoid(real amplitude, real frequency, real phase, real offset);
  static ReferenceChannel piecewise_constant(std::vector<real> times, std::vector<real> levels);

  real eval(real t) const;
  void validate() const;
};

struct ReferenceModelSpec {
  Matrix A_ref;  // n x n, Hurwitz
  Matrix B_ref;  // n x m
  Vector x0_ref;
  std::vector<ReferenceChannel> r;  // m channels

  Vector reference(real t) const;
  void validate() const;
};

// theta = [Kx^T; Kr^T; theta_unc], (n+m+p) x m.
struct IdealParameters {
  Matrix Kx;  // m x n
  Matrix Kr;  // m x m
  Matrix theta;
};

std::size_t active_segment(real t, const SwitchedPlantSpec& spec);

Vector plant_derivative(std::span<const real> x, std::span<const real> u, const PlantSegment& seg,
                        const BasisSpec& basis);

Vector ref_model_derivative(std::span<const real> x_ref, std::span<const real> r,
                            const ReferenceModelSpec& rm);

// omega = [x; r; -Psi(x)].
Vector control_regressor(std::span<const real> x, std::span<const real> r, const BasisSpec& basis);

// u = theta_hat^T omega.
Vector control_law(const Matrix& theta_hat, std::span<const real> omega);

// Solves the matching conditions A + B Kx = A_ref, B Kr = B_ref.
// Throws AssumptionViolation when B is rank deficient or the residual of
// either identity exceeds `tol`.
IdealParameters ideal_parameters(const PlantSegment& seg, const ReferenceModelSpec& rm,
                                 real tol = 1e-8L);

}  // namespace swmrac
