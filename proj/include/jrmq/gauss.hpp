// Standard-normal special functions: pdf, cdf, inverse cdf, first lower
// partial expectation, bivariate cdf, and the reflected-at-a-point variants
// used when a zero boundary is modelled by folding the innovation law.
//
// All functions accept +/-infinity where the domain is the extended reals
// and return the exact limit value.  Everything here is pure and
// thread-safe.

#pragma once

#include <limits>

namespace jrmq::gauss {

inline constexpr double inf = std::numeric_limits<double>::infinity();

// phi(z) = exp(-z^2/2) / sqrt(2 pi)
double normal_pdf(double z);

// Phi(z), absolute error below 1e-12 for finite z; exact at +/-inf.
double normal_cdf(double z);

// Phi^{-1}(p) for p in (0,1); throws std::domain_error otherwise.
double normal_inv_cdf(double p);

// M(z) = E[Z 1{Z<z}] = -phi(z); 0 at +/-inf.
double lower_partial_expectation(double z);

// Phi2(x, y, rho) for |rho| <= 1 (throws std::domain_error beyond).
// Absolute error below 1e-7 (in practice ~1e-15 for |rho| < 0.925).
double bivariate_normal_cdf(double x, double y, double rho);

// P(xlo < X <= xhi, ylo < Y <= yhi) via the four-term combination,
// clamped at zero so rounding never produces a negative mass.
double bivariate_rectangle(double xlo, double xhi, double ylo, double yhi,
                           double rho);

// Density of a standard normal reflected at ybar, valid for y >= ybar:
//   fbar(y) = phi(y) + phi(2 ybar - y).
double reflected_pdf(double y, double ybar);

// Fbar(y) = Phi(y) - Phi(2 ybar - y); a proper CDF on [ybar, inf).
double reflected_cdf(double y, double ybar);

// Integral of z fbar(z) over [ybar, y].  Differs from the raw combination
// M(y) + M(2 ybar - y) - 2 ybar Phi(2 ybar - y) by the constant that makes
// the value vanish at y = ybar; only differences enter the quantization
// formulas, so the normalization is free and this one matches quadrature.
double reflected_lpe(double y, double ybar);

} // namespace jrmq::gauss
