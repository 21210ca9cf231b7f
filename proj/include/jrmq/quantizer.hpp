// Core machinery for quantizing a Gaussian-mixture marginal: the mixture is
// a set of affine Euler updates m Z + c with probability weights, possibly
// truncated (absorbing) or folded (reflecting) at zero.  The distortion,
// gradient and tridiagonal Hessian are in closed form, so the quantizer is
// found by a damped Newton-Raphson iteration.  Both the one-dimensional RMQ
// and the joint algorithm reduce to this after flattening their mixtures.

#pragma once

#include <vector>

#include "jrmq/errors.hpp"
#include "jrmq/model.hpp"

namespace jrmq {

enum class BoundaryMode { none, reflecting, absorbing };

const char* to_string(BoundaryMode mode);
BoundaryMode boundary_from_string(const std::string& s);

struct NewtonSettings {
  int max_iterations = 50;
  // convergence when max|gradient| <= gradient_tolerance * max|codeword|
  double gradient_tolerance = 1e-9;
  double damping = 1.0;  // initial Newton step scale, halved on rejection
};

struct Quantizer1D {
  int time_index = 0;
  std::vector<double> codewords;      // strictly ascending
  std::vector<double> probabilities;  // same length, nonnegative
  double absorbed_mass = 0.0;         // nonzero only under absorbing mode

  std::size_t size() const noexcept { return codewords.size(); }
};

// One mixture component.  zbar = -c/m is the innovation-space image of the
// zero boundary; meaningful only when mode != none (then m > 0 is required).
struct MixtureTerm {
  double m = 0.0;
  double c = 0.0;
  double w = 0.0;
  BoundaryMode mode = BoundaryMode::none;
  double zbar = 0.0;
};

MixtureTerm make_term(const AffinePair& pair, double weight,
                      BoundaryMode mode);

struct TridiagonalHessian {
  std::vector<double> diag;
  std::vector<double> off;
};

// Symmetric tridiagonal solve (Thomas algorithm), O(N).
// Throws SingularSystemError on a vanishing pivot.
std::vector<double> solve_tridiagonal(const std::vector<double>& diag,
                                      const std::vector<double>& off,
                                      const std::vector<double>& rhs);

// N+1 standardized region edges in region order: edges[v] and edges[v+1]
// delimit region v in innovation space.  Outer edges are +/-inf oriented by
// the sign of m; under a boundary mode all edges are clipped at zbar.
// Requires term.m != 0.
std::vector<double> standardized_edges(const std::vector<double>& codewords,
                                       const MixtureTerm& term);

double mixture_distortion(const std::vector<double>& codewords,
                          const std::vector<MixtureTerm>& terms);

std::vector<double> mixture_gradient(const std::vector<double>& codewords,
                                     const std::vector<MixtureTerm>& terms);

TridiagonalHessian mixture_hessian(const std::vector<double>& codewords,
                                   const std::vector<MixtureTerm>& terms);

// Region masses of one term at the given codewords (conditional
// probabilities, no weight applied).  With absorbing mode the truncated
// mass is added to *absorbed when non-null.
std::vector<double> term_region_masses(const std::vector<double>& codewords,
                                       const MixtureTerm& term,
                                       double* absorbed = nullptr);

struct NewtonReport {
  int iterations = 0;
  double gradient_norm = 0.0;
};

// Damped Newton minimization of the mixture distortion.  Steps violating
// codeword ordering (or positivity under a zero boundary) or increasing the
// distortion are halved; failure raises ConvergenceError.
std::vector<double> newton_optimize(std::vector<double> initial,
                                    const std::vector<MixtureTerm>& terms,
                                    const NewtonSettings& settings,
                                    NewtonReport* report = nullptr);

// Quantile-spread initial codewords for a single affine update under the
// given boundary mode.  Requires pair.m != 0.
std::vector<double> initial_codewords(int n, const AffinePair& pair,
                                      BoundaryMode mode);

} // namespace jrmq
