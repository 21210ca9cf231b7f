// One-dimensional recursive marginal quantization of the independent
// process: each Euler-step marginal is a mixture of affine Gaussian updates
// from the previous quantizer and is re-quantized by Newton-Raphson, with
// optional reflecting or absorbing boundary at zero.

#pragma once

#include "jrmq/matrix.hpp"
#include "jrmq/model.hpp"
#include "jrmq/quantizer.hpp"

namespace jrmq {

// Standardized region boundaries for one source term: edges[j] / edges[j+1]
// delimit target region j in innovation space.  Outer entries are +/-inf
// (orientation flips with the sign of m).  degenerate marks m == 0, where
// the update is a Dirac mass handled analytically by the caller.
struct RegionBoundaries {
  std::vector<double> edges;
  bool degenerate = false;
};

RegionBoundaries region_boundaries_1d(const Quantizer1D& quantizer_next,
                                      const AffinePair& pair);

// Stationary quantizer of N(mean, std^2); deterministic quantile start.
Quantizer1D init_gaussian_quantizer(int n, double mean, double stddev,
                                    const NewtonSettings& settings);

// One recursion step: quantize the marginal implied by prev under the model
// dynamics.  The initial guess is prev itself (step one starts from
// moment-matched quantiles).
Quantizer1D rmq_step(const Quantizer1D& prev, const ModelSpec& spec,
                     double dt, int n_next, BoundaryMode mode,
                     const NewtonSettings& settings);

// Row-stochastic transition matrix between two adjacent quantizers; under
// absorbing mode rows sum to one minus the per-row absorbed mass.
Matrix transition_matrix_1d(const Quantizer1D& prev, const Quantizer1D& next,
                            const ModelSpec& spec, double dt,
                            BoundaryMode mode);

// Symmetric tridiagonal Newton system solve; see solve_tridiagonal.
std::vector<double> newton_solve_tridiagonal(const std::vector<double>& diag,
                                             const std::vector<double>& off,
                                             const std::vector<double>& rhs);

// Mixture of affine updates reached from prev under the model over dt.
std::vector<MixtureTerm> x_mixture(const Quantizer1D& prev,
                                   const ModelSpec& spec, double dt,
                                   BoundaryMode mode);

} // namespace jrmq
