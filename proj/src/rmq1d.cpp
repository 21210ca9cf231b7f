#include "jrmq/rmq1d.hpp"

#include <algorithm>
#include <cmath>

#include "jrmq/gauss.hpp"

namespace jrmq {

RegionBoundaries region_boundaries_1d(const Quantizer1D& quantizer_next,
                                      const AffinePair& pair) {
  if (pair.m == 0.0) {
    return {{}, true};
  }
  MixtureTerm t = make_term(pair, 1.0, BoundaryMode::none);
  return {standardized_edges(quantizer_next.codewords, t), false};
}

Quantizer1D init_gaussian_quantizer(int n, double mean, double stddev,
                                    const NewtonSettings& settings) {
  Quantizer1D q;
  q.time_index = 0;
  if (n == 1 || stddev == 0.0) {
    q.codewords = {mean};
    q.probabilities = {1.0};
    return q;
  }
  const AffinePair pair{stddev, mean};
  const std::vector<MixtureTerm> terms = {
      make_term(pair, 1.0, BoundaryMode::none)};
  q.codewords = newton_optimize(initial_codewords(n, pair, BoundaryMode::none),
                                terms, settings);
  q.probabilities = term_region_masses(q.codewords, terms[0]);
  return q;
}

std::vector<MixtureTerm> x_mixture(const Quantizer1D& prev,
                                   const ModelSpec& spec, double dt,
                                   BoundaryMode mode) {
  std::vector<MixtureTerm> terms;
  terms.reserve(prev.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    terms.push_back(make_term(affine_x(spec, prev.codewords[i], dt),
                              prev.probabilities[i], mode));
  }
  return terms;
}

Quantizer1D rmq_step(const Quantizer1D& prev, const ModelSpec& spec,
                     double dt, int n_next, BoundaryMode mode,
                     const NewtonSettings& settings) {
  const auto terms = x_mixture(prev, spec, dt, mode);

  Quantizer1D next;
  next.time_index = prev.time_index + 1;
  next.absorbed_mass = prev.absorbed_mass;

  // fully deterministic marginal collapses to a Dirac quantizer
  const bool all_dirac =
      std::all_of(terms.begin(), terms.end(),
                  [](const MixtureTerm& t) { return t.m == 0.0; });
  if (all_dirac &&
      std::all_of(terms.begin(), terms.end(), [&](const MixtureTerm& t) {
        return t.c == terms.front().c;
      })) {
    const double c = terms.front().c;
    if (mode == BoundaryMode::absorbing && c <= 0.0) {
      next.codewords = {0.0};
      next.probabilities = {0.0};
      next.absorbed_mass = 1.0;
    } else {
      next.codewords = {mode == BoundaryMode::reflecting ? std::fabs(c) : c};
      next.probabilities = {1.0 - next.absorbed_mass};
    }
    return next;
  }

  std::vector<double> initial;
  if (prev.size() == static_cast<std::size_t>(n_next)) {
    initial = prev.codewords;
  } else if (terms.size() == 1) {
    initial = initial_codewords(n_next, {terms[0].m, terms[0].c}, mode);
  } else {
    // moment-matched quantile spread over the untruncated mixture
    double mass = 0.0, mean = 0.0, second = 0.0;
    for (const auto& t : terms) {
      mass += t.w;
      mean += t.w * t.c;
      second += t.w * (t.m * t.m + t.c * t.c);
    }
    mean /= mass;
    const double var = std::max(second / mass - mean * mean, 1e-300);
    initial = initial_codewords(n_next, {std::sqrt(var), mean}, mode);
  }

  next.codewords = newton_optimize(std::move(initial), terms, settings);
  next.probabilities.assign(n_next, 0.0);
  double absorbed = 0.0;
  for (const auto& t : terms) {
    double term_absorbed = 0.0;
    const auto mass = term_region_masses(next.codewords, t, &term_absorbed);
    for (int j = 0; j < n_next; ++j) {
      next.probabilities[j] += t.w * mass[j];
    }
    absorbed += t.w * term_absorbed;
  }
  next.absorbed_mass += absorbed;
  return next;
}

Matrix transition_matrix_1d(const Quantizer1D& prev, const Quantizer1D& next,
                            const ModelSpec& spec, double dt,
                            BoundaryMode mode) {
  Matrix p(prev.size(), next.size());
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const auto t =
        make_term(affine_x(spec, prev.codewords[i], dt), 1.0, mode);
    const auto mass = term_region_masses(next.codewords, t);
    for (std::size_t j = 0; j < next.size(); ++j) {
      p(i, j) = mass[j];
    }
  }
  return p;
}

std::vector<double> newton_solve_tridiagonal(const std::vector<double>& diag,
                                             const std::vector<double>& off,
                                             const std::vector<double>& rhs) {
  return solve_tridiagonal(diag, off, rhs);
}

} // namespace jrmq
