#include "jrmq/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jrmq/gauss.hpp"

namespace jrmq {

namespace {

using gauss::inf;

double sign_of(double m) { return m < 0.0 ? -1.0 : 1.0; }

// Partial second moment of a standard normal: K(z) = int_{-inf}^z t^2 phi(t)
// dt = Phi(z) - z phi(z).
double normal_m2(double z) {
  if (z == inf) return 1.0;
  if (z == -inf) return 0.0;
  return gauss::normal_cdf(z) - z * gauss::normal_pdf(z);
}

// Same for the law reflected at zbar, integrated from zbar.
double reflected_m2(double z, double zbar) {
  if (z <= zbar) return 0.0;
  const double mirrored = z == inf ? -inf : 2.0 * zbar - z;
  return normal_m2(z) - normal_m2(mirrored) +
         4.0 * zbar * zbar * (gauss::normal_cdf(zbar) -
                              gauss::normal_cdf(mirrored)) -
         4.0 * zbar * (gauss::lower_partial_expectation(zbar) -
                       gauss::lower_partial_expectation(mirrored));
}

// Innovation-law view of one mixture term.
struct TermLaw {
  bool reflected;
  double zbar;

  double F(double z) const {
    return reflected ? gauss::reflected_cdf(std::max(z, zbar), zbar)
                     : gauss::normal_cdf(z);
  }
  double f(double z) const {
    return reflected ? gauss::reflected_pdf(std::max(z, zbar), zbar)
                     : gauss::normal_pdf(z);
  }
  double M(double z) const {
    return reflected ? gauss::reflected_lpe(std::max(z, zbar), zbar)
                     : gauss::lower_partial_expectation(z);
  }
  double K(double z) const {
    return reflected ? reflected_m2(z, zbar) : normal_m2(z);
  }
};

TermLaw law_of(const MixtureTerm& t) {
  return {t.mode == BoundaryMode::reflecting, t.zbar};
}

bool is_dirac(const MixtureTerm& t) { return t.m == 0.0; }

// Index of the region owning the point c (ties to the lower codeword).
std::size_t dirac_region(const std::vector<double>& cw, double c) {
  std::size_t v = 0;
  while (v + 1 < cw.size() && c > 0.5 * (cw[v] + cw[v + 1])) ++v;
  return v;
}

double dirac_location(const MixtureTerm& t) {
  if (t.mode == BoundaryMode::reflecting) return std::fabs(t.c);
  return t.c;
}

bool strictly_ascending(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] > v[i - 1])) return false;
  }
  return true;
}

double codeword_scale(const std::vector<double>& cw) {
  double s = 0.0;
  for (double y : cw) s = std::max(s, std::fabs(y));
  return std::max(s, 1e-300);
}

} // namespace

const char* to_string(BoundaryMode mode) {
  switch (mode) {
    case BoundaryMode::none: return "none";
    case BoundaryMode::reflecting: return "reflecting";
    case BoundaryMode::absorbing: return "absorbing";
  }
  return "?";
}

BoundaryMode boundary_from_string(const std::string& s) {
  if (s == "none") return BoundaryMode::none;
  if (s == "reflecting") return BoundaryMode::reflecting;
  if (s == "absorbing") return BoundaryMode::absorbing;
  throw ConfigError("unknown boundary mode: " + s);
}

MixtureTerm make_term(const AffinePair& pair, double weight,
                      BoundaryMode mode) {
  if (mode != BoundaryMode::none && pair.m < 0.0) {
    throw std::invalid_argument(
        "zero-boundary modes require nonnegative step diffusion");
  }
  MixtureTerm t;
  t.m = pair.m;
  t.c = pair.c;
  t.w = weight;
  t.mode = mode;
  t.zbar = (mode == BoundaryMode::none || pair.m == 0.0)
               ? -inf
               : -pair.c / pair.m;
  return t;
}

std::vector<double> solve_tridiagonal(const std::vector<double>& diag,
                                      const std::vector<double>& off,
                                      const std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  if (off.size() + 1 != n || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: inconsistent dimensions");
  }
  std::vector<double> cp(n, 0.0), x(n, 0.0);
  double den = diag[0];
  if (!(std::fabs(den) > 1e-300)) {
    throw SingularSystemError("solve_tridiagonal: zero pivot at row 0");
  }
  if (n > 1) cp[0] = off[0] / den;
  x[0] = rhs[0] / den;
  for (std::size_t i = 1; i < n; ++i) {
    den = diag[i] - off[i - 1] * cp[i - 1];
    if (!(std::fabs(den) > 1e-300)) {
      throw SingularSystemError("solve_tridiagonal: zero pivot at row " +
                                std::to_string(i));
    }
    if (i + 1 < n) cp[i] = off[i] / den;
    x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / den;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    x[i] -= cp[i] * x[i + 1];
  }
  return x;
}

std::vector<double> standardized_edges(const std::vector<double>& codewords,
                                       const MixtureTerm& term) {
  const std::size_t n = codewords.size();
  std::vector<double> e(n + 1);
  const double s = sign_of(term.m);
  e[0] = -s * inf;
  for (std::size_t v = 1; v < n; ++v) {
    e[v] = (0.5 * (codewords[v - 1] + codewords[v]) - term.c) / term.m;
  }
  e[n] = s * inf;
  if (term.mode != BoundaryMode::none) {
    for (double& z : e) z = std::max(z, term.zbar);
  }
  return e;
}

std::vector<double> term_region_masses(const std::vector<double>& codewords,
                                       const MixtureTerm& term,
                                       double* absorbed) {
  const std::size_t n = codewords.size();
  std::vector<double> mass(n, 0.0);
  if (is_dirac(term)) {
    if (term.mode == BoundaryMode::absorbing && term.c <= 0.0) {
      if (absorbed) *absorbed += 1.0;
      return mass;
    }
    mass[dirac_region(codewords, dirac_location(term))] = 1.0;
    return mass;
  }
  const auto law = law_of(term);
  const auto e = standardized_edges(codewords, term);
  const double s = sign_of(term.m);
  double prev = law.F(e[0]);
  if (term.mode == BoundaryMode::absorbing && absorbed) {
    *absorbed += prev;  // mass below the truncation point
  }
  for (std::size_t v = 0; v < n; ++v) {
    const double next = law.F(e[v + 1]);
    mass[v] = std::max(0.0, s * (next - prev));
    prev = next;
  }
  return mass;
}

double mixture_distortion(const std::vector<double>& codewords,
                          const std::vector<MixtureTerm>& terms) {
  long double total = 0.0;
  const std::size_t n = codewords.size();
  for (const auto& t : terms) {
    if (t.w == 0.0) continue;
    if (is_dirac(t)) {
      if (t.mode == BoundaryMode::absorbing && t.c <= 0.0) continue;
      const double loc = dirac_location(t);
      const double d = loc - codewords[dirac_region(codewords, loc)];
      total += static_cast<long double>(t.w) * d * d;
      continue;
    }
    const auto law = law_of(t);
    const auto e = standardized_edges(codewords, t);
    const double s = sign_of(t.m);
    double F_prev = law.F(e[0]);
    double M_prev = law.M(e[0]);
    double K_prev = law.K(e[0]);
    long double acc = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      const double F_next = law.F(e[v + 1]);
      const double M_next = law.M(e[v + 1]);
      const double K_next = law.K(e[v + 1]);
      const double d = t.c - codewords[v];
      acc += s * (d * d * (F_next - F_prev) +
                  2.0 * t.m * d * (M_next - M_prev) +
                  t.m * t.m * (K_next - K_prev));
      F_prev = F_next;
      M_prev = M_next;
      K_prev = K_next;
    }
    total += t.w * acc;
  }
  return static_cast<double>(total);
}

std::vector<double> mixture_gradient(const std::vector<double>& codewords,
                                     const std::vector<MixtureTerm>& terms) {
  const std::size_t n = codewords.size();
  std::vector<double> g(n, 0.0);
  for (const auto& t : terms) {
    if (t.w == 0.0) continue;
    if (is_dirac(t)) {
      if (t.mode == BoundaryMode::absorbing && t.c <= 0.0) continue;
      const double loc = dirac_location(t);
      const std::size_t v = dirac_region(codewords, loc);
      g[v] += 2.0 * t.w * (codewords[v] - loc);
      continue;
    }
    const auto law = law_of(t);
    const auto e = standardized_edges(codewords, t);
    const double s = sign_of(t.m);
    const double am = std::fabs(t.m);
    double F_prev = law.F(e[0]);
    double M_prev = law.M(e[0]);
    for (std::size_t v = 0; v < n; ++v) {
      const double F_next = law.F(e[v + 1]);
      const double M_next = law.M(e[v + 1]);
      g[v] += 2.0 * t.w *
              ((codewords[v] - t.c) * s * (F_next - F_prev) -
               am * (M_next - M_prev));
      F_prev = F_next;
      M_prev = M_next;
    }
  }
  return g;
}

TridiagonalHessian mixture_hessian(const std::vector<double>& codewords,
                                   const std::vector<MixtureTerm>& terms) {
  const std::size_t n = codewords.size();
  TridiagonalHessian h;
  h.diag.assign(n, 0.0);
  h.off.assign(n > 0 ? n - 1 : 0, 0.0);
  for (const auto& t : terms) {
    if (t.w == 0.0) continue;
    if (is_dirac(t)) {
      if (t.mode == BoundaryMode::absorbing && t.c <= 0.0) continue;
      h.diag[dirac_region(codewords, dirac_location(t))] += 2.0 * t.w;
      continue;
    }
    const auto law = law_of(t);
    const auto e = standardized_edges(codewords, t);
    const double s = sign_of(t.m);
    const double am = std::fabs(t.m);
    double F_prev = law.F(e[0]);
    for (std::size_t v = 0; v < n; ++v) {
      const double F_next = law.F(e[v + 1]);
      h.diag[v] += 2.0 * t.w * s * (F_next - F_prev);
      F_prev = F_next;
    }
    // interior boundaries move with the codewords unless pinned at zbar
    for (std::size_t b = 1; b < n; ++b) {
      if (t.mode != BoundaryMode::none && e[b] <= t.zbar) continue;
      const double val =
          t.w * law.f(e[b]) * (codewords[b - 1] - codewords[b]) / (2.0 * am);
      h.diag[b - 1] += val;
      h.diag[b] += val;
      h.off[b - 1] += val;
    }
  }
  return h;
}

std::vector<double> newton_optimize(std::vector<double> initial,
                                    const std::vector<MixtureTerm>& terms,
                                    const NewtonSettings& settings,
                                    NewtonReport* report) {
  std::vector<double> y = std::move(initial);
  const bool positive_support =
      std::any_of(terms.begin(), terms.end(), [](const MixtureTerm& t) {
        return t.mode != BoundaryMode::none;
      });
  auto feasible = [&](const std::vector<double>& cand) {
    if (!strictly_ascending(cand)) return false;
    if (positive_support && cand.front() <= 0.0) return false;
    return true;
  };
  if (!feasible(y)) {
    throw ConvergenceError("newton_optimize: infeasible initial codewords",
                           std::numeric_limits<double>::quiet_NaN());
  }

  double dist = mixture_distortion(y, terms);
  double gnorm = 0.0;
  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    const auto g = mixture_gradient(y, terms);
    gnorm = 0.0;
    for (double v : g) gnorm = std::max(gnorm, std::fabs(v));
    if (report) {
      report->iterations = iter;
      report->gradient_norm = gnorm;
    }
    if (gnorm <= settings.gradient_tolerance * codeword_scale(y)) {
      return y;
    }

    const auto h = mixture_hessian(y, terms);
    double max_diag = 1e-300;
    for (double d : h.diag) max_diag = std::max(max_diag, std::fabs(d));
    // Gershgorin lower bound on the smallest eigenvalue; an indefinite
    // Hessian produces ascent directions, so the rescue ridge shifts the
    // spectrum positive and guarantees a descent direction.
    double gersh = h.diag[0];
    for (std::size_t v = 0; v < h.diag.size(); ++v) {
      double radius = 0.0;
      if (v > 0) radius += std::fabs(h.off[v - 1]);
      if (v < h.off.size()) radius += std::fabs(h.off[v]);
      gersh = std::min(gersh, h.diag[v] - radius);
    }
    const double pd_ridge = gersh > 0.0
                                ? 1e-6 * max_diag
                                : -gersh * 1.05 + 1e-12 * max_diag;

    bool accepted = false;
    double lambda = 0.0;
    double lambda_next = pd_ridge;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      std::vector<double> delta;
      bool solved = false;
      try {
        auto hd = h.diag;
        if (lambda > 0.0) {
          for (double& d : hd) d += lambda;
        }
        delta = solve_tridiagonal(hd, h.off, g);
        solved = std::all_of(delta.begin(), delta.end(),
                             [](double d) { return std::isfinite(d); });
      } catch (const SingularSystemError&) {
      }
      if (solved) {
        // pure Newton gets a short leash; safeguarded directions a longer
        // one since they are guaranteed descent
        const int budget = attempt == 0 ? 8 : 16;
        double step = settings.damping;
        for (int halvings = 0; halvings <= budget; ++halvings) {
          std::vector<double> cand(y.size());
          for (std::size_t v = 0; v < y.size(); ++v) {
            cand[v] = y[v] - step * delta[v];
          }
          if (feasible(cand)) {
            const double cand_dist = mixture_distortion(cand, terms);
            if (cand_dist <= dist + std::fabs(dist) * 1e-12) {
              y = std::move(cand);
              dist = cand_dist;
              accepted = true;
              break;
            }
          }
          step *= 0.5;
        }
      }
      if (!accepted) {
        lambda = lambda_next;
        lambda_next = lambda * 30.0;
      }
    }
    if (!accepted) {
      throw ConvergenceError(
          "newton_optimize: no acceptable step (damping and regularization "
          "exhausted)",
          gnorm);
    }
  }
  // tolerance not reached within the iteration budget
  throw ConvergenceError("newton_optimize: no convergence within " +
                             std::to_string(settings.max_iterations) +
                             " iterations",
                         gnorm);
}

std::vector<double> initial_codewords(int n, const AffinePair& pair,
                                      BoundaryMode mode) {
  if (pair.m == 0.0) {
    throw std::invalid_argument("initial_codewords: degenerate update");
  }
  std::vector<double> cw(n);
  const double am = std::fabs(pair.m);
  switch (mode) {
    case BoundaryMode::none:
      for (int i = 0; i < n; ++i) {
        cw[i] = pair.c + am * gauss::normal_inv_cdf((2.0 * i + 1.0) /
                                                    (2.0 * n));
      }
      break;
    case BoundaryMode::absorbing: {
      // quantiles of the update conditional on surviving the truncation
      const double base = gauss::normal_cdf(-pair.c / am);
      for (int i = 0; i < n; ++i) {
        const double p = base + (1.0 - base) * (2.0 * i + 1.0) / (2.0 * n);
        cw[i] = pair.c + am * gauss::normal_inv_cdf(std::min(p, 1.0 - 1e-16));
      }
      break;
    }
    case BoundaryMode::reflecting: {
      // bisect the reflected-update cdf in state space
      auto cdf = [&](double y) {
        return gauss::normal_cdf((y - pair.c) / am) -
               gauss::normal_cdf((-y - pair.c) / am);
      };
      double hi = std::fabs(pair.c) + 10.0 * am;
      while (cdf(hi) < 1.0 - 1e-14) hi *= 2.0;
      for (int i = 0; i < n; ++i) {
        const double target = (2.0 * i + 1.0) / (2.0 * n);
        double lo = 0.0, up = hi;
        for (int it = 0; it < 100; ++it) {
          const double mid = 0.5 * (lo + up);
          (cdf(mid) < target ? lo : up) = mid;
        }
        cw[i] = 0.5 * (lo + up);
      }
      break;
    }
  }
  std::sort(cw.begin(), cw.end());
  return cw;
}

} // namespace jrmq
