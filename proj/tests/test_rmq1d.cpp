#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "jrmq/gauss.hpp"
#include "jrmq/model.hpp"
#include "jrmq/quantizer.hpp"
#include "jrmq/rmq1d.hpp"
#include "test_util.hpp"

using namespace jrmq;
using testutil::adaptive_simpson;

namespace {

const double kInf = gauss::inf;

double rel_err(double a, double b, double floor_scale) {
  const double denom = std::max({std::fabs(a), std::fabs(b), floor_scale});
  return std::fabs(a - b) / denom;
}

std::vector<double> random_ascending(std::mt19937_64& rng, int n, double lo,
                                     double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  std::sort(v.begin(), v.end());
  for (int i = 1; i < n; ++i) {
    v[i] = std::max(v[i], v[i - 1] + 1e-4 * (hi - lo));
  }
  return v;
}

// state-space mixture density, including the reflected fold
double mixture_density(const std::vector<MixtureTerm>& terms, double y) {
  double d = 0.0;
  for (const auto& t : terms) {
    if (t.m == 0.0) continue;
    const double am = std::fabs(t.m);
    double g = gauss::normal_pdf((y - t.c) / t.m) / am;
    if (t.mode == BoundaryMode::reflecting) {
      g = y < 0.0 ? 0.0
                  : g + gauss::normal_pdf((y + t.c) / t.m) / am;
    } else if (t.mode == BoundaryMode::absorbing && y < 0.0) {
      g = 0.0;
    }
    d += t.w * g;
  }
  return d;
}

} // namespace

TEST_CASE("tridiagonal solver") {
  CHECK(newton_solve_tridiagonal({1, 1, 1}, {0, 0}, {3, -1, 7}) ==
        std::vector<double>{3, -1, 7});
  const auto x = newton_solve_tridiagonal({2, 2}, {1}, {3, 3});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));

  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 50;
  std::vector<double> diag(n), off(n - 1), rhs(n);
  for (auto& v : off) v = u(rng);
  for (auto& v : rhs) v = u(rng);
  for (int i = 0; i < n; ++i) {
    diag[i] = 3.0 + u(rng);  // diagonally dominant
  }
  const auto got = newton_solve_tridiagonal(diag, off, rhs);
  std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    dense[i][i] = diag[i];
    if (i + 1 < n) dense[i][i + 1] = dense[i + 1][i] = off[i];
  }
  const auto want = testutil::dense_solve(dense, rhs);
  for (int i = 0; i < n; ++i) {
    CHECK(std::fabs(got[i] - want[i]) <= 1e-10);
  }

  CHECK_THROWS_AS(newton_solve_tridiagonal({0.0}, {}, {1.0}),
                  SingularSystemError);
}

TEST_CASE("gaussian quantizer fixed points") {
  NewtonSettings settings;
  const auto q1 = init_gaussian_quantizer(1, 0.4, 2.0, settings);
  CHECK(q1.codewords == std::vector<double>{0.4});
  CHECK(q1.probabilities == std::vector<double>{1.0});

  const auto q2 = init_gaussian_quantizer(2, 0.0, 1.0, settings);
  const double half_normal_mean = std::sqrt(2.0 / M_PI);
  CHECK(q2.codewords[0] == doctest::Approx(-half_normal_mean).epsilon(1e-8));
  CHECK(q2.codewords[1] == doctest::Approx(half_normal_mean).epsilon(1e-8));
  CHECK(q2.probabilities[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(q2.probabilities[1] == doctest::Approx(0.5).epsilon(1e-10));

  // three-point quantizer against a Lloyd fixed-point iteration oracle
  std::vector<double> lloyd = {-1.0, 0.0, 1.0};
  for (int it = 0; it < 400; ++it) {
    std::vector<double> next(3);
    for (int i = 0; i < 3; ++i) {
      const double lo = i == 0 ? -kInf : 0.5 * (lloyd[i - 1] + lloyd[i]);
      const double hi = i == 2 ? kInf : 0.5 * (lloyd[i] + lloyd[i + 1]);
      const double mass = gauss::normal_cdf(hi) - gauss::normal_cdf(lo);
      const double m1 = gauss::lower_partial_expectation(hi) -
                        gauss::lower_partial_expectation(lo);
      next[i] = m1 / mass;
    }
    lloyd = next;
  }
  const auto q3 = init_gaussian_quantizer(3, 0.0, 1.0, settings);
  for (int i = 0; i < 3; ++i) {
    CHECK(q3.codewords[i] == doctest::Approx(lloyd[i]).epsilon(1e-8));
  }
  CHECK(q3.codewords[1] == doctest::Approx(0.0).epsilon(1e-9));
  double psum = 0.0;
  for (double p : q3.probabilities) psum += p;
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("region boundaries") {
  Quantizer1D next;
  next.codewords = {-1.0, 0.0, 1.0};
  next.probabilities = {0.3, 0.4, 0.3};

  auto rb = region_boundaries_1d(next, {1.0, 0.0});
  CHECK_FALSE(rb.degenerate);
  CHECK(rb.edges[0] == -kInf);
  CHECK(rb.edges[1] == doctest::Approx(-0.5));
  CHECK(rb.edges[2] == doctest::Approx(0.5));
  CHECK(rb.edges[3] == kInf);

  auto rbneg = region_boundaries_1d(next, {-1.0, 0.0});
  CHECK(rbneg.edges[0] == kInf);
  CHECK(rbneg.edges[1] == doctest::Approx(0.5));
  CHECK(rbneg.edges[2] == doctest::Approx(-0.5));
  CHECK(rbneg.edges[3] == -kInf);

  Quantizer1D heston_like;
  heston_like.codewords = {0.05, 0.10, 0.15};
  heston_like.probabilities = {0.3, 0.4, 0.3};
  auto rh = region_boundaries_1d(heston_like, {0.0346, 0.09});
  CHECK(rh.edges[1] == doctest::Approx((0.075 - 0.09) / 0.0346).epsilon(1e-12));
  CHECK(rh.edges[2] == doctest::Approx((0.125 - 0.09) / 0.0346).epsilon(1e-12));
  CHECK(rh.edges[1] == doctest::Approx(-0.4335).epsilon(1e-3));
  CHECK(rh.edges[2] == doctest::Approx(1.0116).epsilon(1e-3));

  CHECK(region_boundaries_1d(next, {0.0, 0.7}).degenerate);
}

TEST_CASE("gradient and hessian match finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto mode : {BoundaryMode::none, BoundaryMode::reflecting,
                    BoundaryMode::absorbing}) {
    for (int trial = 0; trial < 12; ++trial) {
      // synthetic mixtures, positive updates when a boundary is active
      std::vector<MixtureTerm> terms;
      const int nt = 3 + static_cast<int>(rng() % 4);
      double wsum = 0.0;
      for (int t = 0; t < nt; ++t) {
        const double m = mode == BoundaryMode::none ? 0.3 + 0.5 * u(rng)
                                                    : 0.4 + 0.3 * u(rng);
        const double c = mode == BoundaryMode::none ? 1.5 * u(rng)
                                                    : 0.6 + 0.5 * u(rng);
        const double w = 0.1 + std::fabs(u(rng));
        wsum += w;
        terms.push_back(make_term({m, c}, w, mode));
      }
      for (auto& t : terms) t.w /= wsum;

      const int n = 6;
      auto cw = mode == BoundaryMode::none
                    ? random_ascending(rng, n, -2.0, 2.0)
                    : random_ascending(rng, n, 0.05, 2.2);
      const double scale = 2.2;
      const double h = 1e-6 * scale;

      const auto g = mixture_gradient(cw, terms);
      double gnorm = 0.0;
      for (double gv : g) gnorm = std::max(gnorm, std::fabs(gv));
      for (int v = 0; v < n; ++v) {
        auto up = cw, dn = cw;
        up[v] += h;
        dn[v] -= h;
        const double fd = (mixture_distortion(up, terms) -
                           mixture_distortion(dn, terms)) /
                          (2.0 * h);
        CAPTURE(static_cast<int>(mode));
        CAPTURE(trial);
        CAPTURE(v);
        // componentwise relative check; components that vanish relative to
        // the gradient norm are held to the same absolute scale
        CHECK(rel_err(g[v], fd, 1e-3 * gnorm) < 1e-6);
      }

      const auto hess = mixture_hessian(cw, terms);
      double hnorm = 0.0;
      for (double d : hess.diag) hnorm = std::max(hnorm, std::fabs(d));
      for (int v = 0; v < n; ++v) {
        auto up = cw, dn = cw;
        up[v] += h;
        dn[v] -= h;
        const auto gu = mixture_gradient(up, terms);
        const auto gd = mixture_gradient(dn, terms);
        const double fd_diag = (gu[v] - gd[v]) / (2.0 * h);
        CHECK(rel_err(hess.diag[v], fd_diag, 1e-3 * hnorm) < 1e-4);
        if (v + 1 < n) {
          const double fd_off = (gu[v + 1] - gd[v + 1]) / (2.0 * h);
          CHECK(rel_err(hess.off[v], fd_off, 1e-3 * hnorm) < 1e-4);
        }
      }
    }
  }
}

TEST_CASE("stationarity: codewords are conditional means") {
  NewtonSettings settings;
  const auto q = init_gaussian_quantizer(7, 0.3, 1.7, settings);
  const std::vector<MixtureTerm> terms = {
      make_term({1.7, 0.3}, 1.0, BoundaryMode::none)};
  for (int i = 0; i < 7; ++i) {
    const double lo =
        i == 0 ? 0.3 - 14.0 : 0.5 * (q.codewords[i - 1] + q.codewords[i]);
    const double hi =
        i == 6 ? 0.3 + 14.0 : 0.5 * (q.codewords[i] + q.codewords[i + 1]);
    const double mass = adaptive_simpson(
        [&](double y) { return mixture_density(terms, y); }, lo, hi, 1e-12);
    const double mean = adaptive_simpson(
        [&](double y) { return y * mixture_density(terms, y); }, lo, hi,
        1e-12);
    CHECK(q.codewords[i] == doctest::Approx(mean / mass).epsilon(1e-6));
  }
}

TEST_CASE("deterministic dynamics collapse to dirac") {
  ModelSpec flat;
  flat.drift_x = [](double) { return 0.0; };
  flat.diff_x = [](double) { return 0.0; };
  Quantizer1D prev;
  prev.codewords = {0.7};
  prev.probabilities = {1.0};
  NewtonSettings settings;
  const auto next =
      rmq_step(prev, flat, 0.5, 5, BoundaryMode::none, settings);
  CHECK(next.codewords == std::vector<double>{0.7});
  CHECK(next.probabilities == std::vector<double>{1.0});
}

TEST_CASE("single gaussian step equals fixed quantization") {
  ModelSpec unit;
  unit.drift_x = [](double) { return 0.0; };
  unit.diff_x = [](double) { return 1.0; };
  Quantizer1D prev;
  prev.codewords = {0.0};
  prev.probabilities = {1.0};
  NewtonSettings settings;
  const auto stepped =
      rmq_step(prev, unit, 1.0, 8, BoundaryMode::none, settings);
  const auto fixed = init_gaussian_quantizer(8, 0.0, 1.0, settings);
  for (int i = 0; i < 8; ++i) {
    CHECK(stepped.codewords[i] ==
          doctest::Approx(fixed.codewords[i]).epsilon(1e-9));
    CHECK(stepped.probabilities[i] ==
          doctest::Approx(fixed.probabilities[i]).epsilon(1e-9));
  }
}

TEST_CASE("heston variance chain with reflecting boundary") {
  const auto spec = make_preset(heston_defaults());
  NewtonSettings settings;
  const double dt = 1.0 / 12.0;
  Quantizer1D q;
  q.codewords = {spec.x0};
  q.probabilities = {1.0};
  for (int k = 0; k < 12; ++k) {
    // distortion must not increase from the warm start
    if (q.size() == 30) {
      const auto terms = x_mixture(q, spec, dt, BoundaryMode::reflecting);
      const double d0 = mixture_distortion(q.codewords, terms);
      const auto next =
          rmq_step(q, spec, dt, 30, BoundaryMode::reflecting, settings);
      CHECK(mixture_distortion(next.codewords, terms) <= d0 * (1 + 1e-12));
      q = next;
    } else {
      q = rmq_step(q, spec, dt, 30, BoundaryMode::reflecting, settings);
    }
    CHECK(q.codewords.front() > 0.0);
    double sum = q.absorbed_mass;
    for (double p : q.probabilities) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(q.absorbed_mass == 0.0);
  }
}

TEST_CASE("absorbing boundary accumulates mass") {
  // zero-drift unit-diffusion process started near zero loses mass
  ModelSpec spec;
  spec.drift_x = [](double) { return 0.0; };
  spec.diff_x = [](double) { return 1.0; };
  Quantizer1D q;
  q.codewords = {0.4};
  q.probabilities = {1.0};
  NewtonSettings settings;
  q = rmq_step(q, spec, 1.0, 6, BoundaryMode::absorbing, settings);
  CHECK(q.absorbed_mass == doctest::Approx(gauss::normal_cdf(-0.4)).epsilon(1e-9));
  CHECK(q.codewords.front() > 0.0);
  double sum = q.absorbed_mass;
  for (double p : q.probabilities) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

  q = rmq_step(q, spec, 1.0, 6, BoundaryMode::absorbing, settings);
  CHECK(q.absorbed_mass > gauss::normal_cdf(-0.4));
  sum = q.absorbed_mass;
  for (double p : q.probabilities) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("transition matrix rows") {
  ModelSpec unit;
  unit.drift_x = [](double) { return 0.0; };
  unit.diff_x = [](double) { return 1.0; };

  Quantizer1D one;
  one.codewords = {0.0};
  one.probabilities = {1.0};
  const auto p11 = transition_matrix_1d(one, one, unit, 1.0,
                                        BoundaryMode::none);
  CHECK(p11(0, 0) == doctest::Approx(1.0));

  Quantizer1D sym;
  sym.codewords = {-0.8, 0.8};
  sym.probabilities = {0.5, 0.5};
  const auto p12 = transition_matrix_1d(one, sym, unit, 1.0,
                                        BoundaryMode::none);
  CHECK(p12(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p12(0, 1) == doctest::Approx(0.5).epsilon(1e-14));

  const auto spec = make_preset(heston_defaults());
  NewtonSettings settings;
  Quantizer1D q0;
  q0.codewords = {spec.x0};
  q0.probabilities = {1.0};
  const auto q1 =
      rmq_step(q0, spec, 1.0 / 12.0, 30, BoundaryMode::reflecting, settings);
  const auto q2 =
      rmq_step(q1, spec, 1.0 / 12.0, 30, BoundaryMode::reflecting, settings);
  const auto p = transition_matrix_1d(q1, q2, spec, 1.0 / 12.0,
                                      BoundaryMode::reflecting);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    CHECK(p.row_sum(i) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // chain marginals agree with the stepped quantizer probabilities
  for (std::size_t j = 0; j < 30; ++j) {
    double pj = 0.0;
    for (std::size_t i = 0; i < 30; ++i) pj += q1.probabilities[i] * p(i, j);
    CHECK(pj == doctest::Approx(q2.probabilities[j]).epsilon(1e-10));
  }
}

TEST_CASE("initial codeword spreads are feasible") {
  for (auto mode : {BoundaryMode::none, BoundaryMode::reflecting,
                    BoundaryMode::absorbing}) {
    const auto cw = initial_codewords(12, {0.5, 0.3}, mode);
    for (int i = 1; i < 12; ++i) CHECK(cw[i] > cw[i - 1]);
    if (mode != BoundaryMode::none) CHECK(cw.front() > 0.0);
  }
}
