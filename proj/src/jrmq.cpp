#include "jrmq/jrmq.hpp"

#include <algorithm>
#include <cmath>

#include "jrmq/gauss.hpp"

namespace jrmq {

namespace {

using gauss::inf;

double sign_of(double m) { return m < 0.0 ? -1.0 : 1.0; }

std::size_t dirac_region(const std::vector<double>& cw, double c) {
  std::size_t v = 0;
  while (v + 1 < cw.size() && c > 0.5 * (cw[v] + cw[v + 1])) ++v;
  return v;
}

// Conditional region masses of one margined y-term given the conditional
// innovation law N(mu, sd^2); fills mass[v] and returns the absorbed mass.
// The edges are already clipped at term.zbar under a boundary mode.
double conditional_masses(const MixtureTerm& term,
                          const std::vector<double>& edges, double mu,
                          double sd, std::vector<double>& mass) {
  const double s = sign_of(term.m);
  const std::size_t n = mass.size();
  auto cdf = [&](double z) {
    double p = gauss::normal_cdf((z - mu) / sd);
    if (term.mode == BoundaryMode::reflecting) {
      p -= gauss::normal_cdf((2.0 * term.zbar - z - mu) / sd);
    }
    return p;
  };
  double absorbed = 0.0;
  double prev = cdf(edges[0]);
  if (term.mode == BoundaryMode::absorbing) absorbed = prev;
  for (std::size_t v = 0; v < n; ++v) {
    const double next = cdf(edges[v + 1]);
    mass[v] = std::max(0.0, s * (next - prev));
    prev = next;
  }
  return absorbed;
}

struct YTermGeometry {
  MixtureTerm term;
  std::vector<double> edges;  // empty when the update is a Dirac
  bool dirac = false;
  bool dirac_absorbed = false;
  std::size_t dirac_index = 0;
};

YTermGeometry y_term_geometry(const ModelSpec& spec, double x, double y,
                              double dt, BoundaryMode mode,
                              const std::vector<double>& next_codewords) {
  YTermGeometry g;
  g.term = make_term(affine_y_margined(spec, x, y, dt), 1.0, mode);
  if (g.term.m == 0.0) {
    g.dirac = true;
    if (mode == BoundaryMode::absorbing && g.term.c <= 0.0) {
      g.dirac_absorbed = true;
    } else {
      const double loc = mode == BoundaryMode::reflecting
                             ? std::fabs(g.term.c)
                             : g.term.c;
      g.dirac_index = dirac_region(next_codewords, loc);
    }
  } else {
    g.edges = standardized_edges(next_codewords, g.term);
  }
  return g;
}

void require_valid_stage(const JointStage& stage) {
  if (stage.joint.rows() != stage.x.size() ||
      stage.joint.cols() != stage.y.size()) {
    throw std::invalid_argument(
        "joint stage: joint matrix shape does not match quantizers");
  }
}

} // namespace

const char* to_string(JointProbMethod method) {
  return method == JointProbMethod::exact_bivariate ? "exact"
                                                    : "approximation";
}

JointProbMethod joint_method_from_string(const std::string& s) {
  if (s == "exact" || s == "exact_bivariate") {
    return JointProbMethod::exact_bivariate;
  }
  if (s == "approximation" || s == "approx" ||
      s == "conditional_approximation") {
    return JointProbMethod::conditional_approximation;
  }
  throw ConfigError("unknown joint probability method: " + s);
}

std::vector<MixtureTerm> margined_mixture(const JointStage& prev,
                                          const ModelSpec& spec, double dt,
                                          BoundaryMode y_mode) {
  require_valid_stage(prev);
  std::vector<MixtureTerm> terms;
  terms.reserve(prev.x.size() * prev.y.size());
  for (std::size_t i = 0; i < prev.x.size(); ++i) {
    for (std::size_t u = 0; u < prev.y.size(); ++u) {
      terms.push_back(make_term(
          affine_y_margined(spec, prev.x.codewords[i], prev.y.codewords[u],
                            dt),
          prev.joint(i, u), y_mode));
    }
  }
  return terms;
}

std::vector<double> jrmq_gradient(const Quantizer1D& candidate,
                                  const JointStage& prev,
                                  const ModelSpec& spec, double dt,
                                  BoundaryMode mode) {
  return mixture_gradient(candidate.codewords,
                          margined_mixture(prev, spec, dt, mode));
}

TridiagonalHessian jrmq_hessian(const Quantizer1D& candidate,
                                const JointStage& prev, const ModelSpec& spec,
                                double dt, BoundaryMode mode) {
  return mixture_hessian(candidate.codewords,
                         margined_mixture(prev, spec, dt, mode));
}

double jrmq_distortion(const Quantizer1D& candidate, const JointStage& prev,
                       const ModelSpec& spec, double dt, BoundaryMode mode) {
  return mixture_distortion(candidate.codewords,
                            margined_mixture(prev, spec, dt, mode));
}

Quantizer1D jrmq_step(const JointStage& prev, const ModelSpec& spec,
                      double dt, int n_y, BoundaryMode mode,
                      const NewtonSettings& settings) {
  const auto terms = margined_mixture(prev, spec, dt, mode);

  Quantizer1D next;
  next.time_index = prev.y.time_index + 1;
  next.absorbed_mass = prev.y.absorbed_mass;

  if (terms.size() == 1 && terms[0].m == 0.0) {
    // deterministic single update
    const double c = terms[0].c;
    if (mode == BoundaryMode::absorbing && c <= 0.0) {
      next.codewords = {0.0};
      next.probabilities = {0.0};
      next.absorbed_mass += terms[0].w;
    } else {
      next.codewords = {mode == BoundaryMode::reflecting ? std::fabs(c) : c};
      next.probabilities = {terms[0].w};
    }
    return next;
  }

  std::vector<double> initial;
  if (prev.y.size() == static_cast<std::size_t>(n_y)) {
    initial = prev.y.codewords;
  } else if (terms.size() == 1) {
    initial = initial_codewords(n_y, {terms[0].m, terms[0].c}, mode);
  } else {
    double mass = 0.0, mean = 0.0, second = 0.0;
    for (const auto& t : terms) {
      mass += t.w;
      mean += t.w * t.c;
      second += t.w * (t.m * t.m + t.c * t.c);
    }
    mean /= mass;
    const double var = std::max(second / mass - mean * mean, 1e-300);
    initial = initial_codewords(n_y, {std::sqrt(var), mean}, mode);
  }

  next.codewords = newton_optimize(std::move(initial), terms, settings);

  // margined marginal probabilities; a grid build replaces these with the
  // joint column sums so that both views stay consistent
  next.probabilities.assign(n_y, 0.0);
  double absorbed = 0.0;
  for (const auto& t : terms) {
    double term_absorbed = 0.0;
    const auto mass = term_region_masses(next.codewords, t, &term_absorbed);
    for (int v = 0; v < n_y; ++v) next.probabilities[v] += t.w * mass[v];
    absorbed += t.w * term_absorbed;
  }
  next.absorbed_mass += absorbed;
  return next;
}

Matrix joint_prob_exact(const JointStage& prev, const Quantizer1D& x_next,
                        const Quantizer1D& y_next, const ModelSpec& spec,
                        double dt) {
  require_valid_stage(prev);
  const double rho = spec.rho;
  const std::size_t nx = x_next.size();
  const std::size_t ny = y_next.size();
  Matrix out(nx, ny);

  for (std::size_t i = 0; i < prev.x.size(); ++i) {
    const AffinePair px = affine_x(spec, prev.x.codewords[i], dt);
    const bool x_dirac = px.m == 0.0;
    std::vector<double> xe;
    MixtureTerm xterm;
    std::size_t x_region = 0;
    if (x_dirac) {
      x_region = dirac_region(x_next.codewords, px.c);
    } else {
      xterm = make_term(px, 1.0, BoundaryMode::none);
      xe = standardized_edges(x_next.codewords, xterm);
    }
    const double sx = sign_of(px.m);

    for (std::size_t u = 0; u < prev.y.size(); ++u) {
      const double w = prev.joint(i, u);
      if (w == 0.0) continue;
      const auto geom =
          y_term_geometry(spec, prev.x.codewords[i], prev.y.codewords[u], dt,
                          BoundaryMode::none, y_next.codewords);

      if (x_dirac && geom.dirac) {
        out(x_region, geom.dirac_index) += w;
        continue;
      }
      if (x_dirac) {
        // x landing fixed; y mass is the margined mass (no x information)
        const auto mass = term_region_masses(y_next.codewords, geom.term);
        for (std::size_t v = 0; v < ny; ++v) {
          out(x_region, v) += w * mass[v];
        }
        continue;
      }
      if (geom.dirac) {
        const auto mass = term_region_masses(x_next.codewords, xterm);
        for (std::size_t j = 0; j < nx; ++j) {
          out(j, geom.dirac_index) += w * mass[j];
        }
        continue;
      }

      const double sy = sign_of(geom.term.m);
      const double orient = sx * sy;
      // bivariate cdf on the (nx+1) x (ny+1) edge grid, then rectangle
      // differences
      Matrix cdf(nx + 1, ny + 1);
      for (std::size_t a = 0; a <= nx; ++a) {
        for (std::size_t b = 0; b <= ny; ++b) {
          cdf(a, b) = gauss::bivariate_normal_cdf(xe[a], geom.edges[b], rho);
        }
      }
      for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t v = 0; v < ny; ++v) {
          const double rect = cdf(j + 1, v + 1) - cdf(j, v + 1) -
                              cdf(j + 1, v) + cdf(j, v);
          out(j, v) += w * std::max(0.0, orient * rect);
        }
      }
    }
  }
  return out;
}

Matrix joint_prob_approx(const JointStage& prev, const Quantizer1D& x_next,
                         const Quantizer1D& y_next, const ModelSpec& spec,
                         double dt, BoundaryMode x_mode, BoundaryMode y_mode,
                         double* absorbed_increment) {
  require_valid_stage(prev);
  const double rho = spec.rho;
  if (!(std::fabs(rho) < 1.0)) {
    throw ConfigError(
        "joint probability approximation requires |rho| < 1");
  }
  const double sd = std::sqrt((1.0 - rho) * (1.0 + rho));
  const std::size_t nx = x_next.size();
  const std::size_t ny = y_next.size();
  Matrix out(nx, ny);
  double absorbed = 0.0;
  std::vector<double> mass(ny, 0.0);

  for (std::size_t i = 0; i < prev.x.size(); ++i) {
    const AffinePair px = affine_x(spec, prev.x.codewords[i], dt);
    const auto xterm = make_term(px, 1.0, x_mode);
    const auto xmass = term_region_masses(x_next.codewords, xterm);
    for (std::size_t u = 0; u < prev.y.size(); ++u) {
      const double w = prev.joint(i, u);
      if (w == 0.0) continue;
      const auto geom = y_term_geometry(spec, prev.x.codewords[i],
                                        prev.y.codewords[u], dt, y_mode,
                                        y_next.codewords);
      if (geom.dirac) {
        if (geom.dirac_absorbed) {
          absorbed += w;
        } else {
          for (std::size_t j = 0; j < nx; ++j) {
            out(j, geom.dirac_index) += w * xmass[j];
          }
        }
        continue;
      }
      for (std::size_t j = 0; j < nx; ++j) {
        const double pj = xmass[j];
        if (pj == 0.0) continue;
        // conditional law of the y innovation given the x landing; a
        // deterministic x step or a one-point x quantizer carries no
        // information about it
        double mu = 0.0, s = 1.0;
        if (px.m != 0.0 && nx > 1) {
          mu = rho * (x_next.codewords[j] - px.c) / px.m;
          s = sd;
        }
        const double term_absorbed =
            conditional_masses(geom.term, geom.edges, mu, s, mass);
        absorbed += w * pj * term_absorbed;
        for (std::size_t v = 0; v < ny; ++v) {
          out(j, v) += w * pj * mass[v];
        }
      }
    }
  }
  if (absorbed_increment) *absorbed_increment += absorbed;
  return out;
}

std::vector<double> quantizer_probabilities(const Matrix& joint) {
  std::vector<double> p(joint.cols(), 0.0);
  for (std::size_t v = 0; v < joint.cols(); ++v) p[v] = joint.col_sum(v);
  return p;
}

std::vector<Matrix> margined_conditional_mass(const JointStage& prev,
                                              const Quantizer1D& y_next,
                                              const ModelSpec& spec,
                                              double dt,
                                              BoundaryMode y_mode) {
  require_valid_stage(prev);
  std::vector<Matrix> cond(prev.x.size());
  for (std::size_t i = 0; i < prev.x.size(); ++i) {
    cond[i] = Matrix(prev.y.size(), y_next.size());
    for (std::size_t u = 0; u < prev.y.size(); ++u) {
      const auto t = make_term(
          affine_y_margined(spec, prev.x.codewords[i], prev.y.codewords[u],
                            dt),
          1.0, y_mode);
      const auto mass = term_region_masses(y_next.codewords, t);
      for (std::size_t v = 0; v < y_next.size(); ++v) {
        cond[i](u, v) = mass[v];
      }
    }
  }
  return cond;
}

Matrix y_transition_matrix(const JointStage& prev,
                           const std::vector<Matrix>& conditional_mass) {
  require_valid_stage(prev);
  const std::size_t nu = prev.y.size();
  const std::size_t nv = conditional_mass.empty()
                             ? 0
                             : conditional_mass.front().cols();
  Matrix p(nu, nv);
  for (std::size_t u = 0; u < nu; ++u) {
    const double pu = prev.y.probabilities[u];
    if (pu == 0.0) {
      // unreachable node: keep the matrix well formed with a self-loop
      p(u, std::min(u, nv - 1)) = 1.0;
      continue;
    }
    for (std::size_t v = 0; v < nv; ++v) {
      double s = 0.0;
      for (std::size_t i = 0; i < prev.x.size(); ++i) {
        s += conditional_mass[i](u, v) * prev.joint(i, u);
      }
      p(u, v) = s / pu;
    }
  }
  return p;
}

Tensor4 joint_transition_tensor(const JointStage& prev,
                                const Quantizer1D& x_next,
                                const Quantizer1D& y_next,
                                const ModelSpec& spec, double dt,
                                JointProbMethod method, BoundaryMode x_mode,
                                BoundaryMode y_mode) {
  require_valid_stage(prev);
  const std::size_t ni = prev.x.size();
  const std::size_t nu = prev.y.size();
  const std::size_t nj = x_next.size();
  const std::size_t nv = y_next.size();
  Tensor4 t(ni, nu, nj, nv);

  if (method == JointProbMethod::exact_bivariate) {
    if (x_mode != BoundaryMode::none || y_mode != BoundaryMode::none) {
      throw ConfigError(
          "exact bivariate joint probabilities do not support boundary "
          "truncation; use the conditional approximation");
    }
    // weight a unit mass at (i,u) and reuse the joint kernel row by row
    for (std::size_t i = 0; i < ni; ++i) {
      for (std::size_t u = 0; u < nu; ++u) {
        JointStage unit;
        unit.x.codewords = {prev.x.codewords[i]};
        unit.x.probabilities = {1.0};
        unit.y.codewords = {prev.y.codewords[u]};
        unit.y.probabilities = {1.0};
        unit.joint = Matrix(1, 1, 1.0);
        const auto block = joint_prob_exact(unit, x_next, y_next, spec, dt);
        for (std::size_t j = 0; j < nj; ++j) {
          for (std::size_t v = 0; v < nv; ++v) {
            t(i, u, j, v) = block(j, v);
          }
        }
      }
    }
    return t;
  }

  const double rho = spec.rho;
  if (!(std::fabs(rho) < 1.0)) {
    throw ConfigError("joint probability approximation requires |rho| < 1");
  }
  const double sd = std::sqrt((1.0 - rho) * (1.0 + rho));
  std::vector<double> mass(nv, 0.0);
  for (std::size_t i = 0; i < ni; ++i) {
    const AffinePair px = affine_x(spec, prev.x.codewords[i], dt);
    const auto xterm = make_term(px, 1.0, x_mode);
    const auto xmass = term_region_masses(x_next.codewords, xterm);
    for (std::size_t u = 0; u < nu; ++u) {
      const auto geom = y_term_geometry(spec, prev.x.codewords[i],
                                        prev.y.codewords[u], dt, y_mode,
                                        y_next.codewords);
      if (geom.dirac) {
        if (geom.dirac_absorbed) continue;
        for (std::size_t j = 0; j < nj; ++j) {
          t(i, u, j, geom.dirac_index) = xmass[j];
        }
        continue;
      }
      for (std::size_t j = 0; j < nj; ++j) {
        const double pj = xmass[j];
        if (pj == 0.0) continue;
        double mu = 0.0, s = 1.0;
        if (px.m != 0.0 && nj > 1) {
          mu = rho * (x_next.codewords[j] - px.c) / px.m;
          s = sd;
        }
        conditional_masses(geom.term, geom.edges, mu, s, mass);
        for (std::size_t v = 0; v < nv; ++v) {
          t(i, u, j, v) = pj * mass[v];
        }
      }
    }
  }
  return t;
}

Tensor4 joint_transition_tensor(const QuantizationGrid& grid, int k) {
  if (k < 0 || k + 1 >= static_cast<int>(grid.stages.size())) {
    throw std::invalid_argument("joint_transition_tensor: bad step index");
  }
  const auto& prev = grid.stages[k];
  const auto& next = grid.stages[k + 1];
  return joint_transition_tensor(prev, next.x, next.y, grid.model, grid.dt,
                                 grid.settings.method, grid.settings.x_mode,
                                 grid.settings.y_mode);
}

QuantizationGrid build_grid(const ModelSpec& spec,
                            const GridSettings& settings) {
  if (settings.num_steps < 1 || settings.n_x < 1 || settings.n_y < 1) {
    throw ConfigError("grid: K, n_x and n_y must all be at least 1");
  }
  if (settings.method == JointProbMethod::exact_bivariate &&
      (settings.x_mode != BoundaryMode::none ||
       settings.y_mode != BoundaryMode::none)) {
    throw ConfigError(
        "exact bivariate joint probabilities cannot be combined with a "
        "boundary mode; use the conditional approximation");
  }
  if (settings.x_mode == BoundaryMode::absorbing) {
    throw ConfigError(
        "the independent process supports only reflecting or no boundary");
  }

  QuantizationGrid grid;
  grid.model = spec;
  grid.settings = settings;
  grid.dt = spec.horizon_T / settings.num_steps;

  JointStage stage0;
  stage0.x.time_index = 0;
  stage0.x.codewords = {spec.x0};
  stage0.x.probabilities = {1.0};
  stage0.y.time_index = 0;
  stage0.y.codewords = {spec.y0};
  stage0.y.probabilities = {1.0};
  stage0.joint = Matrix(1, 1, 1.0);
  grid.stages.push_back(std::move(stage0));

  for (int k = 0; k < settings.num_steps; ++k) {
    const JointStage& prev = grid.stages.back();
    JointStage next;
    try {
      next.x = rmq_step(prev.x, spec, grid.dt, settings.n_x, settings.x_mode,
                        settings.newton);
      next.y = jrmq_step(prev, spec, grid.dt, settings.n_y, settings.y_mode,
                         settings.newton);
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(e.what(), e.gradient_norm(), k + 1);
    }
    next.x_transition = transition_matrix_1d(prev.x, next.x, spec, grid.dt,
                                             settings.x_mode);

    double y_absorbed = 0.0;
    next.joint =
        settings.method == JointProbMethod::exact_bivariate
            ? joint_prob_exact(prev, next.x, next.y, spec, grid.dt)
            : joint_prob_approx(prev, next.x, next.y, spec, grid.dt,
                                settings.x_mode, settings.y_mode,
                                &y_absorbed);
    next.y.probabilities = quantizer_probabilities(next.joint);
    next.y.absorbed_mass = prev.y.absorbed_mass + y_absorbed;

    next.y_transition = y_transition_matrix(
        prev, margined_conditional_mass(prev, next.y, spec, grid.dt,
                                        settings.y_mode));
    grid.stages.push_back(std::move(next));
  }
  return grid;
}

QuantizationGrid build_grid(const PresetParams& preset,
                            const GridSettings& settings) {
  QuantizationGrid grid = build_grid(make_preset(preset), settings);
  grid.preset = preset;
  return grid;
}

double GridInvariantReport::worst() const {
  double w = std::max({mass_error, x_marginal_error, y_marginal_error,
                       transition_row_error});
  return std::max(w, std::max(0.0, -min_joint_entry));
}

GridInvariantReport check_grid_invariants(const QuantizationGrid& grid) {
  GridInvariantReport r;
  r.min_joint_entry = 1.0;
  const bool y_absorbing = grid.settings.y_mode == BoundaryMode::absorbing;
  for (std::size_t k = 1; k < grid.stages.size(); ++k) {
    const auto& st = grid.stages[k];
    const double total =
        st.joint.total() + st.y.absorbed_mass + st.x.absorbed_mass;
    r.mass_error = std::max(r.mass_error, std::fabs(total - 1.0));
    for (const double p : st.joint.data()) {
      r.min_joint_entry = std::min(r.min_joint_entry, p);
    }
    if (!y_absorbing) {
      for (std::size_t i = 0; i < st.joint.rows(); ++i) {
        r.x_marginal_error =
            std::max(r.x_marginal_error,
                     std::fabs(st.joint.row_sum(i) - st.x.probabilities[i]));
      }
    }
    for (std::size_t v = 0; v < st.joint.cols(); ++v) {
      r.y_marginal_error =
          std::max(r.y_marginal_error,
                   std::fabs(st.joint.col_sum(v) - st.y.probabilities[v]));
    }
    for (std::size_t i = 0; i < st.x_transition.rows(); ++i) {
      r.transition_row_error =
          std::max(r.transition_row_error,
                   std::fabs(st.x_transition.row_sum(i) - 1.0));
    }
    for (std::size_t u = 0; u < st.y_transition.rows(); ++u) {
      const double rs = st.y_transition.row_sum(u);
      r.transition_row_error =
          std::max(r.transition_row_error,
                   y_absorbing ? std::max(rs - 1.0, 0.0) : std::fabs(rs - 1.0));
    }
  }
  return r;
}

} // namespace jrmq
