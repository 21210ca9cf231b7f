// Joint recursive marginal quantization of a two-factor stochastic
// volatility model.  The dependent process is quantized against the
// margined single-innovation update (correlation drops out of the
// distortion), while the joint probabilities restore the correlation either
// exactly through the bivariate Gaussian cdf or through a conditional
// one-dimensional quadrature.

#pragma once

#include <optional>
#include <vector>

#include "jrmq/matrix.hpp"
#include "jrmq/model.hpp"
#include "jrmq/quantizer.hpp"
#include "jrmq/rmq1d.hpp"

namespace jrmq {

enum class JointProbMethod { exact_bivariate, conditional_approximation };

const char* to_string(JointProbMethod method);
JointProbMethod joint_method_from_string(const std::string& s);

// One time slice of the joint grid.  Transition matrices describe the move
// from the previous stage into this one; stage 0 has none.
struct JointStage {
  Quantizer1D x;
  Quantizer1D y;
  Matrix joint;         // N^x x N^y, P(X=x_i, Y=y_u)
  Matrix x_transition;  // rows: previous x index, cols: this stage
  Matrix y_transition;
};

struct GridSettings {
  int num_steps = 1;  // K
  int n_x = 1;
  int n_y = 1;
  JointProbMethod method = JointProbMethod::conditional_approximation;
  BoundaryMode x_mode = BoundaryMode::none;
  BoundaryMode y_mode = BoundaryMode::none;
  NewtonSettings newton;
};

struct QuantizationGrid {
  PresetParams preset;  // empty name map when built from a raw ModelSpec
  ModelSpec model;
  GridSettings settings;
  double dt = 0.0;
  std::vector<JointStage> stages;  // size K+1

  int num_steps() const { return static_cast<int>(stages.size()) - 1; }
};

// Mixture of margined updates weighted by the previous joint probabilities;
// terms are laid out (i major, u minor).
std::vector<MixtureTerm> margined_mixture(const JointStage& prev,
                                          const ModelSpec& spec, double dt,
                                          BoundaryMode y_mode);

// Gradient / tridiagonal Hessian / value of the margined distortion of a
// candidate quantizer for the next step.
std::vector<double> jrmq_gradient(const Quantizer1D& candidate,
                                  const JointStage& prev,
                                  const ModelSpec& spec, double dt,
                                  BoundaryMode mode);
TridiagonalHessian jrmq_hessian(const Quantizer1D& candidate,
                                const JointStage& prev, const ModelSpec& spec,
                                double dt, BoundaryMode mode);
double jrmq_distortion(const Quantizer1D& candidate, const JointStage& prev,
                       const ModelSpec& spec, double dt, BoundaryMode mode);

// Newton step for the dependent quantizer; warm-started from prev.y.
Quantizer1D jrmq_step(const JointStage& prev, const ModelSpec& spec,
                      double dt, int n_y, BoundaryMode mode,
                      const NewtonSettings& settings);

// Joint probabilities via the bivariate Gaussian cdf.  Only valid without
// boundary truncation on either process (ConfigError otherwise).
Matrix joint_prob_exact(const JointStage& prev, const Quantizer1D& x_next,
                        const Quantizer1D& y_next, const ModelSpec& spec,
                        double dt);

// Joint probabilities via the conditional-normal quadrature; supports the
// zero-boundary modes on both processes.  The x landing is weighted by its
// conditional transition mass from each source codeword, which keeps the
// dependent marginal unbiased.  Absorbed mass over the step is added to
// *absorbed_increment when non-null.
Matrix joint_prob_approx(const JointStage& prev, const Quantizer1D& x_next,
                         const Quantizer1D& y_next, const ModelSpec& spec,
                         double dt, BoundaryMode x_mode, BoundaryMode y_mode,
                         double* absorbed_increment = nullptr);

// Column sums over the x index.
std::vector<double> quantizer_probabilities(const Matrix& joint);

// Conditional masses P(Y_{k+1}=v | X_k=i, Y_k=u) of the margined update at
// the converged regions; one matrix per i.
std::vector<Matrix> margined_conditional_mass(const JointStage& prev,
                                              const Quantizer1D& y_next,
                                              const ModelSpec& spec,
                                              double dt,
                                              BoundaryMode y_mode);

// P(Y_{k+1}=v | Y_k=u) by mixing the conditional masses over the joint;
// unreachable rows become Dirac self-loops.
Matrix y_transition_matrix(const JointStage& prev,
                           const std::vector<Matrix>& conditional_mass);

// Conditional joint transition T[i][u][j][v]; rows (i,u) sum to one minus
// any absorbed mass.  The approximation method weighs the x landing by its
// marginal probability, which keeps the kernel consistent with the joint
// recursion.
Tensor4 joint_transition_tensor(const JointStage& prev,
                                const Quantizer1D& x_next,
                                const Quantizer1D& y_next,
                                const ModelSpec& spec, double dt,
                                JointProbMethod method, BoundaryMode x_mode,
                                BoundaryMode y_mode);

// Tensor between stages k and k+1 of a built grid.
Tensor4 joint_transition_tensor(const QuantizationGrid& grid, int k);

// Full recursion: X first by standard RMQ, then Y and the joint
// probabilities step by step.  Convergence errors carry the step index.
QuantizationGrid build_grid(const ModelSpec& spec,
                            const GridSettings& settings);
QuantizationGrid build_grid(const PresetParams& preset,
                            const GridSettings& settings);

// Worst violations of the stage invariants over a whole grid.
struct GridInvariantReport {
  double mass_error = 0.0;          // |joint total + absorbed - 1|
  double x_marginal_error = 0.0;    // joint row sums vs x probabilities
  double y_marginal_error = 0.0;    // joint column sums vs y probabilities
  double transition_row_error = 0.0;
  double min_joint_entry = 0.0;

  double worst() const;
};
GridInvariantReport check_grid_invariants(const QuantizationGrid& grid);

} // namespace jrmq
