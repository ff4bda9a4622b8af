#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fkpp/fracop.hpp"
#include "fkpp/geometry.hpp"
#include "fkpp/linalg.hpp"

namespace fkpp {

/// Principal eigenpair: phi >= 0, sup-normalised, zero off-mask.
struct EigenPair {
  double value = 0.0;
  Field vector;
  /// ||Op phi - value phi||_inf.
  double residual = 0.0;
  int iterations = 0;
  long inner_iterations = 0;
};

struct EigenOptions {
  /// Target for the sup-norm eigen-residual.
  double tolerance = 1e-10;
  int max_iterations = 400;
  /// Move the shift towards the Rayleigh quotient once the residual is
  /// small; falls back to the safe shift if the inner solve breaks down.
  bool adaptive_shift = true;
  CgOptions cg{1e-13, 5000};
};

/// Smallest eigenvalue of a masked symmetric operator and its non-negative
/// eigenvector, by shifted inverse iteration with preconditioned CG inner
/// solves. `start` defaults to the mask indicator. Throws SolverError when
/// the iteration cap is reached.
EigenPair principal_eigenpair(const MaskedOperator& op, const EigenOptions& options = {},
                              std::span<const double> start = {});

/// ||Op phi - lambda phi||_inf on the mask.
double eigen_residual(const MaskedOperator& op, std::span<const double> phi, double lambda);

struct SimplicityReport {
  std::vector<double> values;
  double max_deviation = 0.0;
  bool simple = false;
};

/// Reruns the eigensolver from `restarts` random positive starts and checks
/// that every run lands on `reference.value` within 10 * tolerance.
SimplicityReport simplicity_check(const MaskedOperator& op, const EigenPair& reference,
                                  const EigenOptions& options, std::uint64_t seed,
                                  int restarts = 5);

struct SweepEntry {
  double nu = 0.0;
  double value = 0.0;
  std::size_t nodes = 0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;  // sorted by nu
  /// Largest swept nu > 0 with lambda_nu < 0 (0 when none).
  double r0 = 0.0;
  bool monotone = false;
};

/// Eigenvalue lambda_nu of (-Delta)^a - Id on Omega_nu (erosion for nu > 0,
/// dilation for nu < 0) over the op's window.
SweepResult eigen_sweep(const DiscreteFracOp& op, std::vector<double> nu_list,
                        const EigenOptions& options = {});

/// Eigenpair of (-Delta)^a - Id on Omega_nu with the same sign convention as
/// eigen_sweep.
EigenPair eroded_eigenpair(const DiscreteFracOp& op, double nu, const EigenOptions& options = {});

enum class H1Status { holds, fails };

struct H1Report {
  H1Status status = H1Status::fails;
  /// Single component Omega0 (Dirichlet outside it).
  double lambda1 = 0.0;
  /// Perforated domain (exterior as configured on op_domain).
  double lambda0 = 0.0;
  bool corollary_holds = false;  // lambda1 < 0 implies lambda0 < 0
  bool ordered = false;          // lambda0 <= lambda1
  double predicted_speed = 0.0;  // |lambda0| / (d + 2 alpha)
  EigenPair ground;              // (lambda0, phi0)
  EigenPair single;              // (lambda1, phi1)
};

/// Computes lambda1 on one component and lambda0 on the perforated domain
/// described by `op` and classifies (H1) and its corollary.
H1Report check_h1_and_corollary(const DiscreteFracOp& op, const EigenOptions& options = {});

/// lambda1 alone: one component of `geom` embedded in a window of one
/// period with zero exterior data.
EigenPair single_component_eigenpair(const PeriodicGeometry& geom, double alpha, double spacing,
                                     const EigenOptions& options = {});

std::string to_string(H1Status status);

}  // namespace fkpp
