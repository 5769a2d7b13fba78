#ifndef MANP_RELAXATION_HPP
#define MANP_RELAXATION_HPP

#include "manp/errors.hpp"
#include "manp/operators.hpp"

namespace manp {

struct RelaxOptions {
  double stop_tol = 1e-5;  // on the objective change between sweeps
  int max_sweeps = -1;     // -1: 10 * nx * ny
  double damping = 0.5;    // vectorized variant only
  double curl_tol = 0.0;   // optional extra stop on max |curl|; 0 disables
};

struct RelaxResult {
  FaceField d;
  int sweeps = 0;
  double objective = 0.0;
};

class MaxSweepsExceeded : public NumericalError {
 public:
  explicit MaxSweepsExceeded(RelaxResult partial)
      : NumericalError("curl-free relaxation hit max_sweeps (" +
                       std::to_string(partial.sweeps) + ")"),
        result(std::move(partial)) {}
  RelaxResult result;
};

/// Σ_faces dx·dy·D²/ε, the quantity relaxation minimizes.
double relaxation_objective(const FaceField& d, const PermittivityField& eps);

/// Gauss-Seidel loop corrections over interior nodes in row-major order.
RelaxResult curl_free_relax_local(const FaceField& d, const PermittivityField& eps,
                                  const RelaxOptions& opt = {});

/// All node increments from one snapshot, applied together times `damping`.
RelaxResult curl_free_relax_vectorized(const FaceField& d, const PermittivityField& eps,
                                       const RelaxOptions& opt = {});

}  // namespace manp

#endif  // MANP_RELAXATION_HPP
