#ifndef MANP_TEST_HELPERS_HPP
#define MANP_TEST_HELPERS_HPP

#include <random>

#include "manp/grid.hpp"
#include "manp/operators.hpp"

namespace testutil {

inline manp::StaggeredGrid square(int n, bool periodic = true) {
  using manp::ConcentrationBc;
  using manp::DisplacementBc;
  return manp::make_grid(2, n, n, -1, 1, -1, 1,
                         periodic ? ConcentrationBc::Periodic : ConcentrationBc::NoFlux,
                         periodic ? DisplacementBc::Periodic : DisplacementBc::Neumann);
}

inline manp::StaggeredGrid line(int n, bool periodic = false) {
  using manp::ConcentrationBc;
  using manp::DisplacementBc;
  return manp::make_grid(1, n, 1, -1, 1, 0, 0,
                         periodic ? ConcentrationBc::Periodic : ConcentrationBc::NoFlux,
                         periodic ? DisplacementBc::Periodic : DisplacementBc::Neumann);
}

inline Eigen::VectorXd uniform(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index k = 0; k < n; ++k) v[k] = u(rng);
  return v;
}

inline manp::FaceField random_faces(const manp::StaggeredGrid& g, std::mt19937_64& rng,
                                    double amp = 1.0) {
  manp::FaceField f(g);
  f.x = uniform(rng, f.x.size(), -amp, amp);
  f.y = uniform(rng, f.y.size(), -amp, amp);
  return f;
}

inline manp::PermittivityField random_eps(const manp::StaggeredGrid& g, std::mt19937_64& rng) {
  manp::CellField e(g);
  e.values = uniform(rng, g.num_cells(), 0.5, 2.0);
  return manp::make_permittivity(e);
}

}  // namespace testutil

#endif
