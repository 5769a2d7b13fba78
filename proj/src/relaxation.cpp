#include "manp/relaxation.hpp"

#include <cmath>
#include <vector>

namespace manp {

namespace {

struct Loop {
  int xb, xt, yl, yr;
  double inv_den;
};

std::vector<Loop> build_loops(const StaggeredGrid& g, const PermittivityField& eps) {
  if (g.dim != 2) throw ConfigError("curl-free relaxation is 2D only");
  const Eigen::VectorXd& ex = eps.face_values.x;
  const Eigen::VectorXd& ey = eps.face_values.y;
  std::vector<Loop> loops;
  for (const NodeLoop& n : node_loops(g)) {
    const double den = (1.0 / ex[n.xb] + 1.0 / ex[n.xt]) / (g.dy * g.dy) +
                       (1.0 / ey[n.yl] + 1.0 / ey[n.yr]) / (g.dx * g.dx);
    loops.push_back({n.xb, n.xt, n.yl, n.yr, 1.0 / den});
  }
  return loops;
}

double loop_curl(const Loop& l, const FaceField& d, const PermittivityField& eps,
                 const StaggeredGrid& g) {
  const Eigen::VectorXd& ex = eps.face_values.x;
  const Eigen::VectorXd& ey = eps.face_values.y;
  return (d.x[l.xb] / ex[l.xb] - d.x[l.xt] / ex[l.xt]) / g.dy +
         (d.y[l.yr] / ey[l.yr] - d.y[l.yl] / ey[l.yl]) / g.dx;
}

void apply_loop(const Loop& l, double delta, FaceField& d, const StaggeredGrid& g) {
  d.x[l.xb] += delta / g.dy;
  d.x[l.xt] -= delta / g.dy;
  d.y[l.yl] -= delta / g.dx;
  d.y[l.yr] += delta / g.dx;
}

double max_loop_curl(const std::vector<Loop>& loops, const FaceField& d,
                     const PermittivityField& eps) {
  double m = 0.0;
  for (const Loop& l : loops) m = std::max(m, std::abs(loop_curl(l, d, eps, d.grid)));
  return m;
}

template <typename Sweep>
RelaxResult relax(const FaceField& d0, const PermittivityField& eps, const RelaxOptions& opt,
                  Sweep&& sweep) {
  check_shape(d0);
  const StaggeredGrid& g = d0.grid;
  const std::vector<Loop> loops = build_loops(g, eps);
  const int cap = opt.max_sweeps > 0 ? opt.max_sweeps : 10 * g.nx * g.ny;
  RelaxResult res{d0, 0, relaxation_objective(d0, eps)};
  while (true) {
    sweep(loops, res.d);
    ++res.sweeps;
    const double obj = relaxation_objective(res.d, eps);
    const double change = std::abs(res.objective - obj);
    res.objective = obj;
    if (change < opt.stop_tol) break;
    if (opt.curl_tol > 0.0 && max_loop_curl(loops, res.d, eps) <= opt.curl_tol) break;
    if (res.sweeps >= cap) throw MaxSweepsExceeded(std::move(res));
  }
  return res;
}

}  // namespace

double relaxation_objective(const FaceField& d, const PermittivityField& eps) {
  const double w = d.grid.dim == 1 ? d.grid.dx : d.grid.dx * d.grid.dy;
  return w * ((d.x.array().square() / eps.face_values.x.array()).sum() +
              (d.y.array().square() / eps.face_values.y.array()).sum());
}

RelaxResult curl_free_relax_local(const FaceField& d, const PermittivityField& eps,
                                  const RelaxOptions& opt) {
  return relax(d, eps, opt, [&](const std::vector<Loop>& loops, FaceField& f) {
    for (const Loop& l : loops) apply_loop(l, -loop_curl(l, f, eps, f.grid) * l.inv_den, f, f.grid);
  });
}

RelaxResult curl_free_relax_vectorized(const FaceField& d, const PermittivityField& eps,
                                       const RelaxOptions& opt) {
  // damping 0 is a legal no-op here; scenario configs reject it.
  if (!(opt.damping >= 0.0 && opt.damping <= 1.0)) {
    throw ConfigError("relaxation damping must lie in [0, 1]");
  }
  std::vector<double> deltas;
  return relax(d, eps, opt, [&](const std::vector<Loop>& loops, FaceField& f) {
    deltas.resize(loops.size());
    for (std::size_t k = 0; k < loops.size(); ++k) {
      deltas[k] = -opt.damping * loop_curl(loops[k], f, eps, f.grid) * loops[k].inv_den;
    }
    for (std::size_t k = 0; k < loops.size(); ++k) apply_loop(loops[k], deltas[k], f, f.grid);
  });
}

}  // namespace manp
