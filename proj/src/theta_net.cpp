#include "manp/theta_net.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace manp {

ThetaNet::ThetaNet(std::vector<int> sizes, std::uint64_t seed) : net(std::move(sizes)) {
  net.init_uniform(seed);
}

std::vector<int> default_layers(int inputs) { return {inputs, 32, 32, 32, 1}; }

// ---- 2D ------------------------------------------------------------------

Eigen::MatrixXd node_features(const SimulationState& s, double horizon) {
  const StaggeredGrid& g = s.grid();
  if (g.dim != 2) throw ConfigError("node features are defined in 2D");
  const int n = g.num_nodes();
  Eigen::MatrixXd x(kFeatures2d, n);
  const auto d = interpolate_face_to_node(s.displacement);
  std::array<Eigen::VectorXd, 2> th{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
  if (s.has_history) th = interpolate_face_to_node(s.theta_prev);
  const double tn = horizon > 0.0 ? s.time / horizon : 0.0;
  for (int k = 0; k < n; ++k) {
    const auto [i, j] = g.node_ij(k);
    x(0, k) = 2.0 * (g.node_x(i) - g.x0) / g.length_x() - 1.0;
    x(1, k) = 2.0 * (g.node_y(j) - g.y0) / g.length_y() - 1.0;
    x(2, k) = tn;
    x(3, k) = d[0][k];
    x(4, k) = d[1][k];
    x(5, k) = th[0][k];
    x(6, k) = th[1][k];
  }
  return x;
}

Eigen::VectorXd node_features(const SimulationState& s, int node, double horizon) {
  return node_features(s, horizon).col(node);
}

FaceField theta_from_stream(const NodeField& u) {
  check_shape(u);
  const StaggeredGrid& g = u.grid;
  if (g.dim != 2) throw ConfigError("stream-function Θ is 2D only");
  FaceField th(g);
  const bool per = g.periodic();
  const int nxf = g.nx_faces_per_row();
  for (int j = 0; j < g.ny; ++j) {
    const int jp = per ? (j + 1) % g.ny : j + 1;
    for (int i = 0; i < nxf; ++i) {
      th.x[g.x_face(i, j)] = (u.values[g.node(i, jp)] - u.values[g.node(i, j)]) / g.dy;
    }
  }
  for (int j = 0; j < g.ny_face_rows(); ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int ip = per ? (i + 1) % g.nx : i + 1;
      th.y[g.y_face(i, j)] = -(u.values[g.node(ip, j)] - u.values[g.node(i, j)]) / g.dx;
    }
  }
  return th;
}

NodeField theta_from_stream_adjoint(const FaceField& gth) {
  check_shape(gth);
  const StaggeredGrid& g = gth.grid;
  NodeField u(g);
  const bool per = g.periodic();
  const int nxf = g.nx_faces_per_row();
  for (int j = 0; j < g.ny; ++j) {
    const int jp = per ? (j + 1) % g.ny : j + 1;
    for (int i = 0; i < nxf; ++i) {
      const double v = gth.x[g.x_face(i, j)] / g.dy;
      u.values[g.node(i, jp)] += v;
      u.values[g.node(i, j)] -= v;
    }
  }
  for (int j = 0; j < g.ny_face_rows(); ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const int ip = per ? (i + 1) % g.nx : i + 1;
      const double v = gth.y[g.y_face(i, j)] / g.dx;
      u.values[g.node(ip, j)] -= v;
      u.values[g.node(i, j)] += v;
    }
  }
  return u;
}

LossContext2d make_loss_context_2d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                                   double dt, const LossWeights& w, const Eigen::VectorXd& bc_data,
                                   const FaceField* source) {
  if (w.lambda_bc < 0.0 || w.lambda_reg < 0.0) throw ConfigError("loss weights must be >= 0");
  LossContext2d ctx;
  ctx.base = s.displacement;
  for (std::size_t l = 0; l < s.species.size(); ++l) {
    const double qdt = s.species[l].q * dt;
    ctx.base.x -= qdt * fluxes[l].x;
    ctx.base.y -= qdt * fluxes[l].y;
  }
  if (source != nullptr) {
    ctx.base.x += dt * source->x;
    ctx.base.y += dt * source->y;
  }
  ctx.eps = s.eps;
  ctx.dt = dt;
  ctx.weights = w;
  ctx.bc_data = bc_data;
  return ctx;
}

namespace {

// Σ over neighbor pairs of a face component laid out as nrow x ncol.
template <typename Fn>
void for_each_pair(int ncol, int nrow, bool wrap, double hx, double hy, Fn&& fn) {
  for (int r = 0; r < nrow; ++r) {
    for (int c = 0; c < ncol; ++c) {
      const int k = r * ncol + c;
      if (c + 1 < ncol) {
        fn(k, k + 1, hx);
      } else if (wrap) {
        fn(k, r * ncol, hx);
      }
      if (r + 1 < nrow) {
        fn(k, k + ncol, hy);
      } else if (wrap) {
        fn(k, c, hy);
      }
    }
  }
}

double regularizer(const FaceField& th, double lambda, FaceField* grad) {
  if (lambda == 0.0) return 0.0;
  const StaggeredGrid& g = th.grid;
  const double area = g.dx * g.dy;
  const bool wrap = g.periodic();
  double r = 0.0;
  auto pass = [&](const Eigen::VectorXd& v, Eigen::VectorXd* gv, int ncol, int nrow) {
    for_each_pair(ncol, nrow, wrap, g.dx, g.dy, [&](int a, int b, double h) {
      const double dif = (v[a] - v[b]) / h;
      r += dif * dif;
      if (gv != nullptr) {
        const double gg = 2.0 * lambda * area * dif / h;
        (*gv)[a] += gg;
        (*gv)[b] -= gg;
      }
    });
  };
  pass(th.x, grad ? &grad->x : nullptr, g.nx_faces_per_row(), g.ny);
  pass(th.y, grad ? &grad->y : nullptr, g.nx, g.ny_face_rows());
  return lambda * area * r;
}

}  // namespace

double loss_2d_grad(const FaceField& theta, const LossContext2d& ctx, FaceField& dtheta) {
  check_shape(theta);
  const StaggeredGrid& g = theta.grid;
  const Eigen::VectorXd& ex = ctx.eps.face_values.x;
  const Eigen::VectorXd& ey = ctx.eps.face_values.y;
  FaceField dstar = ctx.base;
  dstar.x += ctx.dt * theta.x;
  dstar.y += ctx.dt * theta.y;
  FaceField gd(g);  // dL/dD*
  double loss = 0.0;

  if (ctx.weights.variant == LossVariant::Energy) {
    const double nf = static_cast<double>(g.num_x_faces() + g.num_y_faces());
    const Eigen::ArrayXd rx = dstar.x.array() / ex.array();
    const Eigen::ArrayXd ry = dstar.y.array() / ey.array();
    loss += (rx.square().sum() + ry.square().sum()) / nf;
    gd.x = (2.0 / nf) * (rx / ex.array()).matrix();
    gd.y = (2.0 / nf) * (ry / ey.array()).matrix();
  } else {
    const auto loops = node_loops(g);
    const double nn = static_cast<double>(loops.size());
    for (const NodeLoop& l : loops) {
      const double c = (dstar.x[l.xb] / ex[l.xb] - dstar.x[l.xt] / ex[l.xt]) / g.dy +
                       (dstar.y[l.yr] / ey[l.yr] - dstar.y[l.yl] / ey[l.yl]) / g.dx;
      loss += c * c / nn;
      const double w = 2.0 * c / nn;
      gd.x[l.xb] += w / (g.dy * ex[l.xb]);
      gd.x[l.xt] -= w / (g.dy * ex[l.xt]);
      gd.y[l.yr] += w / (g.dx * ey[l.yr]);
      gd.y[l.yl] -= w / (g.dx * ey[l.yl]);
    }
  }

  if (ctx.weights.lambda_bc > 0.0 && !g.periodic()) {
    const auto bf = boundary_faces(g);
    if (ctx.bc_data.size() != 0 && ctx.bc_data.size() != static_cast<Eigen::Index>(bf.size())) {
      throw ConfigError("boundary data length mismatch");
    }
    const double nb = static_cast<double>(bf.size());
    for (std::size_t k = 0; k < bf.size(); ++k) {
      const BoundaryFace& b = bf[k];
      const double e = (b.component == 0 ? ex : ey)[b.index];
      const double dv = (b.component == 0 ? dstar.x : dstar.y)[b.index];
      const double gval = ctx.bc_data.size() ? ctx.bc_data[static_cast<Eigen::Index>(k)] : 0.0;
      const double r = -dv / e * b.normal - gval;
      loss += ctx.weights.lambda_bc * r * r / nb;
      (b.component == 0 ? gd.x : gd.y)[b.index] +=
          ctx.weights.lambda_bc * 2.0 * r / nb * (-b.normal / e);
    }
  }

  dtheta = gd;
  dtheta *= ctx.dt;
  loss += regularizer(theta, ctx.weights.lambda_reg, &dtheta);
  return loss;
}

double loss_2d(const FaceField& theta, const LossContext2d& ctx) {
  FaceField scratch;
  return loss_2d_grad(theta, ctx, scratch);
}

double loss_2d(const FaceField& theta, const SimulationState& s,
               const std::vector<FaceField>& fluxes, double dt, const LossWeights& w,
               const Eigen::VectorXd& bc_data) {
  return loss_2d(theta, make_loss_context_2d(s, fluxes, dt, w, bc_data));
}

double loss_2d_params(const Mlp<double>& net, const Eigen::MatrixXd& features,
                      const LossContext2d& ctx, Eigen::VectorXd* grad) {
  const StaggeredGrid& g = ctx.base.grid;
  Mlp<double>::Tape tape;
  NodeField u(g);
  u.values = net.forward_batch(features, grad ? &tape : nullptr);
  const FaceField th = theta_from_stream(u);
  FaceField dth;
  const double loss = loss_2d_grad(th, ctx, dth);
  if (grad != nullptr) *grad = net.backward(tape, theta_from_stream_adjoint(dth).values);
  return loss;
}

namespace {

template <typename Eval>
TrainReport train_loop(ThetaNet& tn, const TrainConfig& cfg, Eval&& eval,
                       std::vector<double>* trace) {
  tn.opt.lr = cfg.lr;
  tn.opt.beta1 = cfg.beta1;
  tn.opt.beta2 = cfg.beta2;
  tn.opt.eps = cfg.adam_eps;
  TrainReport rep;
  Eigen::VectorXd grad;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_hist;
  Eigen::VectorXd best_params = tn.net.parameters();
  while (true) {
    const double loss = eval(&grad);
    if (trace != nullptr) trace->push_back(loss);
    if (loss < best) {
      best = loss;
      best_params = tn.net.parameters();
    }
    rep.final_loss = loss;
    if (loss <= cfg.loss_tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= cfg.max_iters) break;
    if (cfg.stall_window > 0) {
      best_hist.push_back(best);
      const std::size_t w = static_cast<std::size_t>(cfg.stall_window);
      if (best_hist.size() > w && best_hist[best_hist.size() - 1 - w] - best <=
                                      cfg.stall_rtol * best) {
        break;
      }
    }
    tn.opt.step(tn.net.parameters(), grad);
    ++rep.iterations;
  }
  // Adam may end on an uphill step; emit the best parameters seen.
  if (rep.final_loss > best) {
    tn.net.parameters() = best_params;
    rep.final_loss = best;
    rep.converged = best <= cfg.loss_tol;
  }
  return rep;
}

}  // namespace

std::pair<FaceField, TrainReport> train_and_emit_2d(ThetaNet& tn, const SimulationState& s,
                                                    const LossContext2d& ctx, double horizon,
                                                    const TrainConfig& cfg,
                                                    std::vector<double>* loss_trace) {
  const Eigen::MatrixXd x = node_features(s, horizon);
  TrainReport rep = train_loop(
      tn, cfg, [&](Eigen::VectorXd* grad) { return loss_2d_params(tn.net, x, ctx, grad); },
      loss_trace);
  NodeField u(s.grid());
  u.values = tn.net.forward_batch(x);
  return {theta_from_stream(u), rep};
}

// ---- 1D ------------------------------------------------------------------

LossContext1d make_loss_context_1d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                                   double dt, const RobinBc& robin) {
  const StaggeredGrid& g = s.grid();
  if (g.dim != 1) throw ConfigError("1D loss on a 2D state");
  const double eps0_sq = s.eps.face_values.x[0];
  LossContext1d ctx;
  ctx.coef = dt / eps0_sq;
  ctx.base = -s.displacement.x / eps0_sq;
  for (std::size_t l = 0; l < s.species.size(); ++l) {
    ctx.base += ctx.coef * s.species[l].q * fluxes[l].x;
  }
  ctx.dx = g.dx;
  ctx.robin = robin;
  return ctx;
}

double loss_1d(double theta, const LossContext1d& ctx) {
  Eigen::VectorXd s = ctx.base.array() + ctx.coef * theta;
  const double r = robin_defect(s, ctx.dx, ctx.robin);
  return r * r;
}

double loss_1d(double theta, const SimulationState& s, const std::vector<FaceField>& fluxes,
               double dt, const RobinBc& robin) {
  return loss_1d(theta, make_loss_context_1d(s, fluxes, dt, robin));
}

namespace {

// defect(Θ) = a + b Θ
std::pair<double, double> defect_line(const LossContext1d& ctx) {
  const Eigen::Index nf = ctx.base.size();
  const double a = robin_defect(ctx.base, ctx.dx, ctx.robin);
  const double b = ctx.coef * (ctx.dx * static_cast<double>(nf - 1) + 2.0 * ctx.robin.eta);
  return {a, b};
}

}  // namespace

double analytic_theta_1d(const LossContext1d& ctx) {
  const auto [a, b] = defect_line(ctx);
  if (b == 0.0 || !std::isfinite(b)) {
    throw DegenerateQuadratic("1D compatibility loss has no quadratic term");
  }
  return -a / b;
}

double analytic_theta_1d(const SimulationState& s, const std::vector<FaceField>& fluxes, double dt,
                         const RobinBc& robin) {
  return analytic_theta_1d(make_loss_context_1d(s, fluxes, dt, robin));
}

Eigen::VectorXd features_1d(const SimulationState& s, const std::vector<FaceField>& fluxes,
                            double horizon) {
  const double eps0_sq = s.eps.face_values.x[0];
  const Eigen::VectorXd dphi = -s.displacement.x / eps0_sq;
  Eigen::VectorXd qj = Eigen::VectorXd::Zero(dphi.size());
  for (std::size_t l = 0; l < s.species.size(); ++l) qj += s.species[l].q * fluxes[l].x;
  Eigen::VectorXd f(kFeatures1d);
  f << (horizon > 0.0 ? s.time / horizon : 0.0), dphi.mean(), dphi[0], dphi[dphi.size() - 1],
      qj.mean();
  return f;
}

double loss_1d_params(const Mlp<double>& net, const Eigen::VectorXd& features,
                      const LossContext1d& ctx, Eigen::VectorXd* grad) {
  Mlp<double>::Tape tape;
  const Eigen::MatrixXd x = features;
  const double theta = net.forward_batch(x, grad ? &tape : nullptr)[0];
  const auto [a, b] = defect_line(ctx);
  const double r = a + b * theta;
  if (grad != nullptr) {
    Eigen::VectorXd dy(1);
    dy[0] = 2.0 * r * b;
    *grad = net.backward(tape, dy);
  }
  return r * r;
}

std::pair<double, TrainReport> train_and_emit_1d(ThetaNet& tn, const Eigen::VectorXd& features,
                                                 const LossContext1d& ctx,
                                                 const TrainConfig& cfg) {
  TrainReport rep = train_loop(
      tn, cfg, [&](Eigen::VectorXd* grad) { return loss_1d_params(tn.net, features, ctx, grad); },
      nullptr);
  return {tn.net.forward(features), rep};
}

// ---- checkpoints ---------------------------------------------------------

void save_checkpoint(const Mlp<double>& net, std::ostream& out) {
  out << "manp-mlp v1\n";
  const auto& sizes = net.layer_sizes();
  for (std::size_t k = 0; k < sizes.size(); ++k) out << (k ? " " : "") << sizes[k];
  out << '\n';
  char buf[64];
  for (Eigen::Index i = 0; i < net.num_parameters(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g\n", net.parameters()[i]);
    out << buf;
  }
}

Mlp<double> load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "manp-mlp v1") throw ParseError("not a manp-mlp v1 file");
  if (!std::getline(in, line)) throw ParseError("checkpoint missing layer sizes");
  std::istringstream ls(line);
  std::vector<int> sizes;
  int v;
  while (ls >> v) sizes.push_back(v);
  Mlp<double> net;
  try {
    net = Mlp<double>(sizes);
  } catch (const ConfigError& e) {
    throw ParseError(std::string("bad checkpoint layers: ") + e.what());
  }
  for (Eigen::Index i = 0; i < net.num_parameters(); ++i) {
    if (!std::getline(in, line)) throw ParseError("checkpoint truncated");
    try {
      std::size_t used = 0;
      net.parameters()[i] = std::stod(line, &used);
    } catch (const std::exception&) {
      throw ParseError("bad checkpoint value: " + line);
    }
  }
  if (!net.parameters().allFinite()) throw ParseError("non-finite checkpoint parameter");
  return net;
}

void save_checkpoint(const Mlp<double>& net, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path);
  save_checkpoint(net, f);
}

Mlp<double> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot read " + path);
  return load_checkpoint(f);
}

}  // namespace manp
