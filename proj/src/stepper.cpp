#include "manp/stepper.hpp"

#include <algorithm>

namespace manp {

Eigen::VectorXd SimulationState::charge() const {
  Eigen::VectorXd rho = fixed_charge.values;
  for (const Species& sp : species) rho += sp.q * sp.c.values;
  return rho;
}

std::string to_string(ThetaKind k) {
  switch (k) {
    case ThetaKind::Zero: return "zero";
    case ThetaKind::Lagged: return "lagged";
    case ThetaKind::ImplicitLagged: return "implicit-lagged";
    case ThetaKind::Network: return "network";
    case ThetaKind::Analytic: return "analytic";
  }
  return "?";
}

ThetaKind parse_theta_kind(const std::string& s) {
  if (s == "zero") return ThetaKind::Zero;
  if (s == "lagged") return ThetaKind::Lagged;
  if (s == "implicit-lagged") return ThetaKind::ImplicitLagged;
  if (s == "network") return ThetaKind::Network;
  if (s == "analytic") return ThetaKind::Analytic;
  throw ConfigError("unknown theta strategy '" + s + "'");
}

namespace {

std::vector<FaceField> level_fluxes(const SimulationState& s, const ExternalData* ext, double t) {
  std::vector<FaceField> out;
  for (std::size_t l = 0; l < s.species.size(); ++l) {
    GhostCells gh;
    const GhostCells* ghp = nullptr;
    if (ext != nullptr && ext->ghosts) {
      gh = ext->ghosts(static_cast<int>(l), t);
      ghp = &gh;
    }
    out.push_back(flux_field(s.species[l].c, s.species[l].q, s.displacement, s.eps, ghp));
  }
  return out;
}

FaceField qj_sum(const SimulationState& s, const std::vector<FaceField>& fluxes) {
  FaceField out(s.grid());
  for (std::size_t l = 0; l < s.species.size(); ++l) {
    out.x += s.species[l].q * fluxes[l].x;
    out.y += s.species[l].q * fluxes[l].y;
  }
  return out;
}

double gauss_defect(const SimulationState& s) {
  return (divergence(s.displacement).values - s.charge()).lpNorm<Eigen::Infinity>();
}

void rotate_history(SimulationState& s, FaceField d_old, std::vector<FaceField> fluxes,
                    std::vector<FaceField> level, FaceField theta, FaceField source) {
  s.displacement_prev = std::move(d_old);
  s.flux_prev = std::move(fluxes);
  s.level_flux_prev = std::move(level);
  s.theta_prev = std::move(theta);
  s.source_prev = std::move(source);
  s.has_history = true;
}

}  // namespace

std::vector<FaceField> advance_concentrations(SimulationState& s, double dt,
                                              const ExternalData* ext) {
  const double t_new = s.time + dt;
  const double t_mid = s.time + 0.5 * dt;
  std::vector<FaceField> fluxes;
  for (std::size_t l = 0; l < s.species.size(); ++l) {
    Species& sp = s.species[l];
    GhostCells gh;
    const GhostCells* ghp = nullptr;
    if (ext != nullptr && ext->ghosts) {
      gh = ext->ghosts(static_cast<int>(l), t_new);
      ghp = &gh;
    }
    const TransportMatrix m = assemble_transport(sp.c, sp.q, s.displacement, s.eps, dt, ghp);
    Eigen::VectorXd extra;
    const Eigen::VectorXd* extra_p = nullptr;
    if (ext != nullptr && ext->concentration_source) {
      extra = dt * ext->concentration_source(static_cast<int>(l), t_mid);
      extra_p = &extra;
    }
    sp.c = solve_transport(m, sp.c, extra_p);
    if (!(sp.c.values.minCoeff() > 0.0)) {
      throw NonpositiveConcentration("species " + std::to_string(l) +
                                     " lost positivity after transport");
    }
    fluxes.push_back(flux_field(sp.c, sp.q, s.displacement, s.eps, ghp));
  }
  return fluxes;
}

FaceField maxwell_ampere_update(const SimulationState& s, const FaceField& theta,
                                const std::vector<FaceField>& fluxes, double dt) {
  FaceField d = s.displacement;
  const FaceField qj = qj_sum(s, fluxes);
  d.x += dt * (theta.x - qj.x);
  d.y += dt * (theta.y - qj.y);
  return d;
}

FaceField compute_theta(const ThetaStrategy& strategy, const SimulationState& s,
                        const std::vector<FaceField>& fluxes, const StepperConfig& cfg,
                        const ExternalData* ext, const FaceField* source, StepReport* report) {
  const StaggeredGrid& g = s.grid();
  switch (strategy.kind) {
    case ThetaKind::Zero:
      return FaceField(g);
    case ThetaKind::Lagged: {
      if (!s.has_history) {
        if (s.step_index > 0) throw MissingHistory("lagged Θ needs the previous step");
        return FaceField(g);
      }
      FaceField th(g);
      th.x = (s.displacement.x - s.displacement_prev.x) / cfg.dt;
      th.y = (s.displacement.y - s.displacement_prev.y) / cfg.dt;
      th += qj_sum(s, s.flux_prev);
      if (s.source_prev.x.size() == th.x.size()) {
        th.x -= s.source_prev.x;
        th.y -= s.source_prev.y;
      }
      return th;
    }
    case ThetaKind::Network: {
      if (!strategy.network) throw ConfigError("network strategy without a network");
      Eigen::VectorXd bc;
      if (ext != nullptr && ext->neumann) bc = ext->neumann(s.time + cfg.dt);
      const LossContext2d ctx =
          make_loss_context_2d(s, fluxes, cfg.dt, cfg.weights, bc, source);
      auto [th, rep] = train_and_emit_2d(*strategy.network, s, ctx, cfg.horizon, cfg.train);
      if (report != nullptr) {
        report->train_iterations = rep.iterations;
        report->train_loss = rep.final_loss;
        report->train_converged = rep.converged;
      }
      return th;
    }
    case ThetaKind::ImplicitLagged:
    case ThetaKind::Analytic:
      break;
  }
  throw ConfigError("theta strategy '" + to_string(strategy.kind) + "' is 1D only");
}

Eigen::VectorXd slopes_1d(const SimulationState& s) {
  return -s.displacement.x / s.eps.face_values.x[0];
}

Eigen::VectorXd compute_theta_1d(const ThetaStrategy& strategy, const SimulationState& s,
                                 const std::vector<FaceField>& fluxes, const StepperConfig& cfg,
                                 StepReport* report) {
  const StaggeredGrid& g = s.grid();
  const Eigen::Index nf = g.num_x_faces();
  const double eps0_sq = s.eps.face_values.x[0];
  const Eigen::VectorXd dphi = slopes_1d(s);
  switch (strategy.kind) {
    case ThetaKind::Zero:
      return Eigen::VectorXd::Zero(nf);
    case ThetaKind::Lagged: {
      if (!s.has_history) {
        if (s.step_index > 0) throw MissingHistory("lagged Θ needs the previous step");
        return Eigen::VectorXd::Zero(nf);
      }
      const Eigen::VectorXd dphi_prev = -s.displacement_prev.x / eps0_sq;
      Eigen::VectorXd per_face = eps0_sq * (dphi - dphi_prev) / cfg.dt;
      per_face -= qj_sum(s, s.level_flux_prev).x;
      // Θ is constant in space; project the face values onto constants.
      return Eigen::VectorXd::Constant(nf, per_face.mean());
    }
    case ThetaKind::ImplicitLagged: {
      // before any history exists the previous slopes equal the current ones
      const Eigen::VectorXd dphi_prev =
          s.has_history ? Eigen::VectorXd(-s.displacement_prev.x / eps0_sq) : dphi;
      return eps0_sq * (dphi - dphi_prev) / cfg.dt - qj_sum(s, fluxes).x;
    }
    case ThetaKind::Network: {
      if (!strategy.network) throw ConfigError("network strategy without a network");
      const LossContext1d ctx = make_loss_context_1d(s, fluxes, cfg.dt, cfg.robin);
      const Eigen::VectorXd feat = features_1d(s, fluxes, cfg.horizon);
      auto [th, rep] = train_and_emit_1d(*strategy.network, feat, ctx, cfg.train);
      if (report != nullptr) {
        report->train_iterations = rep.iterations;
        report->train_loss = rep.final_loss;
        report->train_converged = rep.converged;
      }
      return Eigen::VectorXd::Constant(nf, th);
    }
    case ThetaKind::Analytic: {
      const LossContext1d ctx = make_loss_context_1d(s, fluxes, cfg.dt, cfg.robin);
      const double th = analytic_theta_1d(ctx);
      if (report != nullptr) report->train_loss = loss_1d(th, ctx);
      return Eigen::VectorXd::Constant(nf, th);
    }
  }
  return Eigen::VectorXd::Zero(nf);
}

StepReport advance(SimulationState& s, const ThetaStrategy& strategy, const StepperConfig& cfg,
                   const ExternalData* ext) {
  if (s.grid().dim != 2) return advance_1d(s, strategy, cfg);
  const long step = s.step_index;
  try {
    StepReport rep;
    const double dt = cfg.dt;
    const double t_mid = s.time + 0.5 * dt;
    FaceField source(s.grid());
    const bool has_source = ext != nullptr && ext->displacement_source;
    if (has_source) source = ext->displacement_source(t_mid);
    Eigen::VectorXd qf = Eigen::VectorXd::Zero(s.grid().num_cells());
    const bool has_csource = ext != nullptr && ext->concentration_source;
    if (has_csource) {
      for (std::size_t l = 0; l < s.species.size(); ++l) {
        qf += s.species[l].q * ext->concentration_source(static_cast<int>(l), t_mid);
      }
    }

    FaceField d_old = s.displacement;
    std::vector<FaceField> level = level_fluxes(s, ext, s.time);
    std::vector<FaceField> fluxes = advance_concentrations(s, dt, ext);
    FaceField theta = compute_theta(strategy, s, fluxes, cfg, ext, has_source ? &source : nullptr,
                                    &rep);
    FaceField dstar = maxwell_ampere_update(s, theta, fluxes, dt);
    if (has_source) {
      dstar.x += dt * source.x;
      dstar.y += dt * source.y;
    }
    if (cfg.relax_enabled) {
      RelaxKind kind = cfg.relax_kind;
      if (kind == RelaxKind::Auto) {
        kind = strategy.kind == ThetaKind::Network ? RelaxKind::Vectorized : RelaxKind::Local;
      }
      RelaxResult rr = kind == RelaxKind::Local ? curl_free_relax_local(dstar, s.eps, cfg.relax)
                                                : curl_free_relax_vectorized(dstar, s.eps, cfg.relax);
      rep.relax_sweeps = rr.sweeps;
      s.displacement = std::move(rr.d);
    } else {
      s.displacement = std::move(dstar);
    }
    // Sources inject charge that is not carried by the ions; book it as
    // fixed charge so the discrete Gauss law stays an invariant.
    if (has_source || has_csource) {
      s.fixed_charge.values += dt * (divergence(source).values - qf);
    }
    rotate_history(s, std::move(d_old), std::move(fluxes), std::move(level), std::move(theta),
                   has_source ? std::move(source) : FaceField());
    s.time += dt;
    ++s.step_index;
    rep.gauss_residual = gauss_defect(s);
    return rep;
  } catch (const StepFailure&) {
    throw;
  } catch (const NumericalError& e) {
    throw StepFailure(step, e.what());
  }
}

StepReport advance_1d(SimulationState& s, const ThetaStrategy& strategy, const StepperConfig& cfg) {
  if (s.grid().dim != 1) throw ConfigError("advance_1d on a 2D state");
  const long step = s.step_index;
  try {
    StepReport rep;
    const double dt = cfg.dt;
    const double eps0_sq = s.eps.face_values.x[0];
    FaceField d_old = s.displacement;
    std::vector<FaceField> level = level_fluxes(s, nullptr, s.time);
    std::vector<FaceField> fluxes = advance_concentrations(s, dt);
    const Eigen::VectorXd th = compute_theta_1d(strategy, s, fluxes, cfg, &rep);
    rep.theta_1d = th[0];
    const Eigen::VectorXd dphi =
        slopes_1d(s) + dt / eps0_sq * (th + qj_sum(s, fluxes).x);
    s.displacement.x = -eps0_sq * dphi;
    FaceField theta2d(s.grid());
    theta2d.x = -th;  // displacement convention
    rotate_history(s, std::move(d_old), std::move(fluxes), std::move(level), std::move(theta2d),
                   FaceField());
    s.time += dt;
    ++s.step_index;
    rep.gauss_residual = gauss_defect(s);
    return rep;
  } catch (const StepFailure&) {
    throw;
  } catch (const NumericalError& e) {
    throw StepFailure(step, e.what());
  }
}

CellField reconstruct_potential_1d(const StaggeredGrid& g, const Eigen::VectorXd& dphidx,
                                   const RobinBc& bc) {
  if (g.dim != 1 || dphidx.size() != g.num_x_faces()) {
    throw ConfigError("reconstruct_potential_1d needs nx+1 face slopes on a 1D grid");
  }
  CellField phi(g);
  phi.values[0] = bc.phi_left + (bc.eta + 0.5 * g.dx) * dphidx[0];
  for (int i = 1; i < g.nx; ++i) phi.values[i] = phi.values[i - 1] + g.dx * dphidx[i];
  return phi;
}

}  // namespace manp
