#include "ldrift/accretive_op.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <nlohmann/json.hpp>

namespace ldrift {

TruncatedOperator::TruncatedOperator(const ProblemData& data, double t, double level, std::vector<double> share)
    : data_(&data), t_(t), level_(level), share_(std::move(share)) {
  const auto& d = data.domain;
  has_drift_ = data.drift.active() && std::any_of(share_.begin(), share_.end(), [](double s) { return s != 0.0; });
  nodes_.resize(d.interior_count());
  for (std::size_t i = 0; i < nodes_.size(); ++i) nodes_[i] = d.node_position(i);
  for (int a = 0; a < d.dim(); ++a) {
    faces_[a].resize(d.face_count(a));
    for (std::size_t f = 0; f < faces_[a].size(); ++f) faces_[a][f] = d.face_position(a, f);
    adj_[a] = face_nodes(d, a);
  }
}

TruncatedOperator TruncatedOperator::truncated(const ProblemData& data, double level, double t) {
  if (!(level > 0.0)) throw std::invalid_argument("truncation level must be positive");
  std::vector<double> share(data.domain.interior_count(), 0.0);
  if (data.drift.active() && std::isfinite(level)) {
    const auto theta = truncation_weight(drift_coefficient(data, t), level);
    for (std::size_t i = 0; i < share.size(); ++i) share[i] = 1.0 - theta[i];
  }
  return TruncatedOperator(data, t, level, std::move(share));
}

TruncatedOperator TruncatedOperator::full(const ProblemData& data, double t) {
  return TruncatedOperator(data, t, 0.0, std::vector<double>(data.domain.interior_count(), 1.0));
}

TruncatedOperator TruncatedOperator::diffusion(const ProblemData& data, double t) {
  return TruncatedOperator(data, t, std::numeric_limits<double>::infinity(),
                           std::vector<double>(data.domain.interior_count(), 0.0));
}

VectorField TruncatedOperator::drift_faces(const GridFunction& u, bool complement) const {
  const auto& d = domain();
  VectorField q(d);
  if (!data_->drift.active()) return q;
  std::vector<Vec3> node_b(nodes_.size());
  bool any = false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double s = complement ? 1.0 - share_[i] : share_[i];
    if (s == 0.0) {
      node_b[i] = Vec3{0.0, 0.0, 0.0};
      continue;
    }
    any = true;
    const Vec3 b = data_->drift.evaluate(nodes_[i], t_, u[i]);
    node_b[i] = Vec3{s * b[0], s * b[1], s * b[2]};
  }
  if (!any) return q;
  for (int a = 0; a < d.dim(); ++a) {
    auto& c = q.component(a);
    for (std::size_t f = 0; f < c.size(); ++f) {
      const auto [l, r] = adj_[a][f];
      double v = 0.0;
      if (l >= 0) v += node_b[l][a];
      if (r >= 0) v += node_b[r][a];
      c[f] = 0.5 * v;
    }
  }
  return q;
}

VectorField TruncatedOperator::flux(const GridFunction& u) const {
  const auto& d = domain();
  auto q = gradient(u);
  const auto& A = data_->diffusion;
  for (int a = 0; a < d.dim(); ++a) {
    auto& c = q.component(a);
    for (std::size_t f = 0; f < c.size(); ++f) c[f] = A.component(faces_[a][f], t_, a, c[f]);
  }
  if (has_drift_) q += drift_faces(u, false);
  return q;
}

VectorField TruncatedOperator::complementary_drift(const GridFunction& u) const { return drift_faces(u, true); }

GridFunction TruncatedOperator::apply(const GridFunction& u) const {
  auto w = divergence(flux(u));
  w *= -1.0;
  return w;
}

double TruncatedOperator::pairing(const GridFunction& u, const GridFunction& v) const {
  return inner_vec(flux(u), gradient(v));
}

Eigen::SparseMatrix<double> TruncatedOperator::jacobian(const GridFunction& u) const {
  const auto& d = domain();
  const auto& A = data_->diffusion;
  const auto g = gradient(u);
  std::vector<Vec3> node_slope;
  if (has_drift_) {
    node_slope.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const Vec3 s = data_->drift.slope(nodes_[i], t_, u[i]);
      node_slope[i] = Vec3{share_[i] * s[0], share_[i] * s[1], share_[i] * s[2]};
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(u.size() * (4 * d.dim() + 1));
  for (int a = 0; a < d.dim(); ++a) {
    const double inv_h = 1.0 / d.width(a);
    const auto& gc = g.component(a);
    for (std::size_t f = 0; f < gc.size(); ++f) {
      const auto [l, r] = adj_[a][f];
      const double k = A.slope(faces_[a][f], t_, a, gc[f]) * inv_h;
      // d flux_f / d u_r and d flux_f / d u_l.
      double dr = k;
      double dl = -k;
      if (has_drift_) {
        if (r >= 0) dr += 0.5 * node_slope[r][a];
        if (l >= 0) dl += 0.5 * node_slope[l][a];
      }
      // apply[l] -= flux_f / h, apply[r] += flux_f / h.
      if (r >= 0) {
        trip.emplace_back(r, r, dr * inv_h);
        if (l >= 0) trip.emplace_back(r, l, dl * inv_h);
      }
      if (l >= 0) {
        trip.emplace_back(l, l, -dl * inv_h);
        if (r >= 0) trip.emplace_back(l, r, -dr * inv_h);
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(u.size());
  Eigen::SparseMatrix<double> J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

double accretivity_margin(const TruncatedOperator& op, const GridFunction& u, const GridFunction& v) {
  const auto w = u - v;
  const double gw = h1_seminorm(w);
  return op.pairing(u, w) - op.pairing(v, w) - 0.5 * op.alpha() * gw * gw;
}

SolverMethod parse_solver_method(const std::string& name) {
  if (name == "picard" || name == "damped-picard") return SolverMethod::picard;
  if (name == "newton") return SolverMethod::newton;
  throw std::invalid_argument("unknown solver method '" + name + "'");
}

std::string to_string(SolverMethod m) { return m == SolverMethod::picard ? "picard" : "newton"; }

void ResolventConfig::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent lambda must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
  if (relaxation > 1.0) throw std::invalid_argument("solver relaxation must lie in (0, 1]");
}

struct ShiftedLaplacian::Impl {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> chol;
};

ShiftedLaplacian::ShiftedLaplacian(const BoxDomain& domain, double shift, double scale)
    : impl_(std::make_unique<Impl>()), domain_(domain), shift_(shift), scale_(scale) {
  Eigen::SparseMatrix<double> k = scale * dirichlet_laplacian(domain);
  if (shift != 0.0) {
    Eigen::SparseMatrix<double> id(k.rows(), k.cols());
    id.setIdentity();
    k += shift * id;
  }
  impl_->chol.compute(k);
  if (impl_->chol.info() != Eigen::Success) throw std::runtime_error("preconditioner factorisation failed");
}

ShiftedLaplacian::~ShiftedLaplacian() = default;
ShiftedLaplacian::ShiftedLaplacian(ShiftedLaplacian&&) noexcept = default;
ShiftedLaplacian& ShiftedLaplacian::operator=(ShiftedLaplacian&&) noexcept = default;

GridFunction ShiftedLaplacian::solve(const GridFunction& r) const {
  Eigen::VectorXd x = impl_->chol.solve(r.as_eigen());
  return GridFunction(domain_, std::vector<double>(x.data(), x.data() + x.size()));
}

namespace {

GridFunction system_residual(const TruncatedOperator& op, double mass, double lambda, const GridFunction& u,
                             const GridFunction& rhs) {
  auto r = op.apply(u);
  r *= lambda;
  r.axpy(mass, u);
  r -= rhs;
  return r;
}

bool blown_up(double res, double first) { return !std::isfinite(res) || res > 1e8 * std::max(first, 1e-300); }

}  // namespace

SolveResult solve_monotone(const TruncatedOperator& op, double mass, double lambda, const GridFunction& rhs,
                           const ResolventConfig& cfg, const std::function<double(const GridFunction&)>& residual_norm,
                           double target, const GridFunction* guess, const ShiftedLaplacian* preconditioner) {
  cfg.validate();
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (mass < 0.0) throw std::invalid_argument("mass must be >= 0");

  SolverDiagnostics diag;
  diag.method = to_string(cfg.method);
  GridFunction u = guess ? *guess : GridFunction(op.domain());
  auto r = system_residual(op, mass, lambda, u, rhs);
  double res = residual_norm(r);
  diag.residual_history.push_back(res);
  const double first = res;

  if (cfg.method == SolverMethod::picard) {
    const double m = mass > 0.0 ? std::min(1.0, op.alpha()) : op.alpha();
    const double L = mass > 0.0 ? std::max(1.0, op.beta()) : op.beta();
    const double rho = cfg.relaxation > 0.0 ? cfg.relaxation : m / (L * L);
    diag.relaxation = rho;
    std::unique_ptr<ShiftedLaplacian> own;
    if (!preconditioner || preconditioner->shift() != mass || preconditioner->scale() != lambda) {
      own = std::make_unique<ShiftedLaplacian>(op.domain(), mass, lambda);
      preconditioner = own.get();
    }
    while (res > target && diag.iterations < cfg.max_iter) {
      u.axpy(-rho, preconditioner->solve(r));
      r = system_residual(op, mass, lambda, u, rhs);
      res = residual_norm(r);
      ++diag.iterations;
      diag.residual_history.push_back(res);
      if (blown_up(res, first)) break;
    }
  } else {
    Eigen::SparseMatrix<double> id(static_cast<Eigen::Index>(u.size()), static_cast<Eigen::Index>(u.size()));
    id.setIdentity();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    while (res > target && diag.iterations < cfg.max_iter) {
      Eigen::SparseMatrix<double> J = lambda * op.jacobian(u);
      if (mass != 0.0) J += mass * id;
      lu.compute(J);
      if (lu.info() != Eigen::Success) {
        diag.converged = false;
        throw SolverError("Newton: Jacobian factorisation failed", diag);
      }
      Eigen::VectorXd dx = lu.solve(r.as_eigen());
      GridFunction step(op.domain(), std::vector<double>(dx.data(), dx.data() + dx.size()));
      // Backtracking on the residual norm.
      double t = 1.0;
      GridFunction trial = u;
      double trial_res = res;
      for (int k = 0; k < 30; ++k, t *= 0.5) {
        trial = u;
        trial.axpy(-t, step);
        r = system_residual(op, mass, lambda, trial, rhs);
        trial_res = residual_norm(r);
        if (trial_res < res || trial_res <= target) break;
      }
      u = std::move(trial);
      res = trial_res;
      ++diag.iterations;
      diag.residual_history.push_back(res);
      if (blown_up(res, first)) break;
      // Stagnation at round-off: the step no longer changes anything.
      if (t < 1e-8) break;
    }
  }
  diag.converged = res <= target;
  if (!diag.converged) {
    throw SolverError(diag.method + " solver did not converge: residual " + std::to_string(res) + " after " +
                          std::to_string(diag.iterations) + " iterations (target " + std::to_string(target) + ")",
                      std::move(diag));
  }
  return {std::move(u), std::move(diag)};
}

SolveResult resolve(const TruncatedOperator& op, const GridFunction& g, const ResolventConfig& cfg,
                    const GridFunction* guess, const ShiftedLaplacian* preconditioner) {
  if (!(cfg.lambda > 0.0)) throw std::invalid_argument("resolvent lambda must be positive");
  const double target = cfg.tol * (1.0 + l2_norm(g));
  return solve_monotone(op, 1.0, cfg.lambda, g, cfg, [](const GridFunction& r) { return l2_norm(r); }, target,
                        guess, preconditioner);
}

void to_json(nlohmann::json& j, const SolverDiagnostics& d) {
  j = nlohmann::json{{"method", d.method},
                     {"iterations", d.iterations},
                     {"converged", d.converged},
                     {"relaxation", d.relaxation},
                     {"residual_history", d.residual_history}};
}

}  // namespace ldrift
