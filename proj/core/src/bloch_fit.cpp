#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "bloch_internal.hpp"
#include "lgsim/errors.hpp"
#include "lgsim/qubit_dynamics.hpp"

namespace lgsim::qubit {

namespace {

// Variable projection: for fixed (gamma2, wR) the initial value and thermal
// offset enter linearly and are eliminated by a 2-column least squares.
class RabiProblem {
 public:
  RabiProblem(const SpinTrajectory& traj, double gamma1)
      : t_(traj.times), z_(traj.z()), gamma1_(gamma1) {}

  // p = (log(gamma2 - gamma1/2), wR)
  double gamma2(const Eigen::Vector2d& p) const { return 0.5 * gamma1_ + std::exp(p[0]); }
  double omega(const Eigen::Vector2d& p) const { return std::abs(p[1]); }

  Eigen::VectorXd residual(const Eigen::Vector2d& p, Eigen::Vector2d* coeffs = nullptr) const {
    const detail::BlochPropagator prop(gamma1_, gamma2(p), omega(p), 0.0, 1.0);
    prop.z_basis(t_, a_, b_);
    const auto n = static_cast<Eigen::Index>(t_.size());
    Eigen::MatrixXd phi(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
      phi(i, 0) = b_[static_cast<std::size_t>(i)];
      phi(i, 1) = a_[static_cast<std::size_t>(i)];
    }
    const Eigen::Map<const Eigen::VectorXd> z(z_.data(), n);
    const Eigen::Vector2d c = phi.colPivHouseholderQr().solve(z);
    if (coeffs) *coeffs = c;
    return z - phi * c;
  }

  double cost(const Eigen::Vector2d& p) const { return residual(p).squaredNorm(); }

  std::size_t size() const { return t_.size(); }
  double span() const { return t_.back() - t_.front(); }
  double min_step() const {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < t_.size(); ++i) s = std::min(s, t_[i] - t_[i - 1]);
    return s;
  }

 private:
  std::span<const double> t_;
  std::vector<double> z_;
  double gamma1_;
  mutable std::vector<double> a_, b_;
};

struct LmResult {
  Eigen::Vector2d p;
  double cost;
  int iterations;
};

LmResult levenberg_marquardt(const RabiProblem& prob, Eigen::Vector2d p, double rel_tol,
                             int max_iter) {
  double mu = 1e-3;
  Eigen::VectorXd r = prob.residual(p);
  double cost = r.squaredNorm();
  int it = 0;
  for (; it < max_iter; ++it) {
    Eigen::MatrixXd J(r.size(), 2);
    for (int k = 0; k < 2; ++k) {
      const double h = 1e-6 * std::max(std::abs(p[k]), k == 0 ? 1.0 : 1e3);
      Eigen::Vector2d pp = p, pm = p;
      pp[k] += h;
      pm[k] -= h;
      J.col(k) = (prob.residual(pp) - prob.residual(pm)) / (2.0 * h);
    }
    const Eigen::Matrix2d A = J.transpose() * J;
    const Eigen::Vector2d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::Matrix2d Ad = A;
      Ad.diagonal() *= (1.0 + mu);
      Ad.diagonal().array() += 1e-300;
      const Eigen::Vector2d step = Ad.ldlt().solve(-g);
      const Eigen::Vector2d pn = p + step;
      const Eigen::VectorXd rn = prob.residual(pn);
      const double cn = rn.squaredNorm();
      if (cn < cost) {
        const double rel = (cost - cn) / std::max(cost, 1e-300);
        const bool small_step =
            std::abs(step[0]) < rel_tol * (1.0 + std::abs(p[0])) &&
            std::abs(step[1]) < rel_tol * std::max(std::abs(p[1]), 1.0);
        p = pn;
        r = rn;
        cost = cn;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
        if (rel < rel_tol || small_step) return {p, cost, it + 1};
      } else {
        mu *= 4.0;
      }
    }
    if (!improved) break;
  }
  return {p, cost, it};
}

std::vector<double> log_space(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  return v;
}

}  // namespace

RabiFit fit_rabi_decay(const SpinTrajectory& traj, const TlsParams& tls,
                       const RabiFitOptions& options) {
  tls.validate();
  traj.validate();
  if (traj.times.size() < 8) throw FitError("trajectory too short to fit", 0.0);

  const RabiProblem prob(traj, tls.gamma1);
  const double T = prob.span();
  const double dt = prob.min_step();

  // Multistart: coarse scan over (gamma2, wR), refine the best candidates.
  struct Start {
    double cost;
    Eigen::Vector2d p;
  };
  std::vector<Start> starts;
  const auto omegas = log_space(0.5 / T, 0.9 * 3.14159 / dt, 36);
  const auto excess = log_space(0.1 / T, 1.0 / dt, 18);
  for (double w : omegas)
    for (double g : excess) {
      const Eigen::Vector2d p(std::log(g), w);
      starts.push_back({prob.cost(p), p});
    }
  std::partial_sort(starts.begin(), starts.begin() + 5, starts.end(),
                    [](const Start& a, const Start& b) { return a.cost < b.cost; });

  LmResult best{starts[0].p, std::numeric_limits<double>::infinity(), 0};
  int total_iter = 0;
  for (int i = 0; i < 5; ++i) {
    const LmResult res = levenberg_marquardt(prob, starts[static_cast<std::size_t>(i)].p,
                                             options.rel_tol, options.max_iterations);
    total_iter += res.iterations;
    if (res.cost < best.cost) best = res;
  }

  Eigen::Vector2d coeffs;
  const double rms =
      std::sqrt(prob.residual(best.p, &coeffs).squaredNorm() / static_cast<double>(prob.size()));
  if (!std::isfinite(rms) || rms > options.max_rms)
    throw FitError("Bloch fit did not converge (rms residual " + std::to_string(rms) + ")", rms);

  RabiFit fit;
  fit.gamma2 = prob.gamma2(best.p);
  fit.omega_rabi = prob.omega(best.p);
  const double half = 0.5 * (fit.gamma2 - tls.gamma1);
  fit.omega_osc_sq = fit.omega_rabi * fit.omega_rabi - half * half;
  const double gamma_mean = 0.5 * (fit.gamma2 + tls.gamma1);
  const double slowest =
      fit.omega_osc_sq >= 0.0 ? gamma_mean : gamma_mean - std::sqrt(-fit.omega_osc_sq);
  fit.decay_time = 1.0 / slowest;
  fit.z_initial = coeffs[0];
  fit.z_offset = coeffs[1];
  fit.rms_residual = rms;
  fit.iterations = total_iter;
  if (T * slowest < 3.0)
    throw FitError("trajectory shorter than three decay times", rms);
  return fit;
}

}  // namespace lgsim::qubit
