#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>
#include <vector>

namespace lgsim::detail {

// Homogeneous 4x4 form of the Bloch equations, w = (x, y, z, 1):
// dw/dt = B w. Diagonalized once, then evaluated at arbitrary times.
class BlochPropagator {
 public:
  BlochPropagator(double gamma1, double gamma2, double omega_rabi, double detuning,
                  double z_thermal);

  Eigen::Vector4d apply(double t, const Eigen::Vector4d& w0) const;

  // z(t) for the unit initial conditions z0 = 1 (b) and z_th = 1 (a),
  // with everything else zero. z(t) = z0 b(t) + z_th a(t).
  void z_basis(std::span<const double> times, std::vector<double>& a,
               std::vector<double>& b) const;

 private:
  void factor(const Eigen::Matrix4d& B);

  Eigen::Vector4cd lambda_;
  Eigen::Matrix4cd v_;
  Eigen::Matrix4cd v_inv_;
};

Eigen::Matrix4d bloch_generator(double gamma1, double gamma2, double omega_rabi,
                                double detuning, double z_thermal);

}  // namespace lgsim::detail
