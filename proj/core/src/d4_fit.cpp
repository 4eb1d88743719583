#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "spheresync/errors.hpp"
#include "spheresync/steady_states.hpp"

namespace spheresync {

namespace {

using std::numbers::pi;

// Residuals G_ij - model(i - j) over all pairs i < j; parameters (alpha, beta, theta).
struct GramResidual : Eigen::DenseFunctor<double> {
  const Matrix& gram;
  int n;

  GramResidual(const Matrix& g, int nodes)
      : Eigen::DenseFunctor<double>(3, nodes * (nodes - 1) / 2), gram(g), n(nodes) {}

  int operator()(const InputType& p, ValueType& f) const {
    const double c2 = std::cos(p[2]) * std::cos(p[2]);
    const double s2 = 1.0 - c2;
    Eigen::Index row = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double k = j - i;
        f[row++] = c2 * std::cos(p[0] * pi * k / n) + s2 * std::cos(3.0 * p[1] * pi * k / n) - gram(i, j);
      }
    }
    return 0;
  }

  int df(const InputType& p, JacobianType& jac) const {
    const double c2 = std::cos(p[2]) * std::cos(p[2]);
    const double s2 = 1.0 - c2;
    const double dc2 = -std::sin(2.0 * p[2]);
    Eigen::Index row = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const double k = j - i;
        const double a = p[0] * pi * k / n;
        const double b = 3.0 * p[1] * pi * k / n;
        jac(row, 0) = -c2 * std::sin(a) * pi * k / n;
        jac(row, 1) = -s2 * std::sin(b) * 3.0 * pi * k / n;
        jac(row, 2) = dc2 * (std::cos(a) - std::cos(b));
        ++row;
      }
    }
    return 0;
  }
};

// Folds the parameter symmetries of the model into alpha, beta >= 0,
// theta in [0, pi/2], alpha <= 3 beta.
// cos(a pi k/N) is even and 2N-periodic in a: fold a into [0, N].
double fold_frequency(double a, int n) {
  a = std::fmod(std::abs(a), 2.0 * n);
  return a > n ? 2.0 * n - a : a;
}

void canonicalize(double& alpha, double& beta, double& theta, int n) {
  alpha = fold_frequency(alpha, n);
  beta = fold_frequency(3.0 * beta, n) / 3.0;
  double c2 = std::cos(theta) * std::cos(theta);
  if (alpha > 3.0 * beta) {
    const double a = 3.0 * beta;
    beta = alpha / 3.0;
    alpha = a;
    c2 = 1.0 - c2;
  }
  theta = std::acos(std::sqrt(std::clamp(c2, 0.0, 1.0)));
}

}  // namespace

D4Fit fit_d4_parameters(const Configuration& config) {
  if (config.dimension() != 4) {
    throw ValidationError(fmt::format("fit_d4_parameters needs d = 4 (got {})", config.dimension()));
  }
  const int n = config.size();
  const Matrix gram = config.nodes().transpose() * config.nodes();

  D4Fit out;
  out.r_inf_measured = config.average().norm();
  if ((gram.array() - 1.0).abs().maxCoeff() < 1e-9) {
    out.degenerate = true;
    out.converged = false;
    out.r_inf_predicted = 1.0;
    out.diagnostics = "Gram matrix is all ones: nodes co-located, parameters undetermined";
    return out;
  }

  const GramResidual functor(gram, n);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_p(3);
  int best_status = 0;
  const double alphas[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  const double betas[] = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  const double thetas[] = {pi / 8.0, pi / 4.0, 3.0 * pi / 8.0};
  for (double a0 : alphas) {
    for (double b0 : betas) {
      for (double t0 : thetas) {
        Eigen::VectorXd p(3);
        p << a0, b0, t0;
        GramResidual f(gram, n);
        Eigen::LevenbergMarquardt<GramResidual> lm(f);
        lm.setXtol(1e-14);
        lm.setFtol(1e-14);
        lm.setMaxfev(2000);
        const auto status = lm.minimize(p);
        ++out.starts;
        Eigen::VectorXd res(functor.values());
        functor(p, res);
        const double rms = std::sqrt(res.squaredNorm() / static_cast<double>(res.size()));
        if (rms < best) {
          best = rms;
          best_p = p;
          best_status = static_cast<int>(status);
        }
      }
    }
  }

  out.alpha = best_p[0];
  out.beta = best_p[1];
  out.theta = best_p[2];
  canonicalize(out.alpha, out.beta, out.theta, n);
  out.rms_residual = best;
  out.r_inf_predicted = d4_r_infinity(n, out.alpha, out.beta, out.theta);
  out.converged = std::isfinite(best) && best < 1e-6;
  out.degenerate = out.alpha < 1e-6 && out.beta < 1e-6;
  out.diagnostics = fmt::format("best of {} starts: rms {:.3e}, solver status {}", out.starts, best, best_status);
  return out;
}

}  // namespace spheresync
