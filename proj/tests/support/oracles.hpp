#pragma once

/* Independent reference routes used to certify the recovery optimizer.
 * Nothing here shares code with the production solver: the recovery search
 * runs projected gradient ascent over an isometry parameterization, and the
 * Gaussian tail mass comes from a two-dimensional quadrature rather than
 * error functions. */

#include "bosonic/fock.hpp"

#include <random>
#include <vector>

namespace bosonic::oracle {

/* Best channel fidelity over all CPTP recoveries C^d -> C^2 for the fixed
 * effective map with Kraus operators `effective` (each d x 2).  A recovery
 * with m Kraus operators is the stacked matrix A (2m x d) with A^dag A = I;
 * m = 2d covers every possible Choi rank.  F(A) = (1/4) sum |tr(R_j M_k)|^2
 * is maximized by gradient ascent with a polar retraction back onto the
 * isometries, restarted from Haar-random points. */
inline double brute_force_recovery_fidelity(const std::vector<Mat>& effective,
                                            int restarts = 20,
                                            unsigned seed = 11,
                                            int max_iters = 4000) {
  const int d = static_cast<int>(effective.at(0).rows());
  const int m = 2 * d;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto fidelity_and_gradient = [&](const Mat& A, Mat* grad) {
    double f = 0.0;
    if (grad) grad->setZero();
    for (int j = 0; j < m; ++j) {
      const auto R = A.block(2 * j, 0, 2, d);
      for (const Mat& M : effective) {
        const cxd z = (R * M).trace();
        f += 0.25 * std::norm(z);
        if (grad) grad->block(2 * j, 0, 2, d) += 0.25 * z * M.adjoint();
      }
    }
    return f;
  };
  auto polar = [](const Mat& B) {
    Eigen::JacobiSVD<Mat> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
    return Mat(svd.matrixU() * svd.matrixV().adjoint());
  };

  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    Mat G(2 * m, d);
    for (int i = 0; i < G.rows(); ++i)
      for (int j = 0; j < G.cols(); ++j) G(i, j) = cxd(gauss(rng), gauss(rng));
    Mat A = polar(G);

    Mat grad(2 * m, d);
    double f = fidelity_and_gradient(A, &grad);
    double step = 1.0;
    int stale = 0;
    for (int it = 0; it < max_iters && stale < 8; ++it) {
      bool improved = false;
      for (int back = 0; back < 40; ++back) {
        const Mat trial = polar(A + step * grad);
        const double ft = fidelity_and_gradient(trial, nullptr);
        if (ft > f) {
          improved = ft - f > 1e-13;
          A = trial;
          f = ft;
          fidelity_and_gradient(A, &grad);
          step *= 1.3;
          break;
        }
        step *= 0.5;
      }
      stale = improved ? 0 : stale + 1;
    }
    best = std::max(best, f);
  }
  return best;
}

/* Mass of the normalized Gaussian (u/pi) exp(-u |alpha|^2) outside the square
 * |alpha_1|, |alpha_2| <= c, via a genuine two-dimensional Gauss-Legendre
 * rule over the square (no error functions involved). */
inline double gaussian_mass_outside_square(double u, double c, int nodes = 80) {
  Eigen::VectorXd x, w;
  gauss_legendre(nodes, x, w);
  double inside = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double a1 = c * x(i);
    for (int j = 0; j < nodes; ++j) {
      const double a2 = c * x(j);
      inside += w(i) * w(j) * std::exp(-u * (a1 * a1 + a2 * a2));
    }
  }
  inside *= c * c * u / M_PI;
  return 1.0 - inside;
}

}  // namespace bosonic::oracle
