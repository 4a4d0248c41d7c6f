#include "bosonic/fock.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace bosonic {

Ladder build_ladder(int cutoff) {
  const int d = cutoff + 1;
  Ladder l;
  l.a = Mat::Zero(d, d);
  for (int n = 1; n < d; ++n) l.a(n - 1, n) = std::sqrt(double(n));
  l.adag = l.a.adjoint();
  l.n = Mat::Zero(d, d);
  for (int n = 0; n < d; ++n) l.n(n, n) = double(n);
  return l;
}

double log_factorial(int n) { return std::lgamma(double(n) + 1.0); }

namespace {

/* Fills one diagonal of the displacement matrix: out[n] = <n+k|D(alpha)|n>
 * for n = 0..count-1, k >= 0.  The closed form is
 *   e^{-x/2} sqrt(n!/(n+k)!) alpha^k L_n^{(k)}(x),   x = |alpha|^2,
 * evaluated through a recurrence on the scaled magnitude (phase split off),
 * which keeps every intermediate in [-1, 1]. */
void displacement_diagonal(cxd alpha, int k, int count, std::vector<cxd>& out) {
  const double x = std::norm(alpha);
  const double logmag = std::log(std::abs(alpha));
  const cxd phase = std::polar(1.0, double(k) * std::arg(alpha));

  double m0 = std::exp(-0.5 * x + k * logmag - 0.5 * log_factorial(k));
  out[0] = m0 * phase;
  if (count == 1) return;
  double m1 = (1.0 + k - x) * std::exp(-0.5 * x + k * logmag - 0.5 * log_factorial(k + 1));
  out[1] = m1 * phase;
  for (int n = 2; n < count; ++n) {
    const double c1 = std::sqrt(double(n) / double(n + k)) * ((2.0 * n - 1.0 + k - x) / n);
    const double c2 =
        std::sqrt(double(n) * (n - 1.0) / (double(n + k) * (n - 1.0 + k))) * ((n - 1.0 + k) / n);
    const double m2 = c1 * m1 - c2 * m0;
    out[n] = m2 * phase;
    m0 = m1;
    m1 = m2;
  }
}

}  // namespace

Mat displacement_operator(cxd alpha, int cutoff) {
  const int d = cutoff + 1;
  if (std::abs(alpha) == 0.0) return Mat::Identity(d, d);
  Mat D(d, d);
  std::vector<cxd> diag(d);
  for (int k = 0; k < d; ++k) {
    // upper: <n+k|D(alpha)|n>
    displacement_diagonal(alpha, k, d - k, diag);
    for (int n = 0; n + k < d; ++n) D(n + k, n) = diag[n];
    if (k == 0) continue;
    // lower: <n|D(alpha)|n+k> = conj(<n+k|D(-alpha)|n>)
    displacement_diagonal(-alpha, k, d - k, diag);
    for (int n = 0; n + k < d; ++n) D(n, n + k) = std::conj(diag[n]);
  }
  return D;
}

Mat squeezing_operator(double r, int cutoff) {
  Ladder l = build_ladder(cutoff);
  Mat gen = 0.5 * r * (l.a * l.a - l.adag * l.adag);
  return gen.exp();
}

FockVector coherent_state(cxd alpha, int cutoff) {
  const int d = cutoff + 1;
  FockVector v;
  v.amps = Vec(d);
  if (std::abs(alpha) == 0.0) {
    v.amps.setZero();
    v.amps(0) = 1.0;
    return v;
  }
  const double x = std::norm(alpha);
  const double logmag = std::log(std::abs(alpha));
  const double theta = std::arg(alpha);
  double total = 0.0;
  for (int n = 0; n < d; ++n) {
    const double mag = std::exp(-0.5 * x + n * logmag - 0.5 * log_factorial(n));
    v.amps(n) = std::polar(mag, n * theta);
    total += mag * mag;
  }
  v.deficit = std::max(0.0, 1.0 - total);
  return v;
}

WignerGrid wigner_samples(const Mat& rho, double qmax, double pmax, int points) {
  const int d = static_cast<int>(rho.rows());
  WignerGrid g;
  g.q = Eigen::VectorXd::LinSpaced(points, -qmax, qmax);
  g.p = Eigen::VectorXd::LinSpaced(points, -pmax, pmax);
  g.w.resize(points, points);
  // W(alpha) = (2/pi) tr[rho D(2 alpha) Pi]; build D diagonal-by-diagonal so
  // each grid point costs O(d^2) with no matrix products.
  std::vector<cxd> diag(d);
  Mat rhoT = rho.transpose();  // tr[rho M] = sum_{mn} rhoT(m,n) M(m,n)
  for (int i = 0; i < points; ++i) {
    for (int j = 0; j < points; ++j) {
      const cxd beta = 2.0 * cxd(g.q(i), g.p(j));
      cxd acc = 0.0;
      if (std::abs(beta) == 0.0) {
        for (int n = 0; n < d; ++n) acc += rhoT(n, n) * double(n % 2 ? -1 : 1);
      } else {
        for (int k = 0; k < d; ++k) {
          displacement_diagonal(beta, k, d - k, diag);
          for (int n = 0; n + k < d; ++n)
            acc += rhoT(n + k, n) * diag[n] * double(n % 2 ? -1 : 1);
          if (k == 0) continue;
          displacement_diagonal(-beta, k, d - k, diag);
          for (int n = 0; n + k < d; ++n)
            acc += rhoT(n, n + k) * std::conj(diag[n]) * double((n + k) % 2 ? -1 : 1);
        }
      }
      g.w(i, j) = 2.0 / M_PI * acc.real();
    }
  }
  return g;
}

int cutoff_for_coverage(const Eigen::VectorXd& weights, double tail) {
  const double total = weights.sum();
  if (total <= 0.0) throw std::invalid_argument("cutoff_for_coverage: empty weight sequence");
  double run = 0.0;
  for (int n = 0; n < weights.size(); ++n) {
    run += weights(n);
    if (run >= (1.0 - tail) * total) return n;
  }
  return static_cast<int>(weights.size()) - 1;
}

namespace {

/* Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the orthogonal
 * polynomial recurrence, weights are mu0 * (first eigenvector component)^2. */
void golub_welsch(const Eigen::VectorXd& offdiag, double mu0, Eigen::VectorXd& nodes,
                  Eigen::VectorXd& weights) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag(i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  nodes = es.eigenvalues();
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    weights(i) = mu0 * v0 * v0;
  }
}

}  // namespace

void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off(i - 1) = std::sqrt(0.5 * i);
  golub_welsch(off, std::sqrt(M_PI), nodes, weights);
}

void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  Eigen::VectorXd off(n - 1);
  for (int i = 1; i < n; ++i) off(i - 1) = double(i) / std::sqrt(4.0 * i * i - 1.0);
  golub_welsch(off, 2.0, nodes, weights);
}

}  // namespace bosonic
