#pragma once

#include <Eigen/Dense>
#include <complex>

namespace bosonic {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

/* Pure state in the number basis |0..cutoff>.  `deficit` records the
 * probability weight lost to truncation when the untruncated state is
 * known analytically (coherent states, lattice superpositions, ...). */
struct FockVector {
  Vec amps;
  double deficit = 0.0;

  int cutoff() const { return static_cast<int>(amps.size()) - 1; }
  double norm() const { return amps.norm(); }
};

struct Ladder {
  Mat a;     // annihilation, a|n> = sqrt(n)|n-1>
  Mat adag;  // creation
  Mat n;     // number operator
};

Ladder build_ladder(int cutoff);

double log_factorial(int n);

/* Truncated displacement exp(alpha a^dag - conj(alpha) a).  Matrix elements
 * are evaluated diagonal-by-diagonal with a scaled associated-Laguerre
 * recurrence whose intermediates stay bounded by 1, so the routine is safe
 * for |alpha|^2 and cutoffs far beyond where factorial ratios overflow.
 * Rows near the cutoff are inexact for large |alpha| (the operator is only
 * unitary on the subspace the displaced support fits in). */
Mat displacement_operator(cxd alpha, int cutoff);

/* exp(r/2 (a^2 - a^dag^2)); positive r narrows the q = Re(alpha) quadrature
 * by e^{-r}. */
Mat squeezing_operator(double r, int cutoff);

FockVector coherent_state(cxd alpha, int cutoff);

/* Wigner function on the alpha plane (q = Re alpha, p = Im alpha), with the
 * displaced-parity normalization: integral of w over dq dp equals tr(rho).
 * Vacuum gives w(0,0) = 2/pi. */
struct WignerGrid {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::MatrixXd w;  // w(i,j) = W(q(i), p(j))
};
WignerGrid wigner_samples(const Mat& rho, double qmax, double pmax, int points);

/* Smallest cutoff covering all but `tail` of the weight sequence, i.e. the
 * first index where the running sum of |amps|^2 reaches (1-tail) * total.
 * Inputs need not be normalized. */
int cutoff_for_coverage(const Eigen::VectorXd& weights, double tail);

/* Gauss-Hermite rule for int exp(-s^2) f(s) ds (Golub-Welsch). */
void gauss_hermite(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

/* Gauss-Legendre rule on [-1, 1]. */
void gauss_legendre(int n, Eigen::VectorXd& nodes, Eigen::VectorXd& weights);

}  // namespace bosonic
