#pragma once

#include "bosonic/channels.hpp"
#include "bosonic/codes.hpp"

namespace bosonic {

/* Loss-error overlap structure of a two-dimensional code: blocks
 * B(l,lp) = V^dag E_l^dag E_lp V in the pair's logical basis {|0>,|1>},
 * with the per-block split B = c P + x X + y Y + z Z over the real
 * generators X = |0><1|+|1><0|, Y = |1><0|-|0><1| (that is, -i sigma_y),
 * Z = |0><0|-|1><1|, so every coefficient is real whenever the code kets
 * and loss operators are real.  The diagonal c coefficients are the
 * loss-count distribution; everything else is distortion or leakage
 * between error subspaces. */
struct QecMatrix {
  int L = 0;
  double gamma = 0.0;
  std::vector<Eigen::Matrix2cd> blocks;  // row-major, (L+1)^2 of them

  const Eigen::Matrix2cd& block(int l, int lp) const {
    return blocks[static_cast<size_t>(l) * (L + 1) + lp];
  }
  Mat full() const;  // assembled 2(L+1) square Hermitian matrix
  double c(int l, int lp) const;
  double x(int l, int lp) const;
  double y(int l, int lp) const;
  double z(int l, int lp) const;

  double imag_residual = 0.0;   // largest imaginary part of any coefficient
  double mass_beyond_L = 0.0;   // loss probability not covered by l <= L
  double min_eigenvalue = 0.0;  // of full(); PSD up to numerics
  bool cutoff_starved = false;  // code tail at the Fock cutoff above 1e-6
};

/* L < 0 picks the smallest L covering 99.99% of the loss-count mass. */
QecMatrix qec_matrix(const CodePair& pair, double gamma, int L = -1);

/* Largest single distortion coefficient max(|x|,|y|,|z|) over all blocks. */
double max_uncorrectable(const QecMatrix& m);

/* Heat-map rows "l,lp,component,value" with component in {c,x,y,z}. */
void write_qec_csv(const QecMatrix& m, std::ostream& out);

/* Closed forms for the cat pair under loss: diagonal-block coefficients
 * c_ll and z_ll (Poisson factor times damped-normalization ratios), the
 * first uncorrectable block at (0, S+1), and the ket mean-occupation
 * imbalance dnbar whose zeros are the backaction sweet spots. */
struct CatAnalytic {
  double c = 0.0, z = 0.0;
  Eigen::Matrix2cd eps_first;  // block (0, S+1), an antidiagonal bit flip
  double x_first = 0.0;        // its X coefficient
  double dnbar = 0.0;
};
CatAnalytic cat_analytic_block(double alpha, int S, double gamma, int ell);

/* Closed forms for the binomial pair (plus/minus basis): c and z are the
 * ell-th derivatives of ((1 +- x^{S+1})/2)^{N+1} at x = 1-gamma times
 * gamma^ell/ell!, via exact polynomial differentiation. */
struct BinAnalytic {
  double c = 0.0, z = 0.0;
};
BinAnalytic binomial_analytic_block(int N, int S, double gamma, int ell);

/* Asymptotic (gamma*nbar >> 1) lattice-sum block for the square-lattice
 * grid pair, evaluated over |n1|,|n2| <= radius (auto-enlarged while the
 * next shell contributes more than 1e-3 relative, capped at 12).  Also
 * exposes the thermal loss weight c_ll and the nearest-neighbor distortion
 * estimate sqrt(c c') e^{-(pi/4)(1-g)/g} <l|D+D^dag|l'> at real shift
 * sqrt(pi/(2 gamma)). */
struct GkpAnalytic {
  Eigen::Matrix2cd block;
  double c_thermal = 0.0;
  double z_estimate = 0.0;
  double gamma_nbar = 0.0;
  bool asymptotic_ok = false;  // gamma*nbar >= 1; formula degrades below
  int radius_used = 0;
};
GkpAnalytic gkp_analytic_block(double delta, double gamma, int ell, int ellp,
                               int radius = 3);

/* Lattice-sum estimate of <mu|D_alpha|nu> for the square grid pair (the
 * displaced-comb overlap before any loss), normalized so alpha = 0 with
 * mu = nu tends to one as delta shrinks. */
cxd gkp_displacement_overlap(double delta, cxd alpha, int mu, int nu, int radius = 6);

/* Numeric moment tr{P n^ell}/2 of the square grid pair next to the
 * geometric-distribution prediction ell! nbar^ell. */
struct GkpMoment {
  double numeric = 0.0;
  double thermal = 0.0;
};
GkpMoment moments_gkp(double delta, int ell, int cutoff_cap = 420);

/* Geometry of the error subspaces E_l V: ranks, pairwise principal angles
 * (radians; entry (l,lp) summarizes the angle spectrum between the two
 * ranges), and the detection residuals || M - (tr M / 2) I ||_F with
 * M = V^dag E_l V, which vanish exactly when l losses are detectable. */
struct ErrorSubspaceReport {
  int L = 0;
  std::vector<int> ranks;
  std::vector<double> detection_residuals;
  Eigen::MatrixXd angle_min, angle_max;
  bool rank_deficient = false;
};
ErrorSubspaceReport error_subspace_report(const CodePair& pair, double gamma, int L = -1);

}  // namespace bosonic
