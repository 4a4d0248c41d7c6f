#pragma once

#include "bosonic/fock.hpp"

#include <string>
#include <vector>

namespace bosonic {

struct CodeParams {
  double alpha = 0.0;      // cat
  double delta = 0.0;      // gkp
  double lattice_a = 0.0;  // shifted gkp aspect
  int N = -1, S = -1;      // binomial-type
  int M = 0;               // permutation-invariant qubit count
  int index = -1;          // num catalog index
  int d = 2;               // qudit dimension
  bool shifted = false;
};

/* Two orthonormal logical kets over some carrier basis: the Fock basis for
 * oscillator codes, Dicke weights for perm, a two-mode occupation grid for
 * bin2, and 4-qubit product states for leung. */
struct CodePair {
  Vec zero, one;
  std::string family;
  CodeParams params;
  double nbar = 0.0;
  double deficit = 0.0;
  double stab_x = 0.0, stab_p = 0.0;  // gkp stabilizer expectations

  int dim() const { return static_cast<int>(zero.size()); }
  Mat isometry() const;
  Mat projector() const;
};

CodePair make_single_rail();

/* Coherent states projected onto n = (S+1)mu mod 2(S+1); alpha = 0 is only
 * meaningful for S = 0, where the limit is the single-rail pair. */
CodePair make_cat(double alpha, int S, int cutoff = -1);

/* Normalization N_alpha^r = <alpha| Pi_r |alpha> of the mod-2(S+1) Fock
 * class r, evaluated through the discrete-Fourier overlap sum. */
double cat_normalization(double alpha, int r, int S);

/* Binomial code kets sqrt(C(N+1,m)/2^{N+1}) (-1)^{mu m} on Fock (S+1)m. */
CodePair make_binomial(int N, int S);

/* The +- superpositions (ket0 +- ket1)/sqrt2 of the binomial pair, the basis
 * in which photon-loss errors keep the error matrix diagonal. */
CodePair binomial_pm_pair(int N, int S);

/* Numerically-optimized codes: index 0 is the closed-form sqrt(17) code;
 * indices 1-4 load entries produced by the code-search module. */
struct NumCodeEntry {
  int index = -1;
  double nbar = 0.0;
  double cost = 0.0;
  Vec zero, one;
};
std::vector<NumCodeEntry> load_num_catalog(const std::string& path);
void save_num_catalog(const std::string& path, const std::vector<NumCodeEntry>& entries);
CodePair make_num(int index, const std::string& catalog_path = "data/num_codes.txt");

enum class GkpRep { squeezed, coherent, smeared };

/* Grid-state pair at envelope width delta on a lattice of aspect a in [1,2]
 * (a = 2 is the square lattice), optionally shifted off the origin.  The
 * default smeared representation damps the ideal state by lambda^nhat with
 * lambda = (2-delta^2)/(2+delta^2), so nbar tracks 1/(2 delta^2) - 1/2; the
 * coherent representation weights unshrunk lattice centers instead, and the
 * squeezed one (square only) builds one comb of position-squeezed peaks.
 * Raw kets are symmetrically orthogonalized; stab_x/stab_p report the
 * lattice-translation stabilizer expectations.  Throws when the Fock weight
 * cannot be captured to 1e-5 below cutoff_cap. */
CodePair make_gkp(double delta, double lattice_a = 2.0, bool shifted = false,
                  GkpRep rep = GkpRep::smeared, int cutoff_cap = 250);

/* |(|00>+|11>)/sqrt2|^{x2} and partner: 4-qubit amplitude-damping code on a
 * 16-dimensional carrier. */
CodePair make_leung();

/* Permutation-invariant code in the Dicke-weight basis of M qubits:
 * sqrt(C(2J,m)/4^J) (-1)^{mu m} on weight (S+1)m; needs M >= 2J(S+1). */
CodePair make_perm(int M, int twoJ, int S);

/* Two-mode binomial code on the (n1, n2) occupation grid (flattened
 * n1*(T+1)+n2 with T = (S+1)(N+1)): coefficients of make_binomial placed at
 * |(S+1)(N+1-m), (S+1)m>. */
CodePair make_two_mode_binomial(int N, int S);

/* d logical kets sum_m e^{i 2 pi mu m / d} sqrt(C_d(N+1,m)/d^{N+1}) |(S+1)m>. */
struct QuditCode {
  std::vector<Vec> kets;
  int d = 2;
  int N = 0, S = 0;
  double nbar = 0.0;
};
QuditCode make_qudit_binomial(int d, int N, int S);

/* Extended binomial coefficient: coefficient of x^m in (1+x+...+x^{d-1})^{N+1},
 * exact integer convolution; 0 outside 0 <= m <= (d-1)(N+1). */
long long extended_binomial(int N_plus_1, int m, int d);

/* Uniform superposition |E_m> of all d-ary product states of N_plus_1 qudits
 * with digit sum m, as a d^{N_plus_1}-dimensional vector. */
Vec extended_binomial_state(int d, int N_plus_1, int m);

/* Spin frames: a carrier index m = 0..2J injected into a host basis. */
struct SpinFrame {
  enum class Map { spin, fock_spaced, dicke, two_mode };
  Map map = Map::spin;
  int twoJ = 0;
  int d = 2;  // qudit dimension, 2 for ordinary spin
  int S = 0;  // spacing for fock_spaced / two_mode
  int M = 0;  // qubit count for dicke
};

/* Row indices of the injection and the host dimension. */
std::vector<int> frame_rows(const SpinFrame& f);
int frame_host_dim(const SpinFrame& f);

/* Spin-coherent state (d = 2) or its extended-binomial generalization
 * (d > 2), mapped through the frame's injection and normalized. */
FockVector spin_coherent(double theta, double phi, const SpinFrame& f);

/* Spin matrices in the |J, m-J> basis, m = 0..2J ascending. */
Mat spin_jx(int twoJ);
Mat spin_jz(int twoJ);

/* Check operators for cat/bin/perm/bin2 codes: the mod-(S+1) phase operator
 * C, and for spin-framed families the embedded J_x/J (logical Z, eigenvalues
 * (-1)^mu on the code kets) and its square. */
struct CheckOperators {
  Mat C;
  Mat logical_z;     // empty for cat
  Mat logical_z_sq;  // empty for cat
};
CheckOperators check_operators(const CodePair& pair);

/* Qudit check operator: the symmetrized single-qudit shift averaged over
 * sites and projected onto the extended-binomial subspace; code kets are
 * eigenvectors with eigenvalues e^{i 2 pi mu / d}. */
Mat qudit_check_operator(int d, int N);

}  // namespace bosonic
