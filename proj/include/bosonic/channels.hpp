#pragma once

#include "bosonic/fock.hpp"

#include <vector>

namespace bosonic {

/* CPTP map between truncated Fock spaces; every op is dim_out x dim_in.
 * Truncation can make the map slightly trace-decreasing, which
 * completeness_deficit() quantifies. */
struct KrausChannel {
  std::vector<Mat> ops;

  int dim_in() const { return ops.empty() ? 0 : static_cast<int>(ops[0].cols()); }
  int dim_out() const { return ops.empty() ? 0 : static_cast<int>(ops[0].rows()); }
  Mat apply(const Mat& rho) const;
  double completeness_deficit() const;  // || sum K^dag K - I ||_max
};

/* Channel whose Kraus branches are tagged by a classical measurement record:
 * outcome r occurs with probability tr sum_{K in branch r} K rho K^dag. */
struct QuantumInstrument {
  std::vector<KrausChannel> outcomes;
};

/* Normalized Choi state: rho = (1/dim_in) sum_k vec(K_k) vec(K_k)^dag with
 * column-major vec, so the composite index is in*dim_out + out (input slow). */
struct ChoiState {
  Mat rho;
  int dim_in = 0;
  int dim_out = 0;
};

/* Photon loss with transmissivity 1-gamma: E_l = (gamma/(1-gamma))^{l/2}
 * a^l/sqrt(l!) (1-gamma)^{n/2}.  lmax < 0 keeps every order that acts
 * nontrivially on the input space (the channel is then exactly TP). */
KrausChannel pure_loss(double gamma, int dim_in, int lmax = -1, int dim_out = -1);

/* Quantum-limited amplifier of gain G >= 1; Kraus are scaled adjoints of the
 * loss family at gamma = 1 - 1/G.  dim_out < 0 picks enough headroom for the
 * amplified support of the input space; lmax < 0 keeps orders until the
 * completeness deficit on the input space drops below 1e-12. */
KrausChannel amplification(double gain, int dim_in, int lmax = -1, int dim_out = -1);

/* Isotropic Gaussian displacement noise of variance sigma2 per complex
 * coordinate: rho -> (1/(pi sigma2)) int d^2b exp(-|b|^2/sigma2) D(b) rho D(b)^dag,
 * discretized with a tensor Gauss-Hermite rule (`nodes` per quadrature,
 * < 0 for an automatic choice). */
KrausChannel gaussian_noise(double sigma2, int dim_in, int nodes = -1, int dim_out = -1);

/* Simultaneous photon loss and Kerr evolution: the exponential of
 * -i Kt [n(n-1)/2, .] + chi (a . a^dag - {n, .}/2), converted to Kraus form
 * through the Choi eigendecomposition (eigenvalues above 1e-10 kept).
 * Dimension is capped at 61 (cutoff 60) by the dense Liouvillian. */
KrausChannel loss_kerr(double chi, double Kt, int dim);

/* Photon loss with the loss count l retained as a classical record. */
QuantumInstrument parity_tracked_loss(double gamma, int dim_in, int lmax = -1);

/* second after first; Kraus products with Frobenius-norm^2 below prune_tol
 * are dropped (0 keeps everything). */
KrausChannel compose(const KrausChannel& second, const KrausChannel& first,
                     double prune_tol = 0.0);

/* Encoding isometry (columns = codewords) viewed as a channel. */
KrausChannel encode_channel(const Mat& isometry);

ChoiState choi_of(const KrausChannel& ch);
KrausChannel kraus_of(const ChoiState& choi, double eig_tol = 1e-10);

/* Liouville (natural) representation acting on column-major vec:
 * L = sum_k conj(K_k) (x) K_k, shape dim_out^2 x dim_in^2; composition of
 * channels is the matrix product of their Liouville forms. */
Mat liouville(const KrausChannel& ch);

/* Kronecker product with the composite index i_slow * dim(B) + i_fast,
 * slow factor A. */
Mat kron(const Mat& A, const Mat& B);

Vec vec(const Mat& m);
Mat unvec(const Vec& v, int rows, int cols);

/* Partial traces over the composite index in*dim_out + out. */
Mat partial_trace_out(const Mat& J, int dim_in, int dim_out);
Mat partial_trace_in(const Mat& J, int dim_in, int dim_out);

/* Pauli basis {I, X, Y, Z}. */
const Mat& pauli(int k);

/* Pauli transfer matrix m(k,l) = tr(sigma_k E(sigma_l))/2 of a qubit channel;
 * composition of channels multiplies these. */
Eigen::Matrix4d pauli_transfer(const KrausChannel& qubit_channel);

/* recovery ∘ noise ∘ encode as a qubit channel; `recovery` must map the
 * noise output space down to dimension 2. */
KrausChannel logical_channel(const KrausChannel& noise, const Mat& isometry,
                             const KrausChannel& recovery);

}  // namespace bosonic
