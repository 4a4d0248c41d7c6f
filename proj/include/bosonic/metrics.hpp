#pragma once

#include "bosonic/channels.hpp"

namespace bosonic {

/* Binary entropy in bits with the 0 log 0 = 0 convention. */
double binary_entropy(double p);

/* Von Neumann entropy in bits of a Hermitian matrix.  Eigenvalues below
 * -neg_tol are rejected (the state is not PSD); small negatives up to that
 * are floored at zero before taking logs. */
double entropy_bits(const Mat& rho, double neg_tol = 1e-8);

/* Choi state of a qubit channel reconstructed from its Pauli transfer
 * matrix, in the same input-slow index convention as choi_of. */
Mat choi_from_ptm(const Eigen::Matrix4d& ptm);

/* Channel (entanglement) fidelity of a qubit channel: the overlap of the
 * Choi state with the maximally entangled state, which is a quarter of the
 * transfer-matrix trace and of sum_k |tr A_k|^2 over any Kraus set. */
double channel_fidelity(const Eigen::Matrix4d& ptm);

/* Mean input-output fidelity over pure states: (2 F_channel + 1) / 3. */
double average_fidelity(double channel_fid);

struct HashingReport {
  double coherent_info = 0.0;        // bits; negative when no rate survives
  double rate = 0.0;                 // max(0, coherent_info)
  double entropy_exchange = 0.0;     // bits, entropy of the Choi state
  double output_entropy = 0.0;       // bits, from the Choi input-trace
  double output_entropy_bloch = 0.0; // bits, from the Bloch vector length
};

/* Random-coding rate of a qubit channel: output entropy minus entropy
 * exchange at maximally mixed input.  The output entropy is computed twice
 * (Choi reduction, and the closed form with eigenvalues (1 +- |v|)/2 where
 * v is the image of I/2 on the Bloch sphere); disagreement beyond 1e-9 or a
 * Choi eigenvalue below -1e-8 throws. */
HashingReport hashing_report(const Eigen::Matrix4d& ptm);

/* Convenience: hashing_report(ptm).rate. */
double hashing_bound(const Eigen::Matrix4d& ptm);

/* One-way quantum capacity of the loss channel with transmissivity 1-gamma
 * at input mean occupation nbar: max{0, g((1-gamma) nbar) - g(gamma nbar)}
 * with g(n) = (n+1) log2(n+1) - n log2 n.  Pass nbar = infinity for the
 * unconstrained limit max{0, log2((1-gamma)/gamma)}. */
double loss_capacity(double gamma, double nbar);

struct InequalityReport {
  double fidelity = 0.0;
  double entropy_exchange = 0.0;  // bits
  double fano_envelope = 0.0;     // H2(F) + (1-F) log2 3, bits
  double fano_slack = 0.0;        // envelope - entropy_exchange
  double anti_fano_floor = 0.0;   // exp(-2 S) with S in nats
  double anti_fano_slack = 0.0;   // fidelity - floor
  double mc_average = 0.0;        // Monte-Carlo mean input-output fidelity
  double mc_stderr = 0.0;
  double haar_average = 0.0;      // (2 F + 1) / 3
  int samples = 0;
  bool fano_ok = false;
  bool anti_fano_ok = false;
  bool haar_ok = false;
  bool all_ok() const { return fano_ok && anti_fano_ok && haar_ok; }
};

/* Theorem checks for a qubit channel: the entropy-exchange envelope
 * S <= H2(F) + (1-F) log2 3, the floor F >= exp(-2 S_nats), and agreement
 * of a Monte-Carlo Haar average of input-output fidelity with (2F+1)/3
 * within three standard errors.  Violations are reported, not thrown; they
 * indicate a convention or numerics bug upstream. */
InequalityReport fidelity_inequality_suite(const Eigen::Matrix4d& ptm,
                                           int samples = 20000,
                                           unsigned seed = 17);

struct RateReport {
  double fidelity = 0.0;
  double hashing_bound = 0.0;          // bits, clamped at zero
  double entropy_exchange = 0.0;       // bits
  double capacity_constrained = 0.0;   // bits, loss channel at nbar
  double capacity_unconstrained = 0.0; // bits, loss channel at nbar -> inf
};

/* Bundle of the rate quantities reported for one logical channel produced
 * at loss gamma by a code of mean occupation nbar. */
RateReport rate_report(const Eigen::Matrix4d& ptm, double gamma, double nbar);

}  // namespace bosonic
