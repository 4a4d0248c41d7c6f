#pragma once

#include "bosonic/channels.hpp"
#include "bosonic/codes.hpp"

#include <string>
#include <vector>

namespace bosonic {

struct SolverParams {
  int max_iters = 50000;
  double primal_tol = 1e-7;  // on ||X - Z||_F
  double dual_tol = 1e-7;    // on rho ||Z - Z_prev||_F
  double step_size = 1.0;    // initial ADMM penalty, adapted by residual balancing
};

struct SolverCertificate {
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective_gap_estimate = 0.0;  // |objective(X) - objective(Z)| at exit
  double objective = 0.0;               // Choi-picture objective at the PSD iterate
  int iterations = 0;
  bool certified = false;  // both residuals met their tolerances
};

/* One recovery optimization instance: find the channel C^carrier -> C^2
 * maximizing the channel fidelity of recovery o noise o encode.  The code
 * kets are zero-padded up to carrier_dim when the carrier is larger;
 * carrier_dim = 0 takes the noise input dimension. */
struct RecoveryProblem {
  CodePair pair;
  KrausChannel noise;
  int carrier_dim = 0;
  SolverParams solver_params;
};

struct RecoverySolution {
  KrausChannel recovery;  // noise output space -> 2, exactly TP after polishing
  double fidelity = 0.0;  // (1/4) sum_jk |tr(R_j K_k V)|^2 of the returned Kraus
  SolverCertificate certificate;
};

/* Best fidelity over all CPTP recoveries, found by splitting the linear
 * Choi-picture objective: alternating closed-form projection onto the
 * trace-preserving affine slice with a PSD eigenvalue clip, over-relaxed and
 * warm-started from the quadratic recovery.  Non-convergence returns the best
 * iterate with certificate.certified = false; mismatched dimensions throw. */
RecoverySolution optimal_recovery(const RecoveryProblem& problem);

/* Closed-form baseline: Kraus P K_k^dag N^{-1/2} with N = sum K_k P K_k^dag
 * (pseudo-inverse root on the support), completed to TP by branches dumping
 * the complement onto one logical state.  Its fidelity lower-bounds the
 * optimum; when noise crushes the support below rank 2 the dump branches are
 * all that remains. */
RecoverySolution quadratic_recovery(const CodePair& pair, const KrausChannel& noise);

/* Optimal recovery when the noise carries a classical record: each outcome
 * branch gets its own independently optimized recovery.  Per-outcome
 * `fidelity` fields hold that branch's (unnormalized) contribution; they sum
 * to the total.  Never below the record-blind optimum. */
struct TrackedRecovery {
  std::vector<RecoverySolution> per_outcome;
  double fidelity = 0.0;
};
TrackedRecovery tracked_optimal_recovery(const CodePair& pair,
                                         const QuantumInstrument& noise,
                                         SolverParams params = {});

/* Structured recovery for binomial pairs under loss gamma.  Level one maps
 * each correctable error subspace span{E_l |0/1>}, l <= S, back to the code;
 * level two maps the extra subspaces span{Q_l E_{l+S+1} |0/1>}, where Q_l
 * projects out the level-one subspace of the same Fock class (and the code
 * space for l = 0).  Vectors of squared norm below 1e-10 are dropped; a class
 * losing both is recorded in *skipped.  The remainder dumps onto one logical
 * state to complete TP. */
RecoverySolution multilevel_binomial_recovery(const CodePair& pair, double gamma,
                                              int levels = 2,
                                              std::vector<int>* skipped = nullptr);

/* Syndrome-measurement error correction on the span of Fock 0..6: measure the
 * eigenvalue of exp{(2 pi i/5)[8 Jx(3/2)^2 (+) Jx(1)^2]} (even photon-number
 * half identified with a spin 3/2, odd half with a spin 1), then undo the
 * indicated error.  Exact for every error in span{I, a, n}; anything else
 * can reach the one-dimensional failure state. */
struct SyndromeBranch {
  std::string decoded;  // "no error" | "dephasing" | "photon loss" | "failure"
  cxd eigenvalue;       // measurement eigenvalue selecting this branch
  double probability = 0.0;
  double fidelity = 0.0;  // overlap with the encoded input after correction
  Vec state;              // corrected carrier state (zero when unreachable)
};
struct CheckRecoveryResult {
  std::vector<SyndromeBranch> branches;  // fixed order: the four rows above
  double fidelity = 0.0;                 // probability-weighted total
  bool failure_possible = false;
};
CheckRecoveryResult binomial_check_recovery(const Mat& error,
                                            const Eigen::Vector2cd& logical,
                                            int N = 2, int S = 1);

/* The measured unitary itself (7 x 7, Fock basis 0..6). */
Mat binomial_check_unitary(int N = 2, int S = 1);

/* Failure-probability bound for the amplify-then-correct recovery of ideal
 * grid codes: exp{-(pi/8)(1-gamma)/gamma} for the square cell, improved to
 * exp{-(pi/(4 sqrt 3))(1-gamma)/gamma} for hexagonal.  p_succ_square is the
 * exact Gaussian mass of the correctable square cell, a product of error
 * functions over |alpha_i| <= sqrt(pi/8). */
enum class GkpLattice { square, hexagonal };
struct AmplificationBound {
  double p_fail_bound = 0.0;
  double p_succ_square = 0.0;
};
AmplificationBound gkp_amplification_bound(double gamma,
                                           GkpLattice lattice = GkpLattice::square);

}  // namespace bosonic
