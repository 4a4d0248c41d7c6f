#include "bosonic/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bosonic {
namespace {

Mat padded_isometry(const CodePair& pair, int carrier) {
  const Mat V = pair.isometry();
  if (carrier < pair.dim())
    throw std::invalid_argument("carrier smaller than the code support");
  Mat Vp = Mat::Zero(carrier, 2);
  Vp.topRows(pair.dim()) = V;
  return Vp;
}

/* Kraus operators of noise o encode, each dim_out x 2. */
std::vector<Mat> effective_ops(const KrausChannel& noise, const Mat& V) {
  std::vector<Mat> M;
  M.reserve(noise.ops.size());
  for (const Mat& K : noise.ops) {
    Mat KV = K * V;
    if (KV.squaredNorm() > 1e-18) M.push_back(std::move(KV));
  }
  return M;
}

double fidelity_of(const std::vector<Mat>& recovery, const std::vector<Mat>& M) {
  double f = 0.0;
  for (const Mat& R : recovery)
    for (const Mat& Mk : M) f += 0.25 * std::norm((R * Mk).trace());
  return f;
}

/* Right-multiply by the pseudo-inverse root of sum R^dag R and dump the
 * remaining null directions onto the first logical state, making the set
 * exactly trace preserving. */
void polish_tp(std::vector<Mat>& ops, int dim, double floor) {
  Mat N = Mat::Zero(dim, dim);
  for (const Mat& R : ops) N.noalias() += R.adjoint() * R;
  Eigen::SelfAdjointEigenSolver<Mat> es(N);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  Mat root_inv = Mat::Zero(dim, dim);
  std::vector<int> null_dirs;
  for (int i = 0; i < dim; ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam > floor * std::max(lmax, 1.0)) {
      root_inv.noalias() +=
          (1.0 / std::sqrt(lam)) * es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    } else {
      null_dirs.push_back(i);
    }
  }
  for (Mat& R : ops) R = R * root_inv;
  for (int i : null_dirs) {
    Mat dump = Mat::Zero(2, dim);
    dump.row(0) = es.eigenvectors().col(i).adjoint();
    ops.push_back(std::move(dump));
  }
}

struct AdmmResult {
  Mat Z;  // PSD iterate, composite index carrier*2 + logical
  SolverCertificate cert;
};

/* maximize (1/4) tr{XW} over X >= 0 with tr_out X = I: alternate the
 * closed-form projection onto the trace-preserving affine slice against a PSD
 * eigenvalue clip, over-relaxed, with the penalty rebalanced every 64 sweeps. */
AdmmResult admm_choi(const Mat& W, int carrier, const Mat& X0, const SolverParams& sp) {
  const int n = 2 * carrier;
  const double alpha = 1.6;
  double rho = sp.step_size;

  const Mat I_c = Mat::Identity(carrier, carrier);
  auto project_tp = [&](const Mat& X) {
    Mat H = 0.5 * (X + X.adjoint());
    const Mat excess = 0.5 * (partial_trace_out(H, carrier, 2) - I_c);
    for (int i = 0; i < carrier; ++i)
      for (int j = 0; j < carrier; ++j) {
        H(2 * i, 2 * j) -= excess(i, j);
        H(2 * i + 1, 2 * j + 1) -= excess(i, j);
      }
    return H;
  };
  auto objective = [&](const Mat& A) {
    return 0.25 * W.transpose().cwiseProduct(A).sum().real();
  };

  Mat Z = X0, U = Mat::Zero(n, n);
  AdmmResult out;
  double obj_x = 0.0;
  for (int it = 1; it <= sp.max_iters; ++it) {
    const Mat X = project_tp(Z - U + W / (4.0 * rho));
    const Mat B = alpha * X + (1.0 - alpha) * Z + U;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (B + B.adjoint()));
    int first_pos = 0;  // ascending eigenvalues: positive part is the tail block
    while (first_pos < n && es.eigenvalues()(first_pos) <= 0.0) ++first_pos;
    const int npos = n - first_pos;
    Mat Znew = Mat::Zero(n, n);
    if (npos > 0) {
      const Mat cols = es.eigenvectors().rightCols(npos);
      Znew.noalias() =
          cols * es.eigenvalues().tail(npos).asDiagonal() * cols.adjoint();
    }
    const double primal = (X - Znew).norm();
    const double dual = rho * (Znew - Z).norm();
    U += alpha * X + (1.0 - alpha) * Z - Znew;
    Z = std::move(Znew);

    out.cert.iterations = it;
    out.cert.primal_residual = primal;
    out.cert.dual_residual = dual;
    if (primal <= sp.primal_tol && dual <= sp.dual_tol) {
      out.cert.certified = true;
      obj_x = objective(X);
      break;
    }
    if (it % 64 == 0) {
      if (primal > 10.0 * dual && rho < 1e4) {
        rho *= 2.0;
        U *= 0.5;
      } else if (dual > 10.0 * primal && rho > 1e-4) {
        rho *= 0.5;
        U *= 2.0;
      }
    }
    obj_x = objective(X);
  }
  out.cert.objective = objective(Z);
  out.cert.objective_gap_estimate = std::abs(obj_x - out.cert.objective);
  out.Z = std::move(Z);
  return out;
}

std::vector<Mat> quadratic_ops(const Mat& V, const KrausChannel& noise) {
  const int dout = noise.dim_out();
  const Mat P = V * V.adjoint();
  Mat N = Mat::Zero(dout, dout);
  for (const Mat& K : noise.ops) N.noalias() += K * P * K.adjoint();
  Eigen::SelfAdjointEigenSolver<Mat> es(N);
  const double lmax = std::max(es.eigenvalues().maxCoeff(), 0.0);
  Mat root_inv = Mat::Zero(dout, dout);
  for (int i = 0; i < dout; ++i)
    if (es.eigenvalues()(i) > 1e-12 * std::max(lmax, 1e-300))
      root_inv.noalias() += (1.0 / std::sqrt(es.eigenvalues()(i))) *
                            es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  std::vector<Mat> ops;
  ops.reserve(noise.ops.size());
  for (const Mat& K : noise.ops) {
    Mat R = V.adjoint() * K.adjoint() * root_inv;
    if (R.squaredNorm() > 1e-24) ops.push_back(std::move(R));
  }
  if (ops.empty()) ops.push_back(Mat::Zero(2, dout));
  polish_tp(ops, dout, 1e-12);
  return ops;
}

RecoverySolution solve_one(const std::vector<Mat>& M, const std::vector<Mat>& warm,
                           int dout, const SolverParams& sp) {
  const int n = 2 * dout;
  Mat W = Mat::Zero(n, n);
  for (const Mat& Mk : M) {
    const Vec w = vec(Mat(Mk.adjoint()));
    W.noalias() += w * w.adjoint();
  }
  Mat X0 = Mat::Zero(n, n);
  for (const Mat& R : warm) {
    const Vec v = vec(R);
    X0.noalias() += v * v.adjoint();
  }
  AdmmResult res = admm_choi(W, dout, X0, sp);

  RecoverySolution sol;
  sol.certificate = res.cert;
  ChoiState choi{res.Z / double(dout), dout, 2};
  sol.recovery = kraus_of(choi, 1e-10);
  polish_tp(sol.recovery.ops, dout, 1e-8);
  sol.fidelity = fidelity_of(sol.recovery.ops, M);
  return sol;
}

/* Spin-x operator over the given Fock components, ordered by increasing
 * magnetic number, embedded in a dim x dim matrix. */
Mat embedded_jx(const std::vector<int>& fock, int dim) {
  const int levels = static_cast<int>(fock.size());
  const double j = 0.5 * (levels - 1);
  Mat J = Mat::Zero(dim, dim);
  for (int k = 0; k + 1 < levels; ++k) {
    const double m = k - j;
    const double amp = 0.5 * std::sqrt(j * (j + 1) - m * (m + 1));
    J(fock[k + 1], fock[k]) += amp;
    J(fock[k], fock[k + 1]) += amp;
  }
  return J;
}

/* Unitary on C^dim agreeing with range * domain^dag on span(domain columns),
 * completed deterministically on the complement. */
Mat unitary_extension(const Mat& range, const Mat& domain, int dim) {
  auto complete = [&](const Mat& cols) {
    Mat full = Mat::Zero(dim, dim);
    int have = static_cast<int>(cols.cols());
    full.leftCols(have) = cols;
    for (int i = 0; i < dim && have < dim; ++i) {
      Vec cand = Vec::Zero(dim);
      cand(i) = 1.0;
      for (int c = 0; c < have; ++c) cand -= full.col(c).dot(cand) * full.col(c);
      const double nrm = cand.norm();
      if (nrm > 1e-8) full.col(have++) = cand / nrm;
    }
    return full;
  };
  return complete(range) * complete(domain).adjoint();
}

}  // namespace

RecoverySolution quadratic_recovery(const CodePair& pair, const KrausChannel& noise) {
  if (noise.dim_in() < pair.dim())
    throw std::invalid_argument("noise input smaller than the code support");
  const Mat V = padded_isometry(pair, noise.dim_in());
  RecoverySolution sol;
  sol.recovery.ops = quadratic_ops(V, noise);
  sol.fidelity = fidelity_of(sol.recovery.ops, effective_ops(noise, V));
  sol.certificate.objective = sol.fidelity;
  sol.certificate.certified = true;  // closed form, nothing iterative
  return sol;
}

RecoverySolution optimal_recovery(const RecoveryProblem& problem) {
  const int carrier = problem.carrier_dim > 0 ? problem.carrier_dim : problem.noise.dim_in();
  if (carrier < 2) throw std::invalid_argument("carrier must hold a qubit");
  if (problem.noise.dim_in() != carrier)
    throw std::invalid_argument("noise input does not match the carrier");
  const Mat V = padded_isometry(problem.pair, carrier);
  const std::vector<Mat> M = effective_ops(problem.noise, V);
  return solve_one(M, quadratic_ops(V, problem.noise), problem.noise.dim_out(),
                   problem.solver_params);
}

TrackedRecovery tracked_optimal_recovery(const CodePair& pair,
                                         const QuantumInstrument& noise,
                                         SolverParams params) {
  TrackedRecovery tracked;
  for (const KrausChannel& branch : noise.outcomes) {
    if (branch.ops.empty()) continue;
    const Mat V = padded_isometry(pair, branch.dim_in());
    RecoverySolution sol =
        solve_one(effective_ops(branch, V), quadratic_ops(V, branch),
                  branch.dim_out(), params);
    tracked.fidelity += sol.fidelity;
    tracked.per_outcome.push_back(std::move(sol));
  }
  return tracked;
}

RecoverySolution multilevel_binomial_recovery(const CodePair& pair, double gamma,
                                              int levels, std::vector<int>* skipped) {
  if (pair.family != "bin")
    throw std::invalid_argument("structured recovery is defined for binomial pairs");
  if (levels < 1 || levels > 2) throw std::invalid_argument("levels must be 1 or 2");
  const int S = pair.params.S;
  const int dim = pair.dim();
  const KrausChannel noise = pure_loss(gamma, dim);
  auto loss_op = [&](int l) {
    return l < static_cast<int>(noise.ops.size()) ? noise.ops[l] : Mat(Mat::Zero(dim, dim));
  };

  /* The construction wants the kets supported on every other multiple of
   * S + 1, so each loss word stays inside one Fock class.  A pair given in
   * the conjugate basis (both kets spread over all multiples) is rotated
   * here; T records the logical coordinates of the rotated kets. */
  auto class_mixed = [&](const Vec& v) {
    bool even = false, odd = false;
    for (int n = 0; n < v.size(); ++n)
      if (std::norm(v(n)) > 1e-20) ((n / (S + 1)) % 2 ? odd : even) = true;
    return even && odd;
  };
  Eigen::Matrix2cd T = Eigen::Matrix2cd::Identity();
  if (class_mixed(pair.zero)) {
    T << 1, 1, 1, -1;
    T /= std::sqrt(2.0);
  }

  /* Orthonormalize the kept columns symmetrically so neither logical label is
   * favored; near-parallel pairs fall back to dropping the shorter vector. */
  auto level_frame = [&](std::vector<Vec> cols, std::vector<int> labels) {
    std::vector<std::pair<int, Vec>> kept;
    for (size_t i = 0; i < cols.size(); ++i)
      if (cols[i].squaredNorm() >= 1e-10) kept.emplace_back(labels[i], cols[i].normalized());
    if (kept.size() == 2) {
      const cxd g = kept[0].second.dot(kept[1].second);
      if (std::abs(g) > 1.0 - 1e-12) {
        kept.pop_back();
      } else {
        Eigen::Matrix2cd gram;
        gram << 1.0, g, std::conj(g), 1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(gram);
        Eigen::Matrix2cd root_inv = Eigen::Matrix2cd::Zero();
        for (int i = 0; i < 2; ++i)
          root_inv += (1.0 / std::sqrt(es.eigenvalues()(i))) * es.eigenvectors().col(i) *
                      es.eigenvectors().col(i).adjoint();
        Mat pairmat(dim, 2);
        pairmat.col(0) = kept[0].second;
        pairmat.col(1) = kept[1].second;
        pairmat = pairmat * root_inv;
        kept[0].second = pairmat.col(0);
        kept[1].second = pairmat.col(1);
      }
    }
    return kept;
  };

  std::vector<Mat> ops;
  std::vector<Vec> used;  // every frame vector, for the final TP completion
  std::vector<std::vector<Vec>> first_frames(S + 1);
  const Vec codewords[2] = {T(0, 0) * pair.zero + T(1, 0) * pair.one,
                            T(0, 1) * pair.zero + T(1, 1) * pair.one};

  for (int l = 0; l <= S; ++l) {
    const Mat E = loss_op(l);
    auto frame = level_frame({Vec(E * codewords[0]), Vec(E * codewords[1])}, {0, 1});
    if (frame.empty()) continue;
    Mat R = Mat::Zero(2, dim);
    for (auto& [label, w] : frame) {
      R.noalias() += T.col(label) * w.adjoint();
      first_frames[l].push_back(w);
      used.push_back(w);
    }
    ops.push_back(std::move(R));
  }

  if (levels >= 2) {
    for (int l = 0; l <= S; ++l) {
      /* Q_l removes all overlap with the first-level subspace of this Fock
       * class (and the code space when l = 0): an orthogonal projector onto
       * the complement of their joint span. */
      Mat span_cols(dim, static_cast<int>(first_frames[l].size()) + (l == 0 ? 2 : 0));
      int nc = 0;
      for (const Vec& w : first_frames[l]) span_cols.col(nc++) = w;
      if (l == 0) {
        span_cols.col(nc++) = codewords[0];
        span_cols.col(nc++) = codewords[1];
      }
      Mat Q = Mat::Identity(dim, dim);
      if (nc > 0) {
        Eigen::JacobiSVD<Mat> span_svd(span_cols, Eigen::ComputeThinU);
        for (int i = 0; i < span_svd.singularValues().size(); ++i)
          if (span_svd.singularValues()(i) > 1e-10)
            Q.noalias() -=
                span_svd.matrixU().col(i) * span_svd.matrixU().col(i).adjoint();
      }
      const Mat E = loss_op(l + S + 1);
      auto frame = level_frame({Vec(Q * (E * codewords[0])), Vec(Q * (E * codewords[1]))},
                               {0, 1});
      if (frame.empty()) {
        if (skipped) skipped->push_back(l);
        continue;
      }
      Mat R = Mat::Zero(2, dim);
      for (auto& [label, w] : frame) {
        R.noalias() += T.col(label) * w.adjoint();
        used.push_back(w);
      }
      ops.push_back(std::move(R));
    }
  }

  /* Dump the unused remainder onto the first class-pure ket to complete TP. */
  Mat frame_mat = Mat::Zero(dim, std::max<int>(static_cast<int>(used.size()), 1));
  for (size_t i = 0; i < used.size(); ++i) frame_mat.col(i) = used[i];
  Eigen::JacobiSVD<Mat> svd(frame_mat, Eigen::ComputeFullU);
  for (int i = static_cast<int>(used.size()); i < dim; ++i) {
    Mat dump = T.col(0) * svd.matrixU().col(i).adjoint();
    ops.push_back(std::move(dump));
  }

  RecoverySolution sol;
  sol.recovery.ops = std::move(ops);
  polish_tp(sol.recovery.ops, dim, 1e-12);
  sol.fidelity = fidelity_of(sol.recovery.ops, effective_ops(noise, pair.isometry()));
  sol.certificate.objective = sol.fidelity;
  sol.certificate.certified = true;
  return sol;
}

Mat binomial_check_unitary(int N, int S) {
  if (N != 2 || S != 1)
    throw std::invalid_argument("the measured unitary is built for the (2, 1) code");
  const int dim = 7;
  const Mat A =
      8.0 * embedded_jx({0, 2, 4, 6}, dim) * embedded_jx({0, 2, 4, 6}, dim) +
      embedded_jx({1, 3, 5}, dim) * embedded_jx({1, 3, 5}, dim);
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  Mat U = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i)
    U.noalias() += std::exp(cxd(0.0, 2.0 * M_PI / 5.0) * es.eigenvalues()(i)) *
                   es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
  return U;
}

CheckRecoveryResult binomial_check_recovery(const Mat& error,
                                            const Eigen::Vector2cd& logical,
                                            int N, int S) {
  if (N != 2 || S != 1)
    throw std::invalid_argument("the measurement cascade is built for the (2, 1) code");
  const CodePair pair = binomial_pm_pair(2, 1);  // Fock-spaced kets, the Jx frame
  const int dim = pair.dim();
  if (error.rows() != dim || error.cols() != dim)
    throw std::invalid_argument("error operator must act on Fock 0..6");

  const Vec zero = pair.zero, one = pair.one;
  const Ladder lad = build_ladder(dim - 1);

  /* Syndrome projectors, grouped by the measured eigenvalue: the generator
   * 8 Jx(3/2)^2 (+) Jx(1)^2 takes values {18, 2, 1, 0}, distinct mod 5. */
  const Mat A =
      8.0 * embedded_jx({0, 2, 4, 6}, dim) * embedded_jx({0, 2, 4, 6}, dim) +
      embedded_jx({1, 3, 5}, dim) * embedded_jx({1, 3, 5}, dim);
  Eigen::SelfAdjointEigenSolver<Mat> es(A);
  struct BranchDef {
    int residue;
    const char* decoded;
  };
  const BranchDef defs[4] = {
      {3, "no error"}, {2, "dephasing"}, {1, "photon loss"}, {0, "failure"}};

  /* Branch corrections: identity, the Jx-frame swap returning |n+->, and the
   * photon-gain rotation returning the loss images. */
  Mat domain_n(dim, 2), domain_a(dim, 2), range(dim, 2);
  domain_n.col(0) = ((lad.n - 3.0 * Mat::Identity(dim, dim)) * zero).normalized();
  domain_n.col(1) = ((lad.n - 3.0 * Mat::Identity(dim, dim)) * one).normalized();
  domain_a.col(0) = (lad.a * zero).normalized();
  domain_a.col(1) = (lad.a * one).normalized();
  range.col(0) = zero;
  range.col(1) = one;
  const Mat fix[4] = {Mat::Identity(dim, dim), unitary_extension(range, domain_n, dim),
                      unitary_extension(range, domain_a, dim), Mat::Identity(dim, dim)};

  if (logical.norm() < 1e-12)
    throw std::invalid_argument("logical input must be a nonzero amplitude pair");
  const Vec encoded = (logical(0) * zero + logical(1) * one).normalized();
  Vec corrupted = error * encoded;
  const double total = corrupted.squaredNorm();
  if (total < 1e-24) throw std::invalid_argument("error annihilates the input state");
  corrupted /= std::sqrt(total);

  CheckRecoveryResult result;
  for (int b = 0; b < 4; ++b) {
    SyndromeBranch branch;
    branch.decoded = defs[b].decoded;
    branch.eigenvalue = std::exp(cxd(0.0, 2.0 * M_PI * defs[b].residue / 5.0));
    Vec proj = Vec::Zero(dim);
    for (int i = 0; i < dim; ++i)
      if ((std::lround(es.eigenvalues()(i)) % 5 + 5) % 5 == defs[b].residue)
        proj += es.eigenvectors().col(i).dot(corrupted) * es.eigenvectors().col(i);
    branch.probability = proj.squaredNorm();
    if (branch.probability > 1e-14) {
      branch.state = (fix[b] * proj).normalized();
      branch.fidelity = std::norm(encoded.dot(branch.state));
    } else {
      branch.probability = 0.0;
      branch.state = Vec::Zero(dim);
    }
    result.fidelity += branch.probability * branch.fidelity;
    if (b == 3 && branch.probability > 1e-12) result.failure_possible = true;
    result.branches.push_back(std::move(branch));
  }
  return result;
}

AmplificationBound gkp_amplification_bound(double gamma, GkpLattice lattice) {
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("loss rate must lie strictly between 0 and 1");
  const double u = (1.0 - gamma) / gamma;
  AmplificationBound b;
  const double rate = lattice == GkpLattice::square ? M_PI / 8.0 : M_PI / (4.0 * std::sqrt(3.0));
  b.p_fail_bound = std::exp(-rate * u);
  const double e = std::erf(std::sqrt(u * M_PI / 8.0));
  b.p_succ_square = e * e;
  return b;
}

}  // namespace bosonic
