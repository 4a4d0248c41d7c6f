#include "bosonic/metrics.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace bosonic {

namespace {

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

/* g(n): von Neumann entropy in bits of a thermal state with mean n. */
double thermal_entropy(double n) {
  if (n <= 0.0) return 0.0;
  return (n + 1.0) * std::log2(n + 1.0) - n * std::log2(n);
}

}  // namespace

double binary_entropy(double p) { return -xlog2x(p) - xlog2x(1.0 - p); }

double entropy_bits(const Mat& rho, double neg_tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double lam : es.eigenvalues()) {
    if (lam < -neg_tol)
      throw std::runtime_error("entropy_bits: eigenvalue " + std::to_string(lam) +
                               " below the PSD tolerance");
    s -= xlog2x(lam);
  }
  return s;
}

Mat choi_from_ptm(const Eigen::Matrix4d& ptm) {
  // J = (1/4) sum_k sigma_k^T (x) E(sigma_k), input factor slow
  Mat J = Mat::Zero(4, 4);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      if (ptm(l, k) != 0.0)
        J += (0.25 * ptm(l, k)) * kron(pauli(k).transpose(), pauli(l));
  return J;
}

double channel_fidelity(const Eigen::Matrix4d& ptm) { return 0.25 * ptm.trace(); }

double average_fidelity(double channel_fid) { return (2.0 * channel_fid + 1.0) / 3.0; }

HashingReport hashing_report(const Eigen::Matrix4d& ptm) {
  Mat J = choi_from_ptm(ptm);
  // guard against truncation-induced sub-normalization of logical channels
  const double trj = J.trace().real();
  if (trj <= 0.0) throw std::runtime_error("hashing_report: non-positive Choi trace");
  J /= trj;

  HashingReport r;
  r.entropy_exchange = entropy_bits(J);
  r.output_entropy = entropy_bits(partial_trace_in(J.eval(), 2, 2));

  // image of I/2 has Bloch vector m(1:3, 0)/m(0,0); eigenvalues (1 +- |v|)/2
  const double v = ptm.block<3, 1>(1, 0).norm() / ptm(0, 0);
  r.output_entropy_bloch = binary_entropy(0.5 * (1.0 + v));
  if (std::abs(r.output_entropy - r.output_entropy_bloch) > 1e-9)
    throw std::runtime_error("hashing_report: output-entropy routes disagree");

  r.coherent_info = r.output_entropy - r.entropy_exchange;
  r.rate = std::max(0.0, r.coherent_info);
  return r;
}

double hashing_bound(const Eigen::Matrix4d& ptm) { return hashing_report(ptm).rate; }

double loss_capacity(double gamma, double nbar) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("loss_capacity: gamma outside [0, 1]");
  if (std::isinf(nbar)) {
    if (gamma == 0.0) return std::numeric_limits<double>::infinity();
    return std::max(0.0, std::log2((1.0 - gamma) / gamma));
  }
  return std::max(0.0, thermal_entropy((1.0 - gamma) * nbar) - thermal_entropy(gamma * nbar));
}

InequalityReport fidelity_inequality_suite(const Eigen::Matrix4d& ptm, int samples,
                                           unsigned seed) {
  InequalityReport rep;
  rep.fidelity = channel_fidelity(ptm);
  rep.entropy_exchange = hashing_report(ptm).entropy_exchange;

  rep.fano_envelope = binary_entropy(rep.fidelity) + (1.0 - rep.fidelity) * std::log2(3.0);
  rep.fano_slack = rep.fano_envelope - rep.entropy_exchange;
  rep.fano_ok = rep.fano_slack >= -1e-9;

  rep.anti_fano_floor = std::exp(-2.0 * rep.entropy_exchange * std::log(2.0));
  rep.anti_fano_slack = rep.fidelity - rep.anti_fano_floor;
  rep.anti_fano_ok = rep.anti_fano_slack >= -1e-9;

  // mean input-output fidelity over Haar-random pure qubit states: with
  // Bloch input u, f = (1 + u . (t + R u)) / 2 from the transfer matrix
  const Eigen::Vector3d t = ptm.block<3, 1>(1, 0);
  const Eigen::RowVector3d w = ptm.block<1, 3>(0, 1);  // zero for TP channels
  const Eigen::Matrix3d R = ptm.block<3, 3>(1, 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    Eigen::Vector3d u(gauss(rng), gauss(rng), gauss(rng));
    u.normalize();
    const double f = 0.5 * (ptm(0, 0) + w * u + u.dot(t + R * u));
    const double d = f - mean;
    mean += d / (i + 1);
    m2 += d * (f - mean);
  }
  rep.samples = samples;
  rep.mc_average = mean;
  rep.mc_stderr = samples > 1 ? std::sqrt(m2 / (double(samples) * (samples - 1))) : 0.0;
  rep.haar_average = average_fidelity(rep.fidelity);
  rep.haar_ok = std::abs(rep.mc_average - rep.haar_average) <= 3.0 * rep.mc_stderr + 1e-12;
  return rep;
}

RateReport rate_report(const Eigen::Matrix4d& ptm, double gamma, double nbar) {
  RateReport r;
  HashingReport h = hashing_report(ptm);
  r.fidelity = channel_fidelity(ptm);
  r.hashing_bound = h.rate;
  r.entropy_exchange = h.entropy_exchange;
  r.capacity_constrained = loss_capacity(gamma, nbar);
  r.capacity_unconstrained = loss_capacity(gamma, std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace bosonic
