#include "bosonic/channels.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace bosonic {

Mat KrausChannel::apply(const Mat& rho) const {
  Mat out = Mat::Zero(dim_out(), dim_out());
  for (const Mat& k : ops) out += k * rho * k.adjoint();
  return out;
}

double KrausChannel::completeness_deficit() const {
  Mat acc = Mat::Zero(dim_in(), dim_in());
  for (const Mat& k : ops) acc += k.adjoint() * k;
  return (acc - Mat::Identity(dim_in(), dim_in())).cwiseAbs().maxCoeff();
}

namespace {

double log_binomial(int n, int k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

/* sqrt(C(n,l) gamma^l (1-gamma)^(n-l)) in log space, with the gamma -> 0/1
 * limits taken exactly. */
double loss_amplitude(int n, int l, double gamma) {
  if (gamma == 0.0) return l == 0 ? 1.0 : 0.0;
  if (gamma == 1.0) return l == n ? 1.0 : 0.0;
  return std::exp(0.5 * (log_binomial(n, l) + l * std::log(gamma) +
                         (n - l) * std::log1p(-gamma)));
}

}  // namespace

KrausChannel pure_loss(double gamma, int dim_in, int lmax, int dim_out) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("pure_loss: gamma outside [0,1]");
  if (dim_out < 0) dim_out = dim_in;
  if (lmax < 0) lmax = dim_in - 1;
  KrausChannel ch;
  for (int l = 0; l <= lmax; ++l) {
    Mat E = Mat::Zero(dim_out, dim_in);
    for (int n = l; n < dim_in; ++n)
      if (n - l < dim_out) E(n - l, n) = loss_amplitude(n, l, gamma);
    if (l == 0 || E.norm() > 0.0) ch.ops.push_back(std::move(E));
  }
  return ch;
}

KrausChannel amplification(double gain, int dim_in, int lmax, int dim_out) {
  if (gain < 1.0) throw std::invalid_argument("amplification: gain below 1");
  const double g = 1.0 - 1.0 / gain;  // loss parameter of the adjoint family
  if (dim_out < 0)
    dim_out = static_cast<int>(std::ceil(gain * dim_in + 8.0 * std::sqrt(gain * (gain - 1.0) * dim_in))) + 10;
  if (lmax < 0) {
    // grow until the worst input column keeps all but 1e-12 of its weight
    const int m = dim_in - 1;
    double sum = 0.0;
    int l = 0;
    for (; l + m < dim_out && l < 4000; ++l) {
      const double amp = loss_amplitude(m + l, l, g) / std::sqrt(gain);
      sum += amp * amp;
      if (1.0 - sum < 1e-12) break;
    }
    lmax = l;
  }
  KrausChannel ch;
  for (int l = 0; l <= lmax; ++l) {
    Mat A = Mat::Zero(dim_out, dim_in);
    for (int m = 0; m < dim_in; ++m)
      if (m + l < dim_out) A(m + l, m) = loss_amplitude(m + l, l, g) / std::sqrt(gain);
    if (l == 0 || A.norm() > 0.0) ch.ops.push_back(std::move(A));
  }
  return ch;
}

KrausChannel gaussian_noise(double sigma2, int dim_in, int nodes, int dim_out) {
  if (sigma2 < 0.0) throw std::invalid_argument("gaussian_noise: negative variance");
  if (dim_out < 0) dim_out = dim_in;
  const int dmax = std::max(dim_in, dim_out);
  KrausChannel ch;
  if (sigma2 == 0.0) {
    ch.ops.push_back(Mat::Identity(dim_out, dim_in));
    return ch;
  }
  if (nodes < 0) nodes = std::min(100, std::max(24, int(2.0 * sigma2 * dim_in) + 32));
  Eigen::VectorXd s, w;
  gauss_hermite(nodes, s, w);
  const double sigma = std::sqrt(sigma2);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      const double weight = w(i) * w(j) / M_PI;
      if (weight < 1e-14) continue;
      const cxd beta = sigma * cxd(s(i), s(j));
      Mat D = displacement_operator(beta, dmax - 1);
      ch.ops.push_back(std::sqrt(weight) * D.topLeftCorner(dim_out, dim_in));
    }
  }
  return ch;
}

KrausChannel loss_kerr(double chi, double Kt, int dim) {
  if (dim > 61) throw std::invalid_argument("loss_kerr: dimension capped at 61");
  Ladder l = build_ladder(dim - 1);
  Mat H = Mat::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) H(n, n) = 0.5 * n * (n - 1.0);
  Mat id = Mat::Identity(dim, dim);
  Mat num = l.adag * l.a;
  // column-major vec: vec(A rho B) = (B^T (x) A) vec(rho)
  Mat L = cxd(0, -Kt) * (kron(id, H) - kron(H.transpose(), id)) +
          chi * (kron(l.a, l.a) - 0.5 * (kron(id, num) + kron(num.transpose(), id)));
  Mat M = L.exp();
  // reshuffle the propagator into the (normalized) Choi state
  ChoiState choi;
  choi.dim_in = choi.dim_out = dim;
  choi.rho.resize(dim * dim, dim * dim);
  for (int o = 0; o < dim; ++o)
    for (int i = 0; i < dim; ++i)
      for (int op = 0; op < dim; ++op)
        for (int ip = 0; ip < dim; ++ip)
          choi.rho(o + dim * i, op + dim * ip) = M(o + dim * op, i + dim * ip);
  choi.rho /= double(dim);
  return kraus_of(choi, 1e-10);
}

QuantumInstrument parity_tracked_loss(double gamma, int dim_in, int lmax) {
  KrausChannel full = pure_loss(gamma, dim_in, lmax);
  QuantumInstrument inst;
  for (Mat& e : full.ops) {
    KrausChannel branch;
    branch.ops.push_back(std::move(e));
    inst.outcomes.push_back(std::move(branch));
  }
  return inst;
}

KrausChannel compose(const KrausChannel& second, const KrausChannel& first, double prune_tol) {
  if (second.dim_in() != first.dim_out())
    throw std::invalid_argument("compose: inner dimensions disagree");
  KrausChannel ch;
  for (const Mat& b : second.ops)
    for (const Mat& a : first.ops) {
      Mat prod = b * a;
      if (prune_tol > 0.0 && prod.squaredNorm() < prune_tol) continue;
      ch.ops.push_back(std::move(prod));
    }
  return ch;
}

KrausChannel encode_channel(const Mat& isometry) {
  KrausChannel ch;
  ch.ops.push_back(isometry);
  return ch;
}

ChoiState choi_of(const KrausChannel& ch) {
  ChoiState c;
  c.dim_in = ch.dim_in();
  c.dim_out = ch.dim_out();
  const int n = c.dim_in * c.dim_out;
  c.rho = Mat::Zero(n, n);
  for (const Mat& k : ch.ops) {
    Vec v = vec(k);
    c.rho.noalias() += v * v.adjoint();
  }
  c.rho /= double(c.dim_in);
  return c;
}

KrausChannel kraus_of(const ChoiState& choi, double eig_tol) {
  Mat herm = 0.5 * (choi.rho + choi.rho.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(herm);
  KrausChannel ch;
  for (int i = static_cast<int>(es.eigenvalues().size()) - 1; i >= 0; --i) {
    const double lam = es.eigenvalues()(i);
    if (lam <= eig_tol) break;  // ascending order: everything below is smaller
    Vec col = std::sqrt(lam * choi.dim_in) * es.eigenvectors().col(i);
    ch.ops.push_back(unvec(col, choi.dim_out, choi.dim_in));
  }
  if (ch.ops.empty()) ch.ops.push_back(Mat::Zero(choi.dim_out, choi.dim_in));
  return ch;
}

Mat liouville(const KrausChannel& ch) {
  const int n_out = ch.dim_out() * ch.dim_out();
  const int n_in = ch.dim_in() * ch.dim_in();
  Mat L = Mat::Zero(n_out, n_in);
  for (const Mat& k : ch.ops) L.noalias() += kron(k.conjugate(), k);
  return L;
}

Mat kron(const Mat& A, const Mat& B) {
  Mat out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, int rows, int cols) {
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat partial_trace_out(const Mat& J, int dim_in, int dim_out) {
  Mat r = Mat::Zero(dim_in, dim_in);
  for (int i = 0; i < dim_in; ++i)
    for (int j = 0; j < dim_in; ++j)
      for (int o = 0; o < dim_out; ++o) r(i, j) += J(i * dim_out + o, j * dim_out + o);
  return r;
}

Mat partial_trace_in(const Mat& J, int dim_in, int dim_out) {
  Mat r = Mat::Zero(dim_out, dim_out);
  for (int o = 0; o < dim_out; ++o)
    for (int op = 0; op < dim_out; ++op)
      for (int i = 0; i < dim_in; ++i) r(o, op) += J(i * dim_out + o, i * dim_out + op);
  return r;
}

const Mat& pauli(int k) {
  static const Mat sig[4] = {
      (Mat(2, 2) << 1, 0, 0, 1).finished(),
      (Mat(2, 2) << 0, 1, 1, 0).finished(),
      (Mat(2, 2) << 0, cxd(0, -1), cxd(0, 1), 0).finished(),
      (Mat(2, 2) << 1, 0, 0, -1).finished(),
  };
  return sig[k];
}

Eigen::Matrix4d pauli_transfer(const KrausChannel& qubit_channel) {
  if (qubit_channel.dim_in() != 2 || qubit_channel.dim_out() != 2)
    throw std::invalid_argument("pauli_transfer: channel is not qubit-to-qubit");
  Eigen::Matrix4d m;
  for (int l = 0; l < 4; ++l) {
    Mat mapped = qubit_channel.apply(pauli(l));
    for (int k = 0; k < 4; ++k) m(k, l) = 0.5 * (pauli(k) * mapped).trace().real();
  }
  return m;
}

KrausChannel logical_channel(const KrausChannel& noise, const Mat& isometry,
                             const KrausChannel& recovery) {
  if (recovery.dim_out() != 2)
    throw std::invalid_argument("logical_channel: recovery must end on the qubit space");
  return compose(recovery, compose(noise, encode_channel(isometry)));
}

}  // namespace bosonic
