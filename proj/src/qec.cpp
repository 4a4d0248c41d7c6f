#include "bosonic/qec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace bosonic {

namespace {

constexpr double kPi = std::numbers::pi;

struct Quartet {
  cxd c, x, y, z;
};

/* Split over {P, X, Y, Z} with Y = |1><0| - |0><1|; exact for any 2x2. */
Quartet split(const Eigen::Matrix2cd& b) {
  Quartet q;
  q.c = 0.5 * (b(0, 0) + b(1, 1));
  q.z = 0.5 * (b(0, 0) - b(1, 1));
  q.x = 0.5 * (b(0, 1) + b(1, 0));
  q.y = 0.5 * (b(1, 0) - b(0, 1));
  return q;
}

/* Loss-count distribution p_l = sum_n w_n Binom(l; n, gamma) with w_n the
 * mean code-ket weight at Fock level n; stable forward recurrence per n. */
Eigen::VectorXd loss_mass(const CodePair& pair, double gamma) {
  const int dim = pair.dim();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
  for (int n = 0; n < dim; ++n) {
    const double w = 0.5 * (std::norm(pair.zero(n)) + std::norm(pair.one(n)));
    if (w <= 0.0) continue;
    if (gamma >= 1.0) {
      p(n) += w;
      continue;
    }
    double pmf = std::pow(1.0 - gamma, n);
    for (int l = 0; l <= n; ++l) {
      p(l) += w * pmf;
      pmf *= (gamma / (1.0 - gamma)) * double(n - l) / double(l + 1);
    }
  }
  return p;
}

int default_loss_order(const Eigen::VectorXd& mass) {
  double cum = 0.0;
  for (int l = 0; l < mass.size(); ++l) {
    cum += mass(l);
    if (cum >= 1.0 - 1e-4) return l;
  }
  return static_cast<int>(mass.size()) - 1;
}

double binom_coeff(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double v = 1.0;
  for (int j = 1; j <= k; ++j) v *= double(n - k + j) / double(j);
  return v;
}

}  // namespace

Mat QecMatrix::full() const {
  const int d = 2 * (L + 1);
  Mat f = Mat::Zero(d, d);
  for (int l = 0; l <= L; ++l)
    for (int lp = 0; lp <= L; ++lp) f.block<2, 2>(2 * l, 2 * lp) = block(l, lp);
  return f;
}

double QecMatrix::c(int l, int lp) const { return split(block(l, lp)).c.real(); }
double QecMatrix::x(int l, int lp) const { return split(block(l, lp)).x.real(); }
double QecMatrix::y(int l, int lp) const { return split(block(l, lp)).y.real(); }
double QecMatrix::z(int l, int lp) const { return split(block(l, lp)).z.real(); }

QecMatrix qec_matrix(const CodePair& pair, double gamma, int L) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("qec_matrix: gamma outside [0,1]");
  const Eigen::VectorXd mass = loss_mass(pair, gamma);
  if (L < 0) L = default_loss_order(mass);
  L = std::min(L, pair.dim() - 1);

  QecMatrix m;
  m.L = L;
  m.gamma = gamma;
  m.mass_beyond_L = std::max(0.0, 1.0 - mass.head(L + 1).sum());
  m.cutoff_starved = pair.deficit > 1e-6;

  const Mat V = pair.isometry();
  const KrausChannel loss = pure_loss(gamma, pair.dim(), L);
  std::vector<Mat> W(L + 1);  // error-subspace frames E_l V, dim x 2
  for (int l = 0; l <= L; ++l)
    W[l] = (l < static_cast<int>(loss.ops.size())) ? Mat(loss.ops[l] * V) : Mat(Mat::Zero(pair.dim(), 2));

  m.blocks.resize(static_cast<size_t>(L + 1) * (L + 1));
  double imag = 0.0;
  for (int l = 0; l <= L; ++l)
    for (int lp = 0; lp <= L; ++lp) {
      Eigen::Matrix2cd b = W[l].adjoint() * W[lp];
      const Quartet q = split(b);
      imag = std::max({imag, std::abs(q.c.imag()), std::abs(q.x.imag()), std::abs(q.y.imag()),
                       std::abs(q.z.imag())});
      m.blocks[static_cast<size_t>(l) * (L + 1) + lp] = b;
    }
  m.imag_residual = imag;

  Eigen::SelfAdjointEigenSolver<Mat> es(m.full(), Eigen::EigenvaluesOnly);
  m.min_eigenvalue = es.eigenvalues().minCoeff();
  return m;
}

double max_uncorrectable(const QecMatrix& m) {
  double worst = 0.0;
  for (int l = 0; l <= m.L; ++l)
    for (int lp = 0; lp <= m.L; ++lp) {
      const Quartet q = split(m.block(l, lp));
      worst = std::max({worst, std::abs(q.x.real()), std::abs(q.y.real()), std::abs(q.z.real())});
    }
  return worst;
}

void write_qec_csv(const QecMatrix& m, std::ostream& out) {
  out << "l,lp,component,value\n";
  static const char* names[4] = {"c", "x", "y", "z"};
  for (int l = 0; l <= m.L; ++l)
    for (int lp = 0; lp <= m.L; ++lp) {
      const Quartet q = split(m.block(l, lp));
      const double vals[4] = {q.c.real(), q.x.real(), q.y.real(), q.z.real()};
      for (int k = 0; k < 4; ++k)
        out << l << ',' << lp << ',' << names[k] << ',' << vals[k] << '\n';
    }
}

CatAnalytic cat_analytic_block(double alpha, int S, double gamma, int ell) {
  const int period = 2 * (S + 1);
  auto wrap = [period](int r) { return ((r % period) + period) % period; };
  auto norm_at = [&](double a, int r) { return cat_normalization(a, wrap(r), S); };

  const double aprime = alpha * std::sqrt(1.0 - gamma);
  const double ga2 = gamma * alpha * alpha;

  CatAnalytic out;
  // Poisson(ell; gamma alpha^2) weight shared by the diagonal blocks
  const double pois =
      (ga2 == 0.0) ? (ell == 0 ? 1.0 : 0.0)
                   : std::exp(ell * std::log(ga2) - ga2 - log_factorial(ell));
  const double r0 = norm_at(aprime, -ell) / norm_at(alpha, 0);
  const double r1 = norm_at(aprime, S + 1 - ell) / norm_at(alpha, S + 1);
  out.c = 0.5 * pois * (r0 + r1);
  out.z = 0.5 * pois * (r0 - r1);

  // ket mean-occupation imbalance; its roots are the backaction sweet spots
  out.dnbar = 0.5 * alpha * alpha *
              (norm_at(alpha, -1) / norm_at(alpha, 0) - norm_at(alpha, S) / norm_at(alpha, S + 1));

  // first uncorrectable block (0, S+1): an antidiagonal cross-ket overlap
  const double pref =
      (ga2 == 0.0) ? 0.0
                   : std::exp(0.5 * (S + 1) * std::log(ga2) - ga2 - 0.5 * log_factorial(S + 1)) /
                         std::sqrt(norm_at(alpha, 0) * norm_at(alpha, S + 1));
  out.eps_first = Eigen::Matrix2cd::Zero();
  out.eps_first(0, 1) = pref * norm_at(aprime, 0);
  out.eps_first(1, 0) = pref * norm_at(aprime, S + 1);
  out.x_first = 0.5 * (out.eps_first(0, 1).real() + out.eps_first(1, 0).real());
  return out;
}

BinAnalytic binomial_analytic_block(int N, int S, double gamma, int ell) {
  const int step = S + 1;
  const int deg = step * (N + 1);
  BinAnalytic out;
  if (ell > deg) return out;

  // ((1 +- x^{S+1})/2)^{N+1} as exact coefficient arrays
  std::vector<double> plus(deg + 1, 0.0), minus(deg + 1, 0.0);
  const double scale2 = std::pow(0.5, N + 1);
  for (int mm = 0; mm <= N + 1; ++mm) {
    const double coef = binom_coeff(N + 1, mm) * scale2;
    plus[step * mm] = coef;
    minus[step * mm] = (mm % 2 == 0) ? coef : -coef;
  }

  const double x0 = 1.0 - gamma;
  auto derivative_at = [&](const std::vector<double>& p) {
    double s = 0.0;
    for (int k = ell; k <= deg; ++k) {
      double falling = 1.0;
      for (int j = 0; j < ell; ++j) falling *= double(k - j);
      s += p[k] * falling * std::pow(x0, k - ell);
    }
    return s;
  };

  double fact = 1.0;
  for (int j = 2; j <= ell; ++j) fact *= double(j);
  const double weight = std::pow(gamma, ell) / fact;
  out.c = weight * derivative_at(plus);
  out.z = weight * derivative_at(minus);
  return out;
}

GkpAnalytic gkp_analytic_block(double delta, double gamma, int ell, int ellp, int radius) {
  if (delta <= 0.0) throw std::invalid_argument("gkp_analytic_block: delta must be positive");
  if (gamma <= 0.0 || gamma >= 1.0)
    throw std::invalid_argument("gkp_analytic_block: need 0 < gamma < 1");
  constexpr int kRadiusCap = 12;
  radius = std::clamp(radius, 1, kRadiusCap);

  GkpAnalytic g;
  const double nbar = 0.5 / (delta * delta) - 0.5;
  const double gn = gamma * nbar;
  g.gamma_nbar = gn;
  g.asymptotic_ok = gn >= 1.0;
  g.c_thermal = std::pow(gn, ell) / std::pow(gn + 1.0, ell + 1);

  // nearest-neighbor distortion estimate at the real shift sqrt(pi/(2 gamma))
  const int dcut = std::max(ell, ellp) + 2;
  {
    const Mat D = displacement_operator(cxd(std::sqrt(kPi / (2.0 * gamma)), 0.0), dcut);
    const double cl = std::pow(gn, ell) / std::pow(gn + 1.0, ell + 1);
    const double clp = std::pow(gn, ellp) / std::pow(gn + 1.0, ellp + 1);
    const cxd me = D(ell, ellp) + std::conj(D(ellp, ell));
    g.z_estimate = std::sqrt(cl * clp) * std::exp(-0.25 * kPi * (1.0 - gamma) / gamma) * me.real();
  }

  const double pref = std::pow(gn, 0.5 * (ell + ellp)) / std::pow(gn + 1.0, 0.5 * (ell + ellp) + 1.0);
  const double decay = (1.0 - gamma) / (2.0 * gamma) + 0.5 * delta * delta;
  const double root_g = std::sqrt(gamma);

  auto eval = [&](int R) {
    Eigen::Matrix2cd b = Eigen::Matrix2cd::Zero();
    for (int mu = 0; mu < 2; ++mu)
      for (int nu = 0; nu < 2; ++nu) {
        cxd s(0.0, 0.0);
        for (int n1 = -R; n1 <= R; ++n1)
          for (int n2 = -R; n2 <= R; ++n2) {
            const cxd lam = std::sqrt(kPi / 2.0) * cxd(2.0 * n1 + double(mu - nu), double(n2));
            const double w = std::exp(-decay * std::norm(lam));
            if (w < 1e-300) continue;
            const cxd phase = std::exp(cxd(0.0, kPi * (n1 + 0.5 * (mu + nu)) * n2));
            const Mat D = displacement_operator(std::conj(lam) / root_g, dcut);
            s += phase * w * D(ell, ellp);
          }
        b(mu, nu) = pref * s;
      }
    return b;
  };

  int used = radius;
  Eigen::Matrix2cd cur = eval(used);
  while (used < kRadiusCap) {
    const Eigen::Matrix2cd next = eval(used + 1);
    const double scale = std::max(next.cwiseAbs().maxCoeff(), 1e-300);
    const double rel = (next - cur).cwiseAbs().maxCoeff() / scale;
    cur = next;
    ++used;
    if (rel <= 1e-3) break;
  }
  g.block = cur;
  g.radius_used = used;
  return g;
}

cxd gkp_displacement_overlap(double delta, cxd alpha, int mu, int nu, int radius) {
  const double d2 = delta * delta;
  cxd s(0.0, 0.0);
  for (int n1 = -radius; n1 <= radius; ++n1)
    for (int n2 = -radius; n2 <= radius; ++n2) {
      const cxd lam = std::sqrt(kPi / 2.0) * cxd(2.0 * n1 + double(mu - nu), double(n2));
      const double w = std::exp(-std::norm(alpha - lam) / (2.0 * d2) - 0.5 * d2 * std::norm(lam));
      if (w < 1e-300) continue;
      const cxd phase = std::exp(cxd(0.0, kPi * (n1 + 0.5 * (mu + nu)) * n2));
      s += phase * w;
    }
  return s;
}

GkpMoment moments_gkp(double delta, int ell, int cutoff_cap) {
  const CodePair g = make_gkp(delta, 2.0, false, GkpRep::smeared, cutoff_cap);
  GkpMoment m;
  const double nbar = 0.5 / (delta * delta) - 0.5;
  m.thermal = 1.0;
  for (int j = 1; j <= ell; ++j) m.thermal *= double(j) * nbar;
  double tr = 0.0;
  for (int n = 0; n < g.dim(); ++n)
    tr += std::pow(double(n), ell) * 0.5 * (std::norm(g.zero(n)) + std::norm(g.one(n)));
  m.numeric = tr;
  return m;
}

ErrorSubspaceReport error_subspace_report(const CodePair& pair, double gamma, int L) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("error_subspace_report: gamma outside [0,1]");
  const Eigen::VectorXd mass = loss_mass(pair, gamma);
  if (L < 0) L = default_loss_order(mass);
  L = std::min(L, pair.dim() - 1);

  ErrorSubspaceReport rep;
  rep.L = L;
  const Mat V = pair.isometry();
  const KrausChannel loss = pure_loss(gamma, pair.dim(), L);

  std::vector<Mat> bases(L + 1);
  rep.ranks.assign(L + 1, 0);
  rep.detection_residuals.assign(L + 1, 0.0);
  for (int l = 0; l <= L; ++l) {
    const Mat El =
        (l < static_cast<int>(loss.ops.size())) ? loss.ops[l] : Mat(Mat::Zero(pair.dim(), pair.dim()));
    const Mat W = El * V;
    Eigen::JacobiSVD<Mat> svd(W, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double tol = std::max(1e-10 * (sv.size() ? sv(0) : 0.0), 1e-14);
    int rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    rep.ranks[l] = rank;
    bases[l] = svd.matrixU().leftCols(rank);
    if (rank < 2) rep.rank_deficient = true;

    const Eigen::Matrix2cd M = V.adjoint() * W;  // code-space restriction
    rep.detection_residuals[l] =
        (M - (M.trace() / 2.0) * Eigen::Matrix2cd::Identity()).norm();
  }

  rep.angle_min = Eigen::MatrixXd::Zero(L + 1, L + 1);
  rep.angle_max = Eigen::MatrixXd::Zero(L + 1, L + 1);
  for (int l = 0; l <= L; ++l)
    for (int lp = 0; lp <= L; ++lp) {
      if (rep.ranks[l] == 0 || rep.ranks[lp] == 0) {
        rep.angle_min(l, lp) = rep.angle_max(l, lp) = 0.5 * kPi;
        continue;
      }
      const Mat G = bases[l].adjoint() * bases[lp];
      Eigen::JacobiSVD<Mat> svd(G);
      const auto& sv = svd.singularValues();
      const double hi = std::clamp(sv(0), 0.0, 1.0);
      const double lo = std::clamp(sv(sv.size() - 1), 0.0, 1.0);
      rep.angle_min(l, lp) = std::acos(hi);
      rep.angle_max(l, lp) = std::acos(lo);
    }
  return rep;
}

}  // namespace bosonic
