#include "bosonic/search.hpp"

#include "bosonic/channels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <thread>

namespace bosonic {

namespace {

constexpr double kExactCost = 1e-8;

// Costs below refinement precision are indistinguishable; floor them so
// exact candidates tie and occupation decides the order.
double rank_cost(double c) { return std::max(c, 1e-12); }

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/* Fixed data of one search problem: the pair products e_l^dag e_l', the
 * occupation weights, and the penalty strength. */
struct Landscape {
  std::vector<Mat> prods;
  Eigen::VectorXd nw;  // diagonal of nhat
  Vec nwc;             // same, complex, for gradients
  double lambda = 0.0;
  bool real_amps = false;
  int dim = 0;
};

/* Keep the pair orthonormal: normalize the first ket, then optimize the
 * second in its orthogonal complement.  Degenerate inputs fall back to
 * basis kets so a restart can never stall on a zero vector. */
void retract(const Landscape& land, Vec& zero, Vec& one) {
  if (land.real_amps) {
    zero = zero.real().cast<cxd>();
    one = one.real().cast<cxd>();
  }
  double nz = zero.norm();
  if (nz < 1e-12) {
    zero.setZero();
    zero(0) = 1.0;
    nz = 1.0;
  }
  zero /= nz;
  one -= zero * zero.dot(one);
  double no = one.norm();
  if (no < 1e-12) {
    for (int n = 0; n < one.size(); ++n) {
      Vec basis = Vec::Zero(one.size());
      basis(n) = 1.0;
      basis -= zero * zero.dot(basis);
      if (basis.norm() > 0.5) {
        one = basis;
        break;
      }
    }
    no = one.norm();
  }
  one /= no;
}

struct CostEval {
  double c1 = 0.0;
  double nbar = 0.0;
  double total = 0.0;
  Vec g0, g1;  // Wirtinger gradients d(total)/d psi^* of the penalized cost
};

CostEval eval_cost(const Landscape& land, const Vec& z, const Vec& o, bool want_grad) {
  CostEval ev;
  if (want_grad) {
    ev.g0 = Vec::Zero(land.dim);
    ev.g1 = Vec::Zero(land.dim);
  }
  for (const Mat& A : land.prods) {
    const Vec Az = A * z, Ao = A * o;
    const cxd d = z.dot(Az) - o.dot(Ao);
    const cxd s = z.dot(Ao);
    ev.c1 += std::norm(d) + std::norm(s);
    if (want_grad) {
      const Vec Adz = A.adjoint() * z, Ado = A.adjoint() * o;
      ev.g0 += std::conj(d) * Az + d * Adz + std::conj(s) * Ao;
      ev.g1 += -std::conj(d) * Ao - d * Ado + s * Adz;
    }
  }
  ev.nbar = 0.5 * (z.cwiseAbs2().dot(land.nw) + o.cwiseAbs2().dot(land.nw));
  ev.total = ev.c1 + land.lambda * ev.nbar;
  if (want_grad) {
    ev.g0 += 0.5 * land.lambda * land.nwc.cwiseProduct(z);
    ev.g1 += 0.5 * land.lambda * land.nwc.cwiseProduct(o);
  }
  return ev;
}

// Remove the component of the gradient normal to the orthonormal-pair
// manifold (it would only fight the retraction).
void project_tangent(const Vec& z, const Vec& o, Vec& g0, Vec& g1) {
  const cxd m00 = z.dot(g0), m01 = z.dot(g1);
  const cxd m10 = o.dot(g0), m11 = o.dot(g1);
  const cxd h00 = m00.real(), h11 = m11.real();
  const cxd h01 = 0.5 * (m01 + std::conj(m10));
  const cxd h10 = std::conj(h01);
  g0 -= z * h00 + o * h10;
  g1 -= z * h01 + o * h11;
}

int state_params(const Landscape& land) { return (land.real_amps ? 2 : 4) * land.dim; }

Eigen::VectorXd pack_state(const Landscape& land, const Vec& z, const Vec& o) {
  Eigen::VectorXd x(state_params(land));
  if (land.real_amps)
    x << z.real(), o.real();
  else
    x << z.real(), z.imag(), o.real(), o.imag();
  return x;
}

void unpack_state(const Landscape& land, const Eigen::VectorXd& x, Vec& z, Vec& o) {
  const int n = land.dim;
  z.resize(n);
  o.resize(n);
  if (land.real_amps) {
    z = x.segment(0, n).cast<cxd>();
    o = x.segment(n, n).cast<cxd>();
  } else {
    z.real() = x.segment(0, n);
    z.imag() = x.segment(n, n);
    o.real() = x.segment(2 * n, n);
    o.imag() = x.segment(3 * n, n);
  }
}

Eigen::VectorXd pack_grad(const Landscape& land, const Vec& g0, const Vec& g1) {
  // Real gradient of a real cost: d/du = 2 Re g, d/dv = 2 Im g.
  Eigen::VectorXd g(state_params(land));
  if (land.real_amps)
    g << 2.0 * g0.real(), 2.0 * g1.real();
  else
    g << 2.0 * g0.real(), 2.0 * g0.imag(), 2.0 * g1.real(), 2.0 * g1.imag();
  return g;
}

struct DescentResult {
  Vec z, o;
  double c1 = 0.0;
  double total = 0.0;
};

DescentResult evaluate_point(const Landscape& land, Vec z, Vec o) {
  retract(land, z, o);
  const CostEval ev = eval_cost(land, z, o, false);
  return {std::move(z), std::move(o), ev.c1, ev.total};
}

/* Moment-averaged gradient descent with per-coordinate step scaling and a
 * projection retraction after every update. */
DescentResult adam_descent(const Landscape& land, Vec z, Vec o, int iters) {
  retract(land, z, o);
  const int dim = state_params(land);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(dim), v = Eigen::VectorXd::Zero(dim);
  const double lr = 0.05, beta1 = 0.9, beta2 = 0.999;
  DescentResult best = evaluate_point(land, z, o);
  int stale = 0;
  for (int t = 1; t <= iters; ++t) {
    CostEval ev = eval_cost(land, z, o, true);
    if (ev.total < best.total - 1e-16) {
      best = {z, o, ev.c1, ev.total};
      stale = 0;
    } else if (++stale > 400) {
      break;
    }
    project_tangent(z, o, ev.g0, ev.g1);
    const Eigen::VectorXd g = pack_grad(land, ev.g0, ev.g1);
    if (g.norm() < 1e-11) break;
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(beta1, t), bc2 = 1.0 - std::pow(beta2, t);
    const double step = lr / (1.0 + 2.0 * double(t) / double(iters));
    Eigen::VectorXd x = pack_state(land, z, o);
    x -= step * ((m / bc1).array() / ((v / bc2).array().sqrt() + 1e-9)).matrix();
    unpack_state(land, x, z, o);
    retract(land, z, o);
  }
  return best;
}

/* Deterministic simplex (reflection/expansion/contraction/shrink with
 * dimension-adapted coefficients); derivative-free option. */
DescentResult nelder_mead(const Landscape& land, const Vec& z0, const Vec& o0, int max_evals) {
  const int dim = state_params(land);
  int evals = 0;
  auto cost_at = [&](const Eigen::VectorXd& x) {
    Vec z, o;
    unpack_state(land, x, z, o);
    retract(land, z, o);
    ++evals;
    return eval_cost(land, z, o, false).total;
  };
  std::vector<Eigen::VectorXd> pts(dim + 1, pack_state(land, z0, o0));
  Eigen::VectorXd costs(dim + 1);
  for (int i = 1; i <= dim; ++i) pts[i](i - 1) += 0.25;
  for (int i = 0; i <= dim; ++i) costs(i) = cost_at(pts[i]);
  const double alpha = 1.0, gamma = 1.0 + 2.0 / dim;
  const double rho = 0.75 - 0.5 / dim, sigma = 1.0 - 1.0 / dim;
  std::vector<int> order(dim + 1);
  while (evals < max_evals) {
    for (int i = 0; i <= dim; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return costs(a) < costs(b); });
    if (costs(order[dim]) - costs(order[0]) < 1e-13) break;
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < dim; ++i) centroid += pts[order[i]];
    centroid /= dim;
    const int worst = order[dim];
    const Eigen::VectorXd refl = centroid + alpha * (centroid - pts[worst]);
    const double c_refl = cost_at(refl);
    if (c_refl < costs(order[0])) {
      const Eigen::VectorXd expa = centroid + gamma * (refl - centroid);
      const double c_expa = cost_at(expa);
      if (c_expa < c_refl) {
        pts[worst] = expa;
        costs(worst) = c_expa;
      } else {
        pts[worst] = refl;
        costs(worst) = c_refl;
      }
    } else if (c_refl < costs(order[dim - 1])) {
      pts[worst] = refl;
      costs(worst) = c_refl;
    } else {
      const bool outside = c_refl < costs(worst);
      const Eigen::VectorXd contr =
          centroid + rho * ((outside ? refl : pts[worst]) - centroid);
      const double c_contr = cost_at(contr);
      if (c_contr < std::min(c_refl, costs(worst))) {
        pts[worst] = contr;
        costs(worst) = c_contr;
      } else {
        for (int i = 1; i <= dim; ++i) {
          const int k = order[i];
          pts[k] = pts[order[0]] + sigma * (pts[k] - pts[order[0]]);
          costs(k) = cost_at(pts[k]);
        }
      }
    }
  }
  int ibest = 0;
  for (int i = 1; i <= dim; ++i)
    if (costs(i) < costs(ibest)) ibest = i;
  Vec z, o;
  unpack_state(land, pts[ibest], z, o);
  return evaluate_point(land, std::move(z), std::move(o));
}

/* Residuals whose zero set is the exact-code variety: the complex entries
 * d and s for every operator pair, plus the orthonormality of the kets and,
 * when pinned_nbar >= 0, the occupation constraint nbar = pinned_nbar. */
struct ViolationSystem {
  const Landscape& land;
  double pinned_nbar;
  int rows, cols;

  explicit ViolationSystem(const Landscape& l, double pin = -1.0)
      : land(l),
        pinned_nbar(pin),
        rows(4 * static_cast<int>(l.prods.size()) + 4 + (pin >= 0.0 ? 1 : 0)),
        cols(state_params(l)) {}

  void eval(const Vec& pz, const Vec& po, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
    const int n = land.dim;
    r.resize(rows);
    if (J) J->setZero(rows, cols);
    // Two real rows per complex residual; columns ordered like pack_state.
    // a* are holomorphic, b* antiholomorphic Wirtinger derivatives.
    auto fill = [&](int ri, cxd value, const Vec& a0, const Vec& b0, const Vec& a1,
                    const Vec& b1) {
      r(ri) = value.real();
      r(ri + 1) = value.imag();
      if (!J) return;
      for (int j = 0; j < n; ++j) {
        const cxd du0 = a0(j) + b0(j);
        const cxd du1 = a1(j) + b1(j);
        if (land.real_amps) {
          (*J)(ri, j) = du0.real();
          (*J)(ri + 1, j) = du0.imag();
          (*J)(ri, n + j) = du1.real();
          (*J)(ri + 1, n + j) = du1.imag();
        } else {
          const cxd dv0 = cxd(0.0, 1.0) * (a0(j) - b0(j));
          const cxd dv1 = cxd(0.0, 1.0) * (a1(j) - b1(j));
          (*J)(ri, j) = du0.real();
          (*J)(ri + 1, j) = du0.imag();
          (*J)(ri, n + j) = dv0.real();
          (*J)(ri + 1, n + j) = dv0.imag();
          (*J)(ri, 2 * n + j) = du1.real();
          (*J)(ri + 1, 2 * n + j) = du1.imag();
          (*J)(ri, 3 * n + j) = dv1.real();
          (*J)(ri + 1, 3 * n + j) = dv1.imag();
        }
      }
    };
    const Vec none = Vec::Zero(n);
    const int pairs = static_cast<int>(land.prods.size());
    for (int k = 0; k < pairs; ++k) {
      const Mat& A = land.prods[k];
      const Vec Az = A * pz, Ao = A * po;
      const Vec Atz = A.transpose() * pz.conjugate(), Ato = A.transpose() * po.conjugate();
      const cxd d = pz.dot(Az) - po.dot(Ao);
      const cxd s = pz.dot(Ao);
      fill(4 * k, d, Atz, Az, -Ato, -Ao);
      fill(4 * k + 2, s, none, Ao, Atz, none);
    }
    // Orthonormality rows: the two norm residuals are real, <z|o> complex.
    const int c0 = 4 * pairs;
    r(c0) = pz.squaredNorm() - 1.0;
    r(c0 + 1) = po.squaredNorm() - 1.0;
    const cxd zo = pz.dot(po);
    r(c0 + 2) = zo.real();
    r(c0 + 3) = zo.imag();
    if (J) {
      for (int j = 0; j < n; ++j) {
        (*J)(c0, j) = 2.0 * pz(j).real();
        (*J)(c0 + 1, land.real_amps ? n + j : 2 * n + j) = 2.0 * po(j).real();
        // <z|o>: holomorphic in o, antiholomorphic in z.
        const cxd du0 = po(j), du1 = std::conj(pz(j));
        (*J)(c0 + 2, j) = du0.real();
        (*J)(c0 + 3, j) = du0.imag();
        if (land.real_amps) {
          (*J)(c0 + 2, n + j) = du1.real();
          (*J)(c0 + 3, n + j) = du1.imag();
        } else {
          (*J)(c0, n + j) = 2.0 * pz(j).imag();
          (*J)(c0 + 1, 3 * n + j) = 2.0 * po(j).imag();
          const cxd dv0 = cxd(0.0, 1.0) * (-po(j));
          const cxd dv1 = cxd(0.0, 1.0) * std::conj(pz(j));
          (*J)(c0 + 2, n + j) = dv0.real();
          (*J)(c0 + 3, n + j) = dv0.imag();
          (*J)(c0 + 2, 2 * n + j) = du1.real();
          (*J)(c0 + 3, 2 * n + j) = du1.imag();
          (*J)(c0 + 2, 3 * n + j) = dv1.real();
          (*J)(c0 + 3, 3 * n + j) = dv1.imag();
        }
      }
    }
    if (pinned_nbar >= 0.0) {
      const int cn = c0 + 4;
      r(cn) = 0.5 * (pz.cwiseAbs2().dot(land.nw) + po.cwiseAbs2().dot(land.nw)) - pinned_nbar;
      if (J) {
        for (int j = 0; j < n; ++j) {
          (*J)(cn, j) = land.nw(j) * pz(j).real();
          if (land.real_amps) {
            (*J)(cn, n + j) = land.nw(j) * po(j).real();
          } else {
            (*J)(cn, n + j) = land.nw(j) * pz(j).imag();
            (*J)(cn, 2 * n + j) = land.nw(j) * po(j).real();
            (*J)(cn, 3 * n + j) = land.nw(j) * po(j).imag();
          }
        }
      }
    }
  }
};

/* Damped Gauss-Newton refinement of the violation alone (the occupation
 * penalty displaces the minimum off an exact code by O(lambda); this step
 * walks back onto it).  A retraction after each accepted step removes the
 * drift the constraint rows leave behind. */
DescentResult gauss_newton_polish(const Landscape& land, Vec z, Vec o, int max_iters = 80,
                                  double pinned_nbar = -1.0) {
  retract(land, z, o);
  const ViolationSystem sys(land, pinned_nbar);
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  double damping = 1e-8;
  int failures = 0;
  for (int it = 0; it < max_iters; ++it) {
    sys.eval(z, o, r, &J);
    const double sq = r.squaredNorm();
    if (sq < 1e-28) break;
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd Jtr = J.transpose() * r;
    bool accepted = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd H = JtJ;
      H.diagonal().array() += damping * (1.0 + JtJ.diagonal().maxCoeff());
      const Eigen::VectorXd delta = H.ldlt().solve(-Jtr);
      Vec tz, to;
      unpack_state(land, pack_state(land, z, o) + delta, tz, to);
      retract(land, tz, to);
      Eigen::VectorXd rt;
      sys.eval(tz, to, rt, nullptr);
      if (rt.squaredNorm() < sq) {
        z = std::move(tz);
        o = std::move(to);
        damping = std::max(damping / 3.0, 1e-12);
        accepted = true;
        break;
      }
      damping *= 10.0;
    }
    if (!accepted && ++failures > 2) break;
  }
  return evaluate_point(land, std::move(z), std::move(o));
}

/* The exact codes of an error set form a continuum, and a weak penalty
 * leaves a generic descent stranded anywhere on it.  Finish the job of the
 * penalty exactly: follow the occupation gradient projected onto the
 * tangent space of the variety (null space of the violation Jacobian),
 * re-polishing after every step.  target < 0 minimizes the occupation;
 * otherwise the walk stops once the occupation reaches the target. */
DescentResult slide_along_variety(const Landscape& land, Vec z, Vec o, double target) {
  const ViolationSystem sys(land);
  const int n = land.dim;
  double eta = 0.05;
  auto occupation = [&](const Vec& a, const Vec& b) {
    return 0.5 * (a.cwiseAbs2().dot(land.nw) + b.cwiseAbs2().dot(land.nw));
  };
  auto objective = [&](double nb) {
    return target < 0.0 ? nb : 0.5 * (nb - target) * (nb - target);
  };
  double nbar = occupation(z, o);
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  for (int it = 0; it < 800; ++it) {
    if (target >= 0.0 && std::abs(nbar - target) < 1e-10) break;
    sys.eval(z, o, r, &J);
    Eigen::VectorXd g(sys.cols);
    if (land.real_amps) {
      g.segment(0, n) = land.nw.cwiseProduct(z.real());
      g.segment(n, n) = land.nw.cwiseProduct(o.real());
    } else {
      g.segment(0, n) = land.nw.cwiseProduct(z.real());
      g.segment(n, n) = land.nw.cwiseProduct(z.imag());
      g.segment(2 * n, n) = land.nw.cwiseProduct(o.real());
      g.segment(3 * n, n) = land.nw.cwiseProduct(o.imag());
    }
    if (target >= 0.0) g *= (nbar - target);
    // least-squares multiplier removes the normal component of g
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12;
    const Eigen::VectorXd y = JJt.ldlt().solve(J * g);
    const Eigen::VectorXd gt = g - J.transpose() * y;
    if (gt.norm() < 1e-11) break;
    bool moved = false;
    for (int tries = 0; tries < 6; ++tries) {
      Vec tz, to;
      unpack_state(land, pack_state(land, z, o) - eta * gt, tz, to);
      retract(land, tz, to);
      const DescentResult pol = gauss_newton_polish(land, std::move(tz), std::move(to), 12);
      const double tn = occupation(pol.z, pol.o);
      if (pol.c1 < 1e-18 && objective(tn) < objective(nbar) - 1e-16) {
        z = pol.z;
        o = pol.o;
        nbar = tn;
        eta = std::min(eta * 1.4, 0.25);
        moved = true;
        break;
      }
      eta /= 3.0;
    }
    if (!moved) break;
  }
  return evaluate_point(land, std::move(z), std::move(o));
}

/* Exact codes with equal occupation still differ in how badly they violate
 * the conditions for the *next* order of the physical channel.  With the
 * occupation pinned, walk the constant-occupation slice of the exact
 * variety downhill in the violation of a secondary operator set (e.g. the
 * loss Kraus operators themselves, whose violation on the exact variety is
 * purely the leading uncorrectable residue). */
DescentResult minimize_secondary_on_slice(const Landscape& primary, const Landscape& secondary,
                                          Vec z, Vec o, double pin) {
  const ViolationSystem sys(primary, pin);
  double eta = 0.05;
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  CostEval cur = eval_cost(secondary, z, o, false);
  for (int it = 0; it < 800; ++it) {
    sys.eval(z, o, r, &J);
    CostEval ev = eval_cost(secondary, z, o, true);
    project_tangent(z, o, ev.g0, ev.g1);
    Eigen::VectorXd g = pack_grad(primary, ev.g0, ev.g1);
    Eigen::MatrixXd JJt = J * J.transpose();
    JJt.diagonal().array() += 1e-12;
    const Eigen::VectorXd y = JJt.ldlt().solve(J * g);
    const Eigen::VectorXd gt = g - J.transpose() * y;
    const double scale = std::max(gt.norm(), 1e-300);
    if (scale < 1e-13) break;
    bool moved = false;
    for (int tries = 0; tries < 8; ++tries) {
      Vec tz, to;
      unpack_state(primary, pack_state(primary, z, o) - (eta / scale) * gt, tz, to);
      retract(primary, tz, to);
      DescentResult pol = gauss_newton_polish(primary, std::move(tz), std::move(to), 12, pin);
      const CostEval trial = eval_cost(secondary, pol.z, pol.o, false);
      if (pol.c1 < 1e-18 && trial.c1 < cur.c1 * (1.0 - 1e-10)) {
        z = std::move(pol.z);
        o = std::move(pol.o);
        cur = trial;
        eta = std::min(eta * 1.4, 0.2);
        moved = true;
        break;
      }
      eta /= 3.0;
    }
    if (!moved) break;
  }
  return evaluate_point(primary, std::move(z), std::move(o));
}

Vec random_ket(const Landscape& land, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Vec v(land.dim);
  for (int i = 0; i < land.dim; ++i) {
    const double re = gauss(rng);
    const double im = land.real_amps ? 0.0 : gauss(rng);
    v(i) = cxd(re, im);
  }
  return v;
}

/* Repeated descents from kicked copies of the running minimum; a mild
 * acceptance temperature lets the walk cross shallow barriers. */
DescentResult basin_hopping(const Landscape& land, Vec z, Vec o, int leg_iters, int hops,
                            std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DescentResult current = adam_descent(land, std::move(z), std::move(o), leg_iters);
  DescentResult best = current;
  const double temperature = 1e-3;
  for (int h = 0; h < hops; ++h) {
    const double kick = 0.45 * std::pow(0.75, h);
    Vec zk = current.z, ok = current.o;
    for (int i = 0; i < land.dim; ++i) {
      zk(i) += kick * cxd(gauss(rng), land.real_amps ? 0.0 : gauss(rng));
      ok(i) += kick * cxd(gauss(rng), land.real_amps ? 0.0 : gauss(rng));
    }
    DescentResult leg = adam_descent(land, std::move(zk), std::move(ok), leg_iters);
    if (leg.total < best.total) best = leg;
    if (leg.total < current.total ||
        std::exp(-(leg.total - current.total) / temperature) > unif(rng))
      current = std::move(leg);
  }
  return best;
}

SearchCandidate run_restart(const SearchConfig& cfg, const Landscape& land,
                            const std::vector<Mat>& ops, std::uint64_t rseed) {
  std::mt19937_64 rng(rseed);
  Vec z = random_ket(land, rng), o = random_ket(land, rng);
  DescentResult res;
  const int budget = cfg.max_iterations;
  switch (cfg.optimizer) {
    case SearchOptimizer::adam_like_gradient:
      res = adam_descent(land, std::move(z), std::move(o), budget > 0 ? budget : 2600);
      break;
    case SearchOptimizer::nelder_mead:
      res = nelder_mead(land, z, o, budget > 0 ? budget : 350 * state_params(land));
      break;
    case SearchOptimizer::basin_hopping:
      res = basin_hopping(land, std::move(z), std::move(o), budget > 0 ? budget : 1400, 6, rng);
      break;
  }
  res = gauss_newton_polish(land, std::move(res.z), std::move(res.o));
  if (res.c1 < 1e-18 && land.lambda > 0.0)
    res = slide_along_variety(land, std::move(res.z), std::move(res.o), -1.0);
  SearchCandidate cand;
  cand.zero = std::move(res.z);
  cand.one = std::move(res.o);
  cand.cost = kl_cost(cand.zero, cand.one, ops);
  cand.nbar = 0.5 * (cand.zero.cwiseAbs2().dot(land.nw) + cand.one.cwiseAbs2().dot(land.nw));
  cand.exact = cand.cost <= kExactCost;
  return cand;
}

}  // namespace

std::vector<Mat> loss_error_set(int nmax, int max_power) {
  if (nmax < 1 || max_power < 0) throw std::invalid_argument("loss_error_set: bad arguments");
  const int dim = nmax + 1;
  std::vector<Mat> ops{Mat::Identity(dim, dim)};
  const Mat a = build_ladder(nmax).a;
  Mat cur = Mat::Identity(dim, dim);
  for (int k = 1; k <= max_power; ++k) {
    cur = a * cur;
    ops.push_back(cur);
  }
  return ops;
}

double kl_cost(const Vec& zero, const Vec& one, const std::vector<Mat>& error_set) {
  double c1 = 0.0;
  for (const Mat& el : error_set)
    for (const Mat& elp : error_set) {
      const Mat A = el.adjoint() * elp;
      const cxd d = zero.dot(A * zero) - one.dot(A * one);
      const cxd s = zero.dot(A * one);
      c1 += std::norm(d) + std::norm(s);
    }
  return c1;
}

SearchResult search(const SearchConfig& config) {
  if (config.nmax < 5) throw std::invalid_argument("search: nmax must be >= 5");
  if (config.lambda_nbar < 0.0) throw std::invalid_argument("search: lambda_nbar must be >= 0");
  if (config.restarts < 1) throw std::invalid_argument("search: need at least one restart");
  const int dim = config.nmax + 1;
  const std::vector<Mat> ops =
      config.error_set.empty() ? loss_error_set(config.nmax) : config.error_set;
  for (const Mat& op : ops)
    if (op.rows() != dim || op.cols() != dim)
      throw std::invalid_argument("search: error operators must be (nmax+1) x (nmax+1)");

  Landscape land;
  land.dim = dim;
  land.lambda = config.lambda_nbar;
  land.real_amps = config.real_amplitudes;
  land.nw = Eigen::VectorXd::LinSpaced(dim, 0.0, double(dim - 1));
  land.nwc = land.nw.cast<cxd>();
  land.prods.reserve(ops.size() * ops.size());
  for (const Mat& el : ops)
    for (const Mat& elp : ops) land.prods.push_back(el.adjoint() * elp);

  // Restarts are independent (seeded per index), so threads write disjoint
  // slots and the merge below is deterministic given the seed list.
  std::vector<SearchCandidate> slots(config.restarts);
  std::atomic<int> next{0};
  const int workers =
      std::min<int>(config.restarts, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int r; (r = next.fetch_add(1)) < config.restarts;)
        slots[r] = run_restart(config, land, ops, mix_seed(config.seed, r));
    });
  for (std::thread& t : pool) t.join();

  std::vector<int> order(slots.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ca = rank_cost(slots[a].cost), cb = rank_cost(slots[b].cost);
    if (ca != cb) return ca < cb;
    if (slots[a].nbar != slots[b].nbar) return slots[a].nbar < slots[b].nbar;
    return a < b;
  });

  SearchResult result;
  // Fock-phase rotations e^{i theta nhat} map codes to equally good codes
  // with the same occupation, so compare |projector| entries, which that
  // gauge cannot change.
  std::vector<Eigen::MatrixXd> projectors;
  for (int idx : order) {
    SearchCandidate& cand = slots[idx];
    const Eigen::MatrixXd aproj =
        (cand.zero * cand.zero.adjoint() + cand.one * cand.one.adjoint()).cwiseAbs();
    bool duplicate = false;
    for (size_t k = 0; k < projectors.size(); ++k) {
      if (std::abs(result.candidates[k].nbar - cand.nbar) < 1e-5 &&
          (projectors[k] - aproj).norm() < 1e-4) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    projectors.push_back(aproj);
    result.candidates.push_back(std::move(cand));
  }
  for (const SearchCandidate& cand : result.candidates)
    if (cand.exact) result.exact.push_back(cand);
  return result;
}

CodeCertificate certify(const Vec& zero, const Vec& one, const std::vector<Mat>& error_set) {
  if (zero.size() != one.size() || zero.size() == 0)
    throw std::invalid_argument("certify: kets must share a nonzero dimension");
  Vec z = zero / zero.norm();
  Vec o = one - z * z.dot(one);
  const double no = o.norm();
  if (no < 1e-10) throw std::invalid_argument("certify: kets are (near) parallel");
  o /= no;
  CodeCertificate cert;
  for (const Mat& el : error_set)
    for (const Mat& elp : error_set) {
      const Mat A = el.adjoint() * elp;
      const cxd f00 = z.dot(A * z), f11 = o.dot(A * o);
      const cxd f01 = z.dot(A * o), f10 = o.dot(A * z);
      const cxd g = 0.5 * (f00 + f11);
      cert.max_violation = std::max({cert.max_violation, std::abs(f00 - g), std::abs(f11 - g),
                                     std::abs(f01), std::abs(f10)});
    }
  const int dim = static_cast<int>(z.size());
  const Eigen::VectorXd nw = Eigen::VectorXd::LinSpaced(dim, 0.0, double(dim - 1));
  cert.nbar = 0.5 * (z.cwiseAbs2().dot(nw) + o.cwiseAbs2().dot(nw));
  return cert;
}

CodeCertificate certify(const SearchCandidate& cand, const std::vector<Mat>& error_set) {
  return certify(cand.zero, cand.one, error_set);
}

SearchCandidate refine_to_nbar(const SearchCandidate& start, const std::vector<Mat>& error_set,
                               double nbar_target, bool real_amplitudes,
                               double sharpen_loss_gamma) {
  if (error_set.empty()) throw std::invalid_argument("refine_to_nbar: empty error set");
  if (nbar_target <= 0.0) throw std::invalid_argument("refine_to_nbar: target must be positive");
  const int dim = static_cast<int>(start.zero.size());
  auto make_land = [&](const std::vector<Mat>& ops) {
    Landscape land;
    land.dim = dim;
    land.lambda = 0.0;
    land.real_amps = real_amplitudes;
    land.nw = Eigen::VectorXd::LinSpaced(dim, 0.0, double(dim - 1));
    land.nwc = land.nw.cast<cxd>();
    land.prods.reserve(ops.size() * ops.size());
    for (const Mat& el : ops) {
      if (el.rows() != dim || el.cols() != dim)
        throw std::invalid_argument("refine_to_nbar: operator dimension mismatch");
      for (const Mat& elp : ops) land.prods.push_back(el.adjoint() * elp);
    }
    return land;
  };
  const Landscape land = make_land(error_set);
  DescentResult res = gauss_newton_polish(land, start.zero, start.one);
  res = slide_along_variety(land, std::move(res.z), std::move(res.o), nbar_target);
  if (sharpen_loss_gamma > 0.0) {
    const Landscape loss_land = make_land(pure_loss(sharpen_loss_gamma, dim).ops);
    res = minimize_secondary_on_slice(land, loss_land, std::move(res.z), std::move(res.o),
                                      nbar_target);
  }
  SearchCandidate cand;
  cand.zero = std::move(res.z);
  cand.one = std::move(res.o);
  cand.cost = kl_cost(cand.zero, cand.one, error_set);
  cand.nbar = 0.5 * (cand.zero.cwiseAbs2().dot(land.nw) + cand.one.cwiseAbs2().dot(land.nw));
  cand.exact = cand.cost <= kExactCost;
  return cand;
}

void write_num_catalog(const std::string& path, const std::vector<SearchCandidate>& picks,
                       int first_index) {
  std::vector<NumCodeEntry> entries;
  entries.reserve(picks.size());
  for (size_t i = 0; i < picks.size(); ++i) {
    const SearchCandidate& cand = picks[i];
    int top = 0;
    for (int n = 0; n < cand.zero.size(); ++n)
      if (std::max(std::abs(cand.zero(n)), std::abs(cand.one(n))) > 1e-12) top = n;
    NumCodeEntry entry;
    entry.index = first_index + static_cast<int>(i);
    entry.nbar = cand.nbar;
    entry.cost = cand.cost;
    entry.zero = cand.zero.head(top + 1);
    entry.one = cand.one.head(top + 1);
    entries.push_back(std::move(entry));
  }
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  save_num_catalog(path, entries);
}

}  // namespace bosonic
