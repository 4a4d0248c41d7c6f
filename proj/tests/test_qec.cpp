#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "bosonic/qec.hpp"

#include <cmath>
#include <sstream>

#include "doctest.h"

using namespace bosonic;

namespace {

// rebuild a block from its real coefficients over {P, X, Y, Z} with the
// antisymmetric Y = |1><0| - |0><1|
Eigen::Matrix2cd rebuild(const QecMatrix& m, int l, int lp) {
  const double c = m.c(l, lp), x = m.x(l, lp), y = m.y(l, lp), z = m.z(l, lp);
  Eigen::Matrix2cd b;
  b << c + z, x - y, x + y, c - z;
  return b;
}

double fit_z00_slope(const CodePair& pair, const std::vector<double>& gammas) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(gammas.size());
  for (double gamma : gammas) {
    const QecMatrix m = qec_matrix(pair, gamma, 0);
    const double u = (1.0 - gamma) / gamma;
    const double y = std::log(std::abs(m.z(0, 0)));
    sx += u;
    sy += y;
    sxx += u * u;
    sxy += u * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("loss overlap matrices are Hermitian, positive, and normalized") {
  std::vector<CodePair> corpus;
  corpus.push_back(make_cat(1.5, 1));
  corpus.push_back(make_cat(2.0, 2));
  corpus.push_back(binomial_pm_pair(2, 1));
  corpus.push_back(binomial_pm_pair(1, 3));
  corpus.push_back(make_gkp(0.3));
  corpus.push_back(make_gkp(0.3, 1.725, true));
  corpus.push_back(make_num(0));
  corpus.push_back(make_single_rail());

  for (const CodePair& pair : corpus) {
    for (double gamma : {0.12, 0.3}) {
      const QecMatrix m = qec_matrix(pair, gamma);
      CAPTURE(pair.family);
      CAPTURE(gamma);

      const Mat f = m.full();
      CHECK((f - f.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(m.min_eigenvalue >= -1e-9);
      CHECK(m.imag_residual < 1e-10);

      // diagonal weights are the captured loss-count distribution
      double csum = 0.0;
      for (int l = 0; l <= m.L; ++l) {
        CHECK(m.c(l, l) >= -1e-10);
        csum += m.c(l, l);
      }
      CHECK(std::abs(csum + m.mass_beyond_L - 1.0) < 1e-10);
      CHECK(m.mass_beyond_L <= 1e-4 + 1e-12);  // default L covers 99.99%

      // real-coefficient reconstruction is exact for these real codes
      for (int l = 0; l <= m.L; ++l)
        for (int lp = 0; lp <= m.L; ++lp)
          CHECK((rebuild(m, l, lp) - Eigen::Matrix2cd(m.block(l, lp))).cwiseAbs().maxCoeff() <
                1e-12);

      // entrywise bound implied by positivity
      for (int i = 0; i < f.rows(); ++i)
        for (int j = 0; j < f.cols(); ++j)
          CHECK(std::norm(f(i, j)) <= f(i, i).real() * f(j, j).real() + 1e-9);
    }
  }

  // truncation flag reflects the pair's recorded tail weight
  CHECK_FALSE(qec_matrix(corpus[0], 0.1).cutoff_starved);  // cat builds to 1e-9
  CHECK(qec_matrix(make_gkp(0.3), 0.1).cutoff_starved);    // grid pairs stop at 1e-5

  // no loss: the single block is exactly the logical identity
  {
    const QecMatrix m0 = qec_matrix(make_cat(2.0, 1), 0.0);
    CHECK(m0.L == 0);
    CHECK(m0.c(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(m0.x(0, 0)) < 1e-14);
    CHECK(std::abs(m0.z(0, 0)) < 1e-14);
    CHECK(m0.min_eigenvalue == doctest::Approx(1.0).epsilon(1e-10));
  }

  // the default order is the smallest one covering 99.99% of the loss mass
  {
    const CodePair cat = make_cat(2.0, 1);
    const QecMatrix md = qec_matrix(cat, 0.1);
    CHECK(md.L == 4);
    CHECK(md.mass_beyond_L <= 1e-4);
    CHECK(qec_matrix(cat, 0.1, md.L - 1).mass_beyond_L > 1e-4);
  }

  // single loss on a spaced cat lands in an orthogonal Fock class
  {
    const QecMatrix m = qec_matrix(make_cat(2.0, 1), 0.2, 2);
    CHECK(Eigen::Matrix2cd(m.block(0, 1)).cwiseAbs().maxCoeff() < 1e-14);
  }

  // CSV export: header plus one row per (l, lp, component)
  {
    const QecMatrix m = qec_matrix(make_cat(1.5, 1), 0.1, 2);
    std::ostringstream out;
    write_qec_csv(m, out);
    int rows = 0;
    std::string line;
    std::istringstream in(out.str());
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    CHECK(rows == 1 + 4 * (m.L + 1) * (m.L + 1));
    CHECK(out.str().rfind("l,lp,component,value", 0) == 0);
  }
}

TEST_CASE("cat closed forms match the numeric path") {
  // diagonal blocks and the first cross-class block, over a parameter grid
  for (double alpha : {1.2, 2.0, 3.0})
    for (int S : {1, 2, 3})
      for (double gamma : {0.05, 0.2, 0.3}) {
        CAPTURE(alpha);
        CAPTURE(S);
        CAPTURE(gamma);
        const CodePair cat = make_cat(alpha, S);
        const QecMatrix m = qec_matrix(cat, gamma, S + 2);
        for (int l = 0; l <= S + 1; ++l) {
          const CatAnalytic a = cat_analytic_block(alpha, S, gamma, l);
          CHECK(std::abs(a.c - m.c(l, l)) < 1e-8);
          CHECK(std::abs(a.z - m.z(l, l)) < 1e-8);
        }
        const CatAnalytic a = cat_analytic_block(alpha, S, gamma, 0);
        CHECK((a.eps_first - Eigen::Matrix2cd(m.block(0, S + 1))).cwiseAbs().maxCoeff() < 1e-8);
      }

  // large alpha: the loss-count distribution becomes Poisson
  {
    const double alpha = 5.0, gamma = 0.05, ga2 = gamma * alpha * alpha;
    const QecMatrix m = qec_matrix(make_cat(alpha, 1), gamma, 4);
    for (int l = 0; l <= 3; ++l) {
      const double pois = std::exp(l * std::log(ga2) - ga2 - log_factorial(l));
      CHECK(std::abs(m.c(l, l) - pois) / pois < 1e-9);
    }
  }

  // the cross-class bit flip saturates its positivity bound as alpha grows
  {
    auto ratio = [](double alpha) {
      const CatAnalytic a0 = cat_analytic_block(alpha, 1, 0.05, 0);
      const CatAnalytic a2 = cat_analytic_block(alpha, 1, 0.05, 2);
      return a0.x_first / std::sqrt(a0.c * a2.c);
    };
    const double r2 = ratio(2.0), r3 = ratio(3.0), r4 = ratio(4.0);
    CHECK(r2 < r3);
    CHECK(r3 < r4);
    CHECK(r4 <= 1.0 + 1e-9);
    CHECK(std::abs(r4 - 1.0) < 1e-6);
    CHECK(r2 > 0.999);
    // and the numeric blocks respect the same bound
    for (double alpha : {2.0, 3.0}) {
      const QecMatrix m = qec_matrix(make_cat(alpha, 1), 0.05, 2);
      CHECK(std::abs(m.x(0, 2)) <= std::sqrt(m.c(0, 0) * m.c(2, 2)) + 1e-9);
    }
  }

  // backaction sweet spots: the ket occupation imbalance crosses zero
  {
    CHECK(std::abs(cat_analytic_block(1.538, 1, 0.1, 0).dnbar) < 1e-3);
    CHECK(cat_analytic_block(1.50, 1, 0.1, 0).dnbar * cat_analytic_block(1.60, 1, 0.1, 0).dnbar <
          0.0);
    CHECK(std::abs(cat_analytic_block(1.737, 2, 0.1, 0).dnbar) < 1e-3);
    CHECK(cat_analytic_block(1.60, 2, 0.1, 0).dnbar * cat_analytic_block(1.85, 2, 0.1, 0).dnbar <
          0.0);
  }
}

TEST_CASE("binomial closed forms match the numeric path") {
  for (int N = 1; N <= 4; ++N)
    for (int S = 1; S <= 4; ++S)
      for (double gamma : {0.05, 0.2, 0.3}) {
        CAPTURE(N);
        CAPTURE(S);
        CAPTURE(gamma);
        const CodePair pm = binomial_pm_pair(N, S);
        const int L = std::min(N + 1, 4);
        const QecMatrix m = qec_matrix(pm, gamma, L);
        for (int l = 0; l <= L; ++l) {
          const BinAnalytic b = binomial_analytic_block(N, S, gamma, l);
          CHECK(std::abs(b.c - m.c(l, l)) < 1e-10);
          CHECK(std::abs(b.z - m.z(l, l)) < 1e-10);
        }
      }
  // larger codes, one damping value
  for (int N : {5, 6})
    for (int S : {5, 6}) {
      const CodePair pm = binomial_pm_pair(N, S);
      const QecMatrix m = qec_matrix(pm, 0.2, 3);
      for (int l = 0; l <= 3; ++l) {
        const BinAnalytic b = binomial_analytic_block(N, S, 0.2, l);
        CHECK(std::abs(b.c - m.c(l, l)) < 1e-10);
        CHECK(std::abs(b.z - m.z(l, l)) < 1e-10);
      }
    }

  // no-loss distortion follows the closed form ((1-(1-g)^{S+1})/2)^{N+1},
  // so it vanishes at rate gamma^{N+1} and shrinks monotonically with N
  for (int N : {1, 2})
    for (int S : {1, 3}) {
      const double r3 = binomial_analytic_block(N, S, 1e-3, 0).z / std::pow(1e-3, N + 1);
      const double r4 = binomial_analytic_block(N, S, 1e-4, 0).z / std::pow(1e-4, N + 1);
      CHECK(std::abs(r3 / r4 - 1.0) < 0.01);
    }
  for (int N = 1; N <= 4; ++N) {
    const double closed =
        std::pow((1.0 - std::pow(1.0 - 0.095, 4)) / 2.0, N + 1);
    CHECK(binomial_analytic_block(N, 3, 0.095, 0).z == doctest::Approx(closed).epsilon(1e-12));
    if (N > 1)
      CHECK(binomial_analytic_block(N, 3, 0.095, 0).z <
            binomial_analytic_block(N - 1, 3, 0.095, 0).z);
  }

  // losses up to the spacing stay perfectly detectable
  {
    const QecMatrix m = qec_matrix(binomial_pm_pair(2, 3), 0.2, 4);
    for (int l = 1; l <= 3; ++l)
      CHECK(Eigen::Matrix2cd(m.block(0, l)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("grid-code lattice sums follow the thermal law") {
  const CodePair g = make_gkp(0.2);

  // loss-count weights are asymptotically thermal with mean gamma*nbar
  {
    const QecMatrix m = qec_matrix(g, 0.1, 6);
    for (int l = 0; l <= 4; ++l) {
      const GkpAnalytic a = gkp_analytic_block(0.2, 0.1, l, l);
      CHECK(std::abs(m.c(l, l) - a.c_thermal) / a.c_thermal < 0.10);
      // the lattice sum itself reproduces the thermal weight on the diagonal
      const double block_c = 0.5 * (a.block(0, 0) + a.block(1, 1)).real();
      CHECK(std::abs(block_c - a.c_thermal) / a.c_thermal < 0.01);
      CHECK(a.asymptotic_ok);  // gamma*nbar = 1.2
    }
    CHECK_FALSE(gkp_analytic_block(0.2, 0.01, 0, 0).asymptotic_ok);
  }

  // lattice-sum blocks: Hermitian pairing, parity selection, radius stability
  {
    const GkpAnalytic h12 = gkp_analytic_block(0.2, 0.1, 1, 2);
    const GkpAnalytic h21 = gkp_analytic_block(0.2, 0.1, 2, 1);
    CHECK((h12.block - h21.block.adjoint()).cwiseAbs().maxCoeff() < 1e-15);

    CHECK(gkp_analytic_block(0.2, 0.1, 0, 1).block.cwiseAbs().maxCoeff() < 1e-15);

    const GkpAnalytic a3 = gkp_analytic_block(0.2, 0.1, 0, 0, 3);
    const GkpAnalytic a6 = gkp_analytic_block(0.2, 0.1, 0, 0, 6);
    CHECK(a3.radius_used <= 12);
    CHECK((a3.block - a6.block).cwiseAbs().maxCoeff() / a6.block.cwiseAbs().maxCoeff() < 1e-9);
  }

  // square-lattice parity: numeric odd-distance blocks vanish identically,
  // and the smeared code's self-duality forces x00 = z00 exactly
  {
    const QecMatrix m = qec_matrix(g, 0.1, 3);
    for (int l = 0; l <= 2; ++l)
      CHECK(Eigen::Matrix2cd(m.block(l, l + 1)).cwiseAbs().maxCoeff() < 1e-12);
    const QecMatrix m15 = qec_matrix(g, 0.15, 0);
    CHECK(std::abs(m15.x(0, 0) - m15.z(0, 0)) < 1e-12);
  }
  {
    const CodePair shifted = make_gkp(0.2, 1.725, true);
    const QecMatrix m = qec_matrix(shifted, 0.1, 3);
    double odd = 0.0;
    for (int l = 0; l <= 2; ++l)
      odd = std::max(odd, Eigen::Matrix2cd(m.block(l, l + 1)).cwiseAbs().maxCoeff());
    CHECK(odd > 1e-4);  // shifting the lattice removes the parity selection
  }

  /* No-loss distortion decay, measured: fitting log|z00| against
   * u = (1-gamma)/gamma over gamma in [0.08, 0.25] gives a slope that
   * steepens as the envelope narrows (the displaced-vacuum overlap factor
   * contributes its own 1/gamma exponent, while finite width regulates it):
   * -0.542 at delta = 0.20 and -0.783 at delta = 0.15, crossing -pi/4 near
   * delta = 0.15 on this window.  Both values are pinned as regressions. */
  {
    const std::vector<double> gammas = {0.08, 0.10, 0.12, 0.15, 0.18, 0.21, 0.25};
    const double s20 = fit_z00_slope(g, gammas);
    CHECK(s20 > -0.57);
    CHECK(s20 < -0.51);
    const CodePair g15 = make_gkp(0.15, 2.0, false, GkpRep::smeared, 420);
    const double s15 = fit_z00_slope(g15, gammas);
    CHECK(s15 > -0.82);
    CHECK(s15 < -0.75);
    CHECK(s15 < s20);  // narrower envelope, steeper suppression

    // z00 grows monotonically with the loss rate
    double prev = 0.0;
    for (double gamma : gammas) {
      const double z = qec_matrix(g, gamma, 0).z(0, 0);
      CHECK(z > prev);
      prev = z;
    }

    // nearest-neighbor estimate: right scale at the top of the window,
    // where gamma*nbar = 3 approaches the asymptotic regime
    const double znum = qec_matrix(g, 0.25, 0).z(0, 0);
    const GkpAnalytic a = gkp_analytic_block(0.2, 0.25, 0, 0);
    CHECK(a.z_estimate > 0.0);
    CHECK(a.z_estimate < znum);
    CHECK(znum < 6.0 * a.z_estimate);
  }

  // displaced-comb overlap: unity at zero displacement as the width shrinks,
  // and agreement with the numeric matrix elements of the built pair
  {
    const double d04 = std::abs(gkp_displacement_overlap(0.4, cxd(0, 0), 0, 0) - 1.0);
    const double d03 = std::abs(gkp_displacement_overlap(0.3, cxd(0, 0), 0, 0) - 1.0);
    const double d02 = std::abs(gkp_displacement_overlap(0.2, cxd(0, 0), 0, 0) - 1.0);
    const double d015 = std::abs(gkp_displacement_overlap(0.15, cxd(0, 0), 0, 0) - 1.0);
    CHECK(d04 < 2e-2);
    CHECK(d03 < d04);
    CHECK(d02 < d03);
    CHECK(d015 < 1e-6);

    const Mat V = g.isometry();
    for (double s : {0.3, 0.8, 1.2}) {
      const cxd a(s, 0.45 * s);
      const Mat D = displacement_operator(a, g.dim() - 1);
      const Eigen::Matrix2cd num = V.adjoint() * D * V;
      CHECK(std::abs(gkp_displacement_overlap(0.2, a, 0, 0) - num(0, 0)) < 1e-3);
      CHECK(std::abs(gkp_displacement_overlap(0.2, a, 0, 1) - num(0, 1)) < 1e-3);
    }
  }
}

TEST_CASE("grid-code moments follow the geometric law") {
  {
    const GkpMoment m0 = moments_gkp(0.2, 0);
    CHECK(m0.numeric == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m0.thermal == 1.0);
  }
  {
    const GkpMoment m1 = moments_gkp(0.2, 1);
    CHECK(m1.thermal == doctest::Approx(12.0));
    CHECK(std::abs(m1.numeric / m1.thermal - 1.0) < 0.05);
  }
  CHECK(moments_gkp(0.15, 2).numeric / moments_gkp(0.15, 2).thermal > 0.9);
  CHECK(moments_gkp(0.15, 2).numeric / moments_gkp(0.15, 2).thermal < 1.1);

  // higher moments drift above the geometric prediction but stay close;
  // the measured ratios at delta = 0.2 are 1.0003, 1.042, 1.083, 1.120
  double prev = 0.0;
  for (int l = 1; l <= 4; ++l) {
    const GkpMoment m = moments_gkp(0.2, l);
    const double ratio = m.numeric / m.thermal;
    CHECK(ratio > prev);
    CHECK(ratio > 0.95);
    CHECK(ratio < 1.0 + 0.05 * l);
    prev = ratio;
  }
}

TEST_CASE("error subspaces separate detectable losses") {
  // spaced cat: one loss is exactly detectable, two losses return the code
  // space onto itself
  {
    const CodePair cat = make_cat(2.0, 1);
    const ErrorSubspaceReport r = error_subspace_report(cat, 0.05, 3);
    REQUIRE(r.L == 3);
    for (int l = 0; l <= 3; ++l) CHECK(r.ranks[l] == 2);
    CHECK_FALSE(r.rank_deficient);
    CHECK(r.detection_residuals[1] < 1e-14);
    CHECK(r.detection_residuals[0] > 1e-3);  // backaction distorts the code
    CHECK(r.detection_residuals[0] < 2e-2);
    CHECK(r.angle_max(0, 2) < 1e-6);
    CHECK(r.angle_min(0, 1) > 1.5707);
    CHECK(r.angle_min(0, 3) > 1.5707);
    CHECK(r.angle_min(2, 0) == doctest::Approx(r.angle_min(0, 2)).epsilon(1e-10));
  }

  // balanced binomial: two losses leave a component outside the code space
  {
    const CodePair pm = binomial_pm_pair(1, 1);
    const ErrorSubspaceReport r = error_subspace_report(pm, 0.05, 2);
    CHECK(r.ranks[2] == 2);
    CHECK(r.angle_min(0, 2) < 1e-6);
    CHECK(r.angle_max(0, 2) > 0.5);
    CHECK(r.angle_max(0, 2) < 0.9);
    CHECK(r.angle_min(0, 1) > 1.5707);
  }

  // single-rail: a loss collapses both kets onto vacuum
  {
    const ErrorSubspaceReport r = error_subspace_report(make_single_rail(), 0.1, 1);
    CHECK(r.ranks[0] == 2);
    CHECK(r.ranks[1] == 1);
    CHECK(r.rank_deficient);
  }

  // no loss, no residual
  {
    const ErrorSubspaceReport r = error_subspace_report(make_cat(2.0, 1), 0.0, 0);
    CHECK(r.detection_residuals[0] < 1e-14);
  }
}

TEST_CASE("worst uncorrectable entries reproduce the published ordering") {
  // four codes at nbar ~ 6 under 9.5% loss: the spaced cat leaks the most,
  // the binomial code less, and both grid codes are strongly suppressed
  const CodePair cat = make_cat(std::sqrt(6.0), 3);
  const CodePair bin = binomial_pm_pair(2, 3);
  const CodePair gkp = make_gkp(std::sqrt(1.0 / 13.0));
  const CodePair lat = make_gkp(0.277, 1.732, true);

  CHECK(std::abs(cat.nbar - 6.0) < 0.35);
  CHECK(std::abs(bin.nbar - 6.0) < 1e-9);
  CHECK(std::abs(gkp.nbar - 6.0) < 0.1);
  CHECK(std::abs(lat.nbar - 6.0) < 0.1);

  const QecMatrix mc = qec_matrix(cat, 0.095);
  const QecMatrix mb = qec_matrix(bin, 0.095);
  const QecMatrix mg = qec_matrix(gkp, 0.095);
  const QecMatrix ml = qec_matrix(lat, 0.095);

  for (const QecMatrix* m : {&mc, &mb, &mg, &ml}) {
    CHECK(m->mass_beyond_L <= 1e-4);
    CHECK(m->imag_residual < 1e-10);
    CHECK(m->min_eigenvalue >= -1e-9);
  }

  const double uc = max_uncorrectable(mc);
  const double ub = max_uncorrectable(mb);
  const double ug = max_uncorrectable(mg);
  const double ul = max_uncorrectable(ml);

  CHECK(uc > ub);
  CHECK(ub > ug);
  CHECK(ub > ul);

  // measured magnitudes, pinned loosely
  CHECK(uc > 0.07);
  CHECK(uc < 0.11);
  CHECK(ub > 0.03);
  CHECK(ub < 0.055);
  CHECK(ug > 0.003);
  CHECK(ug < 0.009);
  CHECK(ul > 0.0015);
  CHECK(ul < 0.006);
}
