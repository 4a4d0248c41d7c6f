#include "bosonic/codes.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace bosonic {

Mat CodePair::isometry() const {
  Mat v(dim(), 2);
  v.col(0) = zero;
  v.col(1) = one;
  return v;
}

Mat CodePair::projector() const {
  return zero * zero.adjoint() + one * one.adjoint();
}

namespace {

double log_binom(int n, int k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double mean_occupation(const Vec& a, const Vec& b,
                       const std::function<double(int)>& level) {
  double acc = 0.0;
  for (int i = 0; i < a.size(); ++i) acc += level(i) * (std::norm(a(i)) + std::norm(b(i)));
  return 0.5 * acc;
}

}  // namespace

CodePair make_single_rail() {
  CodePair c;
  c.family = "single_rail";
  c.zero = Vec::Zero(2);
  c.one = Vec::Zero(2);
  c.zero(0) = 1.0;
  c.one(1) = 1.0;
  c.nbar = 0.5;
  return c;
}

double cat_normalization(double alpha, int r, int S) {
  const double x = alpha * alpha;
  const int period = 2 * (S + 1);
  cxd acc = 0.0;
  for (int s = 0; s < period; ++s) {
    const double th = M_PI * s / (S + 1);
    acc += std::polar(1.0, -th * r) * std::exp(-x * (1.0 - std::polar(1.0, th)));
  }
  return (acc / double(period)).real();
}

CodePair make_cat(double alpha, int S, int cutoff) {
  if (alpha < 0.0) throw std::invalid_argument("make_cat: negative alpha");
  if (alpha == 0.0) {
    if (S > 0) throw std::invalid_argument("make_cat: alpha = 0 leaves the odd ket empty for S > 0");
    CodePair c = make_single_rail();
    c.family = "cat";
    c.params.S = 0;
    return c;
  }
  const double x = alpha * alpha;
  const int period = 2 * (S + 1);
  if (cutoff < 0) {
    // Poisson coverage with generous margin, rounded up to whole mod-classes
    int bound = static_cast<int>(std::ceil(x + 12.0 * std::sqrt(x + 1.0) + 30.0));
    Eigen::VectorXd w(bound + 1);
    for (int n = 0; n <= bound; ++n) w(n) = std::exp(-x + n * std::log(x) - log_factorial(n));
    cutoff = cutoff_for_coverage(w, 1e-9);
    cutoff = ((cutoff / period) + 1) * period + period - 1;
  }
  CodePair c;
  c.family = "cat";
  c.params.alpha = alpha;
  c.params.S = S;
  c.zero = Vec::Zero(cutoff + 1);
  c.one = Vec::Zero(cutoff + 1);
  const double logalpha = std::log(alpha);
  for (int n = 0; n <= cutoff; ++n) {
    const double amp = std::exp(-0.5 * x + n * logalpha - 0.5 * log_factorial(n));
    if (n % period == 0) c.zero(n) = amp;
    if (n % period == (S + 1) % period) c.one(n) = amp;
  }
  // exact class weights give the truncation deficit before normalization
  const double n0 = cat_normalization(alpha, 0, S);
  const double n1 = cat_normalization(alpha, S + 1, S);
  const double d0 = 1.0 - c.zero.squaredNorm() / n0;
  const double d1 = 1.0 - c.one.squaredNorm() / n1;
  c.deficit = std::max({d0, d1, 0.0});
  c.zero.normalize();
  c.one.normalize();
  c.nbar = mean_occupation(c.zero, c.one, [](int n) { return double(n); });
  return c;
}

CodePair make_binomial(int N, int S) {
  if (N < 0 || S < 0) throw std::invalid_argument("make_binomial: negative parameter");
  const int top = (S + 1) * (N + 1);
  CodePair c;
  c.family = "bin";
  c.params.N = N;
  c.params.S = S;
  c.zero = Vec::Zero(top + 1);
  c.one = Vec::Zero(top + 1);
  for (int m = 0; m <= N + 1; ++m) {
    const double amp = std::exp(0.5 * (log_binom(N + 1, m) - (N + 1) * std::log(2.0)));
    c.zero((S + 1) * m) = amp;
    c.one((S + 1) * m) = (m % 2 ? -amp : amp);
  }
  c.nbar = 0.5 * (N + 1) * (S + 1);
  return c;
}

CodePair binomial_pm_pair(int N, int S) {
  CodePair bin = make_binomial(N, S);
  CodePair c = bin;
  c.zero = (bin.zero + bin.one) / std::sqrt(2.0);
  c.one = (bin.zero - bin.one) / std::sqrt(2.0);
  return c;
}

std::vector<NumCodeEntry> load_num_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("num catalog not found at '" + path + "'; run code-search first");
  std::vector<NumCodeEntry> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    NumCodeEntry e;
    int cutoff = 0;
    ss >> e.index >> e.nbar >> cutoff >> e.cost;
    e.zero = Vec::Zero(cutoff + 1);
    e.one = Vec::Zero(cutoff + 1);
    for (int n = 0; n <= cutoff; ++n) {
      double re, im;
      ss >> re >> im;
      e.zero(n) = cxd(re, im);
    }
    for (int n = 0; n <= cutoff; ++n) {
      double re, im;
      ss >> re >> im;
      e.one(n) = cxd(re, im);
    }
    if (!ss) throw std::runtime_error("num catalog: malformed line for index " +
                                      std::to_string(e.index));
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_num_catalog(const std::string& path, const std::vector<NumCodeEntry>& entries) {
  std::ofstream out(path);
  out << "# numerically-optimized codes: index nbar cutoff cost re/im pairs of ket0 then ket1\n";
  out.precision(17);
  for (const NumCodeEntry& e : entries) {
    out << e.index << ' ' << e.nbar << ' ' << e.zero.size() - 1 << ' ' << e.cost;
    for (const Vec* v : {&e.zero, &e.one})
      for (int n = 0; n < v->size(); ++n) out << ' ' << (*v)(n).real() << ' ' << (*v)(n).imag();
    out << '\n';
  }
}

CodePair make_num(int index, const std::string& catalog_path) {
  CodePair c;
  c.family = "num";
  c.params.index = index;
  if (index == 0) {
    const double s17 = std::sqrt(17.0);
    c.zero = Vec::Zero(5);
    c.one = Vec::Zero(5);
    c.zero(0) = std::sqrt((7.0 - s17) / 6.0);
    c.zero(3) = std::sqrt((s17 - 1.0) / 6.0);
    c.one(1) = std::sqrt((9.0 - s17) / 6.0);
    c.one(4) = -std::sqrt((s17 - 3.0) / 6.0);
  } else {
    for (const NumCodeEntry& e : load_num_catalog(catalog_path)) {
      if (e.index != index) continue;
      c.zero = e.zero;
      c.one = e.one;
    }
    if (c.zero.size() == 0)
      throw std::runtime_error("num catalog has no entry " + std::to_string(index) +
                               "; run code-search first");
  }
  c.nbar = mean_occupation(c.zero, c.one, [](int n) { return double(n); });
  return c;
}

namespace {

struct LatticePoint {
  cxd beta;   // coherent amplitude
  cxd coeff;  // envelope weight times phase
};

cxd coherent_overlap(cxd b1, cxd b2) {
  return std::exp(-0.5 * std::norm(b1) - 0.5 * std::norm(b2) + std::conj(b1) * b2);
}

struct RawKet {
  Vec amps;           // truncated amplitudes (not normalized)
  double exact_norm2;  // Gram-sum norm of the untruncated superposition
};

RawKet assemble_coherent_sum(const std::vector<LatticePoint>& pts, int cutoff) {
  RawKet r;
  r.amps = Vec::Zero(cutoff + 1);
  for (const LatticePoint& p : pts) r.amps += p.coeff * coherent_state(p.beta, cutoff).amps;
  cxd g = 0.0;
  for (const LatticePoint& pi : pts)
    for (const LatticePoint& pj : pts)
      g += std::conj(pi.coeff) * pj.coeff * coherent_overlap(pi.beta, pj.beta);
  r.exact_norm2 = g.real();
  return r;
}

/* Symmetric (Loewdin) orthogonalization of a normalized, nearly-orthogonal
 * pair: multiplies [u v] by the inverse square root of their Gram matrix. */
void loewdin_pair(Vec& u, Vec& v) {
  Mat S(2, 2);
  S << 1.0, u.dot(v), v.dot(u), 1.0;
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  Mat isqrt = es.eigenvectors() *
              es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
              es.eigenvectors().adjoint();
  Vec u2 = u * isqrt(0, 0) + v * isqrt(1, 0);
  Vec v2 = u * isqrt(0, 1) + v * isqrt(1, 1);
  u = u2;
  v = v2;
}

}  // namespace

CodePair make_gkp(double delta, double lattice_a, bool shifted, GkpRep rep, int cutoff_cap) {
  if (delta <= 0.0 || delta > 1.0) throw std::invalid_argument("make_gkp: delta outside (0,1]");
  if (lattice_a < 1.0 || lattice_a > 2.0)
    throw std::invalid_argument("make_gkp: lattice aspect outside [1,2]");
  if (rep == GkpRep::squeezed && (shifted || lattice_a != 2.0))
    throw std::invalid_argument("make_gkp: the squeezed comb is defined for the square lattice");
  const int L = static_cast<int>(std::floor(4.0 / delta));
  const double d2 = delta * delta;

  Vec kets[2];
  double deficits[2] = {0.0, 0.0};
  int coverage_cut = 0;

  if (rep == GkpRep::squeezed) {
    // one-dimensional comb of position-squeezed peaks
    const double r = -std::log(delta);
    Mat S = squeezing_operator(r, cutoff_cap);
    Vec sq = S.col(0);
    for (int mu = 0; mu < 2; ++mu) {
      std::vector<double> qs, ws;
      for (int n1 = -L; n1 <= L; ++n1) {
        const double q = 2.0 * n1 + mu;
        const double w = std::exp(-0.5 * M_PI * d2 * q * q);
        if (w < 1e-14) continue;
        qs.push_back(std::sqrt(0.5 * M_PI) * q);
        ws.push_back(w);
      }
      Vec amps = Vec::Zero(cutoff_cap + 1);
      for (size_t i = 0; i < qs.size(); ++i)
        amps += ws[i] * (displacement_operator(qs[i], cutoff_cap) * sq);
      // displacing along the squeezed quadrature: overlap exp(-dq^2/(2 delta^2))
      double g = 0.0;
      for (size_t i = 0; i < qs.size(); ++i)
        for (size_t j = 0; j < qs.size(); ++j) {
          const double dq = qs[j] - qs[i];
          g += ws[i] * ws[j] * std::exp(-0.5 * dq * dq / d2);
        }
      deficits[mu] = 1.0 - amps.squaredNorm() / g;
      kets[mu] = amps / std::sqrt(g);
    }
  } else {
    /* General-aspect lattice: centers (sqrt(pi a)/2)(2n1+mu + i 2n2/a), phase
     * e^{-i pi n2 (2n1+mu)/2}, plus a (-1)^{mu n1} sign when shifted.  At a=2
     * the unshifted family is exactly the square-lattice display.  The two
     * envelopes agree to O(delta^4): `coherent` weights the centers directly,
     * `smeared` is exactly lambda^nhat applied to the ideal state, which also
     * shrinks each center by lambda. */
    const double lam = (2.0 - d2) / (2.0 + d2);
    for (int mu = 0; mu < 2; ++mu) {
      std::vector<LatticePoint> pts;
      for (int n1 = -L; n1 <= L; ++n1) {
        for (int n2 = -L; n2 <= L; ++n2) {
          LatticePoint p;
          const double q = 2.0 * n1 + mu;
          const cxd center = 0.5 * std::sqrt(M_PI * lattice_a) * cxd(q, 2.0 * n2 / lattice_a);
          double w;
          if (rep == GkpRep::coherent) {
            w = std::exp(-d2 * std::norm(center));
            p.beta = center;
          } else {
            w = std::exp(-0.5 * (1.0 - lam * lam) * std::norm(center));
            p.beta = lam * center;
          }
          double sign = 1.0;
          if (shifted && (mu * n1) % 2) sign = -1.0;
          p.coeff = w * sign * std::polar(1.0, -0.5 * M_PI * n2 * q);
          if (std::abs(p.coeff) < 1e-14) continue;
          pts.push_back(p);
        }
      }
      RawKet raw = assemble_coherent_sum(pts, cutoff_cap);
      deficits[mu] = 1.0 - raw.amps.squaredNorm() / raw.exact_norm2;
      kets[mu] = raw.amps / std::sqrt(raw.exact_norm2);
    }
  }

  const double worst = std::max(deficits[0], deficits[1]);
  if (worst > 1e-5) {
    std::ostringstream msg;
    msg << "make_gkp: delta=" << delta << " needs cutoff beyond the cap " << cutoff_cap
        << " (weight deficit " << worst << " at the cap)";
    throw std::runtime_error(msg.str());
  }
  // shared truncation point: keep all but 1e-5 of each ket's exact weight,
  // counting what the cap already discarded
  for (int mu = 0; mu < 2; ++mu) {
    Eigen::VectorXd w = kets[mu].cwiseAbs2();
    const double budget = std::max(1e-5 - deficits[mu], 1e-12);
    int c = cutoff_for_coverage(w, budget / w.sum());
    coverage_cut = std::max(coverage_cut, c);
  }
  CodePair c;
  c.family = (!shifted && lattice_a == 2.0) ? "gkps" : "gkp";
  c.params.delta = delta;
  c.params.lattice_a = lattice_a;
  c.params.shifted = shifted;
  c.zero = kets[0].head(coverage_cut + 1);
  c.one = kets[1].head(coverage_cut + 1);
  c.deficit = std::max({1.0 - c.zero.squaredNorm(), 1.0 - c.one.squaredNorm(), 0.0});
  c.zero.normalize();
  c.one.normalize();
  loewdin_pair(c.zero, c.one);
  c.nbar = mean_occupation(c.zero, c.one, [](int n) { return double(n); });

  /* Lattice translations that fix both ideal kets: one column step (with a
   * diagonal kick and sign when shifted) and two row steps.  At a=2 these
   * are the usual sqrt(2 pi) square-lattice pair. */
  const int fc = coverage_cut;
  Mat Sx, Sp;
  if (!shifted) {
    Sx = displacement_operator(std::sqrt(M_PI * lattice_a), fc);
  } else {
    Sx = -displacement_operator(std::sqrt(M_PI * lattice_a) * cxd(1.0, 1.0 / lattice_a), fc);
  }
  Sp = displacement_operator(cxd(0.0, 2.0 * std::sqrt(M_PI / lattice_a)), fc);
  c.stab_x = 0.5 * ((c.zero.adjoint() * Sx * c.zero)(0) + (c.one.adjoint() * Sx * c.one)(0)).real();
  c.stab_p = 0.5 * ((c.zero.adjoint() * Sp * c.zero)(0) + (c.one.adjoint() * Sp * c.one)(0)).real();
  return c;
}

CodePair make_leung() {
  CodePair c;
  c.family = "leung";
  c.zero = Vec::Zero(16);
  c.one = Vec::Zero(16);
  // (|00>+|11>)/sqrt2 squared, basis index = bit string q1 q2 q3 q4
  for (int a : {0, 3})
    for (int b : {0, 3}) {
      c.zero(a * 4 + b) = 0.5;
      c.one(a * 4 + b) = ((a ? 1 : 0) + (b ? 1 : 0)) % 2 ? -0.5 : 0.5;
    }
  c.nbar = mean_occupation(c.zero, c.one, [](int i) { return double(__builtin_popcount(i)); });
  return c;
}

CodePair make_perm(int M, int twoJ, int S) {
  if ((S + 1) * twoJ > M)
    throw std::invalid_argument("make_perm: M too small for the spaced Dicke weights");
  CodePair c;
  c.family = "perm";
  c.params.M = M;
  c.params.N = twoJ - 1;  // matches the bin(N = 2J-1, S) limit
  c.params.S = S;
  c.zero = Vec::Zero(M + 1);
  c.one = Vec::Zero(M + 1);
  for (int m = 0; m <= twoJ; ++m) {
    const double amp = std::exp(0.5 * (log_binom(twoJ, m) - twoJ * std::log(2.0)));
    c.zero((S + 1) * m) = amp;
    c.one((S + 1) * m) = (m % 2 ? -amp : amp);
  }
  c.nbar = mean_occupation(c.zero, c.one, [](int w) { return double(w); });
  return c;
}

CodePair make_two_mode_binomial(int N, int S) {
  const int T = (S + 1) * (N + 1);
  CodePair bin = make_binomial(N, S);
  CodePair c;
  c.family = "bin2";
  c.params.N = N;
  c.params.S = S;
  c.zero = Vec::Zero((T + 1) * (T + 1));
  c.one = Vec::Zero((T + 1) * (T + 1));
  for (int m = 0; m <= N + 1; ++m) {
    const int n1 = (S + 1) * (N + 1 - m), n2 = (S + 1) * m;
    c.zero(n1 * (T + 1) + n2) = bin.zero((S + 1) * m);
    c.one(n1 * (T + 1) + n2) = bin.one((S + 1) * m);
  }
  c.nbar = double(T);  // every component carries exactly T photons in total
  return c;
}

QuditCode make_qudit_binomial(int d, int N, int S) {
  if (d < 2) throw std::invalid_argument("make_qudit_binomial: d < 2");
  QuditCode q;
  q.d = d;
  q.N = N;
  q.S = S;
  const int mmax = (d - 1) * (N + 1);
  const double total = std::pow(double(d), N + 1);
  q.kets.resize(d);
  double nb = 0.0;
  for (int mu = 0; mu < d; ++mu) {
    Vec ket = Vec::Zero((S + 1) * mmax + 1);
    for (int m = 0; m <= mmax; ++m) {
      const double w = std::sqrt(double(extended_binomial(N + 1, m, d)) / total);
      ket((S + 1) * m) = std::polar(w, 2.0 * M_PI * mu * m / d);
      nb += (S + 1) * m * w * w / d;
    }
    q.kets[mu] = ket;
  }
  q.nbar = nb;
  return q;
}

long long extended_binomial(int N_plus_1, int m, int d) {
  if (m < 0 || m > (d - 1) * N_plus_1) return 0;
  std::vector<long long> poly{1};
  for (int rep = 0; rep < N_plus_1; ++rep) {
    std::vector<long long> next(poly.size() + d - 1, 0);
    for (size_t i = 0; i < poly.size(); ++i)
      for (int j = 0; j < d; ++j) next[i + j] += poly[i];
    poly = std::move(next);
  }
  return poly[m];
}

Vec extended_binomial_state(int d, int N_plus_1, int m) {
  long long dim = 1;
  for (int i = 0; i < N_plus_1; ++i) {
    dim *= d;
    if (dim > (1 << 20)) throw std::invalid_argument("extended_binomial_state: space too large");
  }
  Vec v = Vec::Zero(dim);
  long long count = extended_binomial(N_plus_1, m, d);
  if (count == 0) return v;
  const double amp = 1.0 / std::sqrt(double(count));
  for (long long idx = 0; idx < dim; ++idx) {
    int sum = 0;
    long long rest = idx;
    for (int site = 0; site < N_plus_1; ++site) {
      sum += rest % d;
      rest /= d;
    }
    if (sum == m) v(idx) = amp;
  }
  return v;
}

std::vector<int> frame_rows(const SpinFrame& f) {
  std::vector<int> rows(f.twoJ + 1);
  for (int m = 0; m <= f.twoJ; ++m) {
    switch (f.map) {
      case SpinFrame::Map::spin:
        rows[m] = m;
        break;
      case SpinFrame::Map::fock_spaced:
      case SpinFrame::Map::dicke:
        rows[m] = (f.S + 1) * m;
        break;
      case SpinFrame::Map::two_mode: {
        const int T = (f.S + 1) * f.twoJ;
        rows[m] = (f.S + 1) * (f.twoJ - m) * (T + 1) + (f.S + 1) * m;
        break;
      }
    }
  }
  return rows;
}

int frame_host_dim(const SpinFrame& f) {
  switch (f.map) {
    case SpinFrame::Map::spin:
      return f.twoJ + 1;
    case SpinFrame::Map::fock_spaced:
      return (f.S + 1) * f.twoJ + 1;
    case SpinFrame::Map::dicke:
      if ((f.S + 1) * f.twoJ > f.M)
        throw std::invalid_argument("frame_host_dim: M below 2J(S+1)");
      return f.M + 1;
    case SpinFrame::Map::two_mode: {
      const int T = (f.S + 1) * f.twoJ;
      return (T + 1) * (T + 1);
    }
  }
  return 0;
}

FockVector spin_coherent(double theta, double phi, const SpinFrame& f) {
  const int Np1 = f.twoJ / (f.d - 1);
  if (Np1 * (f.d - 1) != f.twoJ)
    throw std::invalid_argument("spin_coherent: 2J not divisible by d-1");
  const double half = (f.d - 1.0) / f.d * theta;
  std::vector<int> rows = frame_rows(f);
  FockVector out;
  out.amps = Vec::Zero(frame_host_dim(f));
  const double c = std::cos(half), s = std::sin(half);
  if (std::abs(c) < 1e-300) {
    out.amps(rows[f.twoJ]) = 1.0;
    return out;
  }
  const double logt = std::log(std::abs(s)) - std::log(std::abs(c));
  // log-magnitudes, normalized after subtracting the peak to avoid overflow
  Eigen::VectorXd logmag(f.twoJ + 1);
  for (int m = 0; m <= f.twoJ; ++m)
    logmag(m) = m * logt + 0.5 * std::log(double(extended_binomial(Np1, m, f.d)));
  const double peak = logmag.maxCoeff();
  double norm2 = 0.0;
  for (int m = 0; m <= f.twoJ; ++m) norm2 += std::exp(2.0 * (logmag(m) - peak));
  const double lognorm = peak + 0.5 * std::log(norm2);
  for (int m = 0; m <= f.twoJ; ++m) {
    double sign = (s < 0 && m % 2) ? -1.0 : 1.0;  // tan sign tracked per power
    if (c < 0 && (f.twoJ - m) % 2) sign = -sign;
    out.amps(rows[m]) = sign * std::exp(logmag(m) - lognorm) * std::polar(1.0, phi * m);
  }
  return out;
}

Mat spin_jx(int twoJ) {
  const double J = 0.5 * twoJ;
  Mat jp = Mat::Zero(twoJ + 1, twoJ + 1);
  for (int m = 0; m + 1 <= twoJ; ++m) {
    const double mu = m - J;
    jp(m + 1, m) = std::sqrt((J - mu) * (J + mu + 1.0));
  }
  return 0.5 * (jp + jp.adjoint());
}

Mat spin_jz(int twoJ) {
  Mat jz = Mat::Zero(twoJ + 1, twoJ + 1);
  for (int m = 0; m <= twoJ; ++m) jz(m, m) = m - 0.5 * twoJ;
  return jz;
}

namespace {

Mat inject_operator(const Mat& op, const std::vector<int>& rows, int host_dim) {
  Mat out = Mat::Zero(host_dim, host_dim);
  for (int i = 0; i < op.rows(); ++i)
    for (int j = 0; j < op.cols(); ++j) out(rows[i], rows[j]) = op(i, j);
  return out;
}

Mat phase_check(int dim, int Splus1, const std::function<int(int)>& level) {
  Mat C = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) C(i, i) = std::polar(1.0, 2.0 * M_PI * level(i) / Splus1);
  return C;
}

}  // namespace

CheckOperators check_operators(const CodePair& pair) {
  CheckOperators ops;
  const int dim = pair.dim();
  const int Sp1 = pair.params.S + 1;
  if (pair.family == "cat") {
    ops.C = phase_check(dim, Sp1, [](int n) { return n; });
    return ops;
  }
  SpinFrame f;
  f.S = pair.params.S;
  if (pair.family == "bin") {
    f.map = SpinFrame::Map::fock_spaced;
    f.twoJ = pair.params.N + 1;
    ops.C = phase_check(dim, Sp1, [](int n) { return n; });
  } else if (pair.family == "perm") {
    f.map = SpinFrame::Map::dicke;
    f.twoJ = pair.params.N + 1;
    f.M = pair.params.M;
    ops.C = phase_check(dim, Sp1, [](int w) { return w; });
  } else if (pair.family == "bin2") {
    f.map = SpinFrame::Map::two_mode;
    f.twoJ = pair.params.N + 1;
    const int T = Sp1 * f.twoJ;
    ops.C = phase_check(dim, Sp1, [T](int idx) { return idx % (T + 1); });
  } else {
    throw std::invalid_argument("check_operators: unsupported family " + pair.family);
  }
  const double J = 0.5 * f.twoJ;
  Mat jx = inject_operator(spin_jx(f.twoJ) / J, frame_rows(f), dim);
  ops.logical_z = jx;
  ops.logical_z_sq = jx * jx;
  return ops;
}

Mat qudit_check_operator(int d, int N) {
  const int Np1 = N + 1;
  long long dim = 1;
  for (int i = 0; i < Np1; ++i) {
    dim *= d;
    if (dim > (1 << 20)) throw std::invalid_argument("qudit_check_operator: space too large");
  }
  const int block = (d - 1) * Np1 + 1;
  Mat basis(dim, block);
  for (int m = 0; m < block; ++m) basis.col(m) = extended_binomial_state(d, Np1, m);
  // site-averaged cyclic shift, applied column-wise: X = sum_v |v><v+1| at
  // one site sends amplitude from the index with that digit raised by one
  Mat image = Mat::Zero(dim, block);
  long long stride = 1;
  for (int site = 0; site < Np1; ++site) {
    for (long long idx = 0; idx < dim; ++idx) {
      const int digit = static_cast<int>((idx / stride) % d);
      const long long src = idx + (((digit + 1) % d) - digit) * stride;
      image.row(idx) += basis.row(src);
    }
    stride *= d;
  }
  return basis.adjoint() * image / double(Np1);
}

}  // namespace bosonic
