#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bosonic/codes.hpp"
#include "bosonic/fock.hpp"

namespace bosonic {

enum class SearchOptimizer { nelder_mead, adam_like_gradient, basin_hopping };

/* Codeword-pair search.  Minimizes the correctability violation
 *   c1 = sum_{l,l'} |f_{00ll'} - f_{11ll'}|^2 + |f_{01ll'}|^2,
 *   f_{uv ll'} = <u| e_l^dag e_l' |v>,
 * plus an occupation penalty lambda_nbar * nbar, over two complex unit
 * vectors.  Orthogonality is built in: the second ket is optimized in the
 * orthogonal complement of the first (projection retraction each step), so
 * the cost never needs an explicit <0|1> term. */
struct SearchConfig {
  int nmax = 10;               // Fock cutoff (highest retained index), >= 5
  std::vector<Mat> error_set;  // empty -> {I, a, a^2} at this nmax
  double lambda_nbar = 1e-3;   // weight of the mean-occupation penalty, >= 0
  SearchOptimizer optimizer = SearchOptimizer::basin_hopping;
  int restarts = 32;           // independent starts, run in parallel
  std::uint64_t seed = 1;
  bool real_amplitudes = false;  // restrict both kets to real coefficients
  int max_iterations = 0;        // per-restart descent budget; 0 -> default
};

struct SearchCandidate {
  Vec zero, one;      // orthonormal codewords
  double cost = 0.0;  // violation c1 after refinement (penalty excluded)
  double nbar = 0.0;  // tr(P nhat)/2 of the pair
  bool exact = false;  // cost <= 1e-8
};

struct SearchResult {
  // Deduplicated candidates ranked by (c1, nbar); costs below refinement
  // precision tie, so exact codes order by occupation.
  std::vector<SearchCandidate> candidates;
  std::vector<SearchCandidate> exact;  // subset with cost <= 1e-8 (may be empty)
};

struct CodeCertificate {
  double max_violation = 0.0;  // worst |entry| of the QEC matrix off the form delta_{uv} g_{ll'}
  double nbar = 0.0;
};

// {I, a, ..., a^max_power} on an (nmax+1)-dimensional space.
std::vector<Mat> loss_error_set(int nmax, int max_power = 2);

// Violation c1 of an (assumed orthonormal) pair; no occupation penalty.
double kl_cost(const Vec& zero, const Vec& one, const std::vector<Mat>& error_set);

SearchResult search(const SearchConfig& config);

/* Independent check of a candidate pair: re-orthonormalizes the kets, then
 * recomputes every QEC-matrix block <u|e_l^dag e_l'|v> and reports the
 * largest deviation from the correctability form (off-diagonal blocks zero,
 * diagonal blocks equal), together with the pair's mean occupation. */
CodeCertificate certify(const Vec& zero, const Vec& one, const std::vector<Mat>& error_set);
CodeCertificate certify(const SearchCandidate& cand, const std::vector<Mat>& error_set);

/* Walk an exact candidate along the exact-code variety until its occupation
 * reaches nbar_target (exact codes form continuous families, so intermediate
 * occupations are realizable).  Used to pin catalog entries at reference
 * occupations.  The result stays exact.  When sharpen_loss_gamma > 0, the
 * walk continues along the constant-occupation slice, minimizing the
 * violation of the actual loss Kraus operators at that rate -- on the exact
 * variety this residue is exactly the leading uncorrectable weight, so this
 * picks the best-performing code of the slice rather than an arbitrary one. */
SearchCandidate refine_to_nbar(const SearchCandidate& start, const std::vector<Mat>& error_set,
                               double nbar_target, bool real_amplitudes = false,
                               double sharpen_loss_gamma = 0.0);

/* Store candidates as a num-code catalog for make_num to load.  Entries are
 * indexed from first_index; trailing amplitudes below 1e-12 are trimmed. */
void write_num_catalog(const std::string& path, const std::vector<SearchCandidate>& picks,
                       int first_index = 1);

}  // namespace bosonic
