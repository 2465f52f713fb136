#pragma once

// Randomized verification suites. Each suite draws its instances from a
// seed, runs one family of checks and returns summary records with a
// PASS/FAIL verdict; `cmd_verify` and the acceptance binary both call these.

#include <cstdint>
#include <vector>

#include "orbit/gmm_hmm.hpp"
#include "orbit/verify.hpp"

namespace orbit {

/// Analytic orbit gradient against central differences with yhat frozen.
/// PASS when the largest relative error is below `tolerance`.
CheckRecord gradient_check_suite(int draws, double h, double max_abs_margin, double tolerance,
                                 std::uint64_t seed);

/// ORBIT_SIMPLIFIED under 0-1 cost and lambda = 0 against PERCEPTRON, step by
/// step, requiring bit-identical weights.
CheckRecord perceptron_equivalence_suite(int steps, std::uint64_t seed);

/// Gap |orbit(alpha w) - cost| over growing alpha on strictly negative margin
/// instances, plus the exact cost / 2 value at zero margin.
CheckRecord orbit_limit_suite(int instances, double tolerance, std::uint64_t seed);

/// Probit-vs-orbit bound and the changed-label probability bound on random
/// 3-class instances meeting the margin precondition. Returns one record per
/// check per instance followed by two summary records.
std::vector<CheckRecord> lemma2_suite(int instances, const BoundCheckConfig& cfg);

/// Monte-Carlo probit loss on 2-label tasks against the closed form
/// Q(margin) * cost when the target is the prediction.
CheckRecord binary_probit_suite(int seeds, int samples, double allowance, std::uint64_t seed);

/// Alignment DP (plain and cost-augmented) against enumeration, T <= 8, K <= 4.
CheckRecord alignment_oracle_suite(int instances, std::uint64_t seed);

/// Vowel pair search (plain and cost-augmented) against enumeration.
CheckRecord vowel_oracle_suite(int instances, std::uint64_t seed);

/// Viterbi against enumeration of all S^T sequences, S <= 4, T <= 6.
CheckRecord viterbi_oracle_suite(int instances, std::uint64_t seed);

/// Phi round trip, quadratic-form identity and dD/dPhi against finite
/// differences.
CheckRecord gmm_identity_suite(int draws, int gradient_models, std::uint64_t seed);

// Random model builders shared with the tests.
HmmParams random_hmm(int num_states, Rng& rng);
Eigen::MatrixXd random_spd(int p, Rng& rng);
GmmStateModel random_gmm(int num_states, int num_components, int frame_dim, Rng& rng);

}  // namespace orbit
