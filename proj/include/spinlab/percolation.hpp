#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinlab/graph.hpp"
#include "spinlab/model.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

struct ExploreResult {
    long long explored = 0;
    bool infinite_flag = false;   // cap reached
    bool bound_mode_used = false; // some activation fell back to tanh|beta|
};

// Percolation configuration: branching arity d (= Delta-1), bond probability
// p = tanh|beta|, and the process variant.
struct PercolationSpec {
    enum class Variant { Ary, Regular, Saw };
    int d = 2;
    double p = 0.5;
    Variant variant = Variant::Ary;
    const Graph* graph = nullptr;  // Saw variant
    int root = 0;
    double beta = 0.0;

    ExploreResult sample(CounterRng& rng, long long cap) const;
};

// One sample of N^SAW: exploration on the lazily built SAW tree of the Ising
// model at inverse temperature beta, activating each child with its exact
// subtree influence (tree DP when the subtree has <= exact_subtree_cap nodes,
// tanh|beta| upper bound beyond).
ExploreResult explore_saw(const Graph& g, int v, double beta, CounterRng& rng, long long cap,
                          int exact_subtree_cap = 20, std::span<const double> fields = {});

// Exploration on the infinite d-ary (or Delta-regular) tree with activation
// probability p; returns component size or the cap flag.
ExploreResult explore_ary(int d, double p, CounterRng& rng, long long cap);
ExploreResult explore_regular(int delta, double p, CounterRng& rng, long long cap);

// Pr[N^ary_d = ell] = (1/ell) Pr[Bin(d*ell, p) = ell-1], computed in log space.
double ary_percolation_log_pmf(int d, double p, long long ell);
double ary_percolation_pmf(int d, double p, long long ell);

// Sum of the pmf over ell >= 1: partial sum to `terms` plus an Euler-Maclaurin
// estimate of the local-CLT tail c * ell^{-3/2}; the estimate's error is
// O(terms^{-3/2}), far below 1e-6 at the default.
double ary_pmf_total_mass(int d, double p, long long terms = 1'000'000);

// Least-squares slope of log pmf vs log ell over [lo, hi] (log-spaced points).
double ary_pmf_tail_exponent(int d, double p, long long lo, long long hi, int points = 60);

// Smallest non-negative root of G(z) = z with G(z) = (1 - p + p z)^d.
double extinction_probability(int d, double p);

struct McEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long long trials = 0;
};

// Monte-Carlo mean of min{N^SAW, n} (the dominating upper bound on the
// expected coupling discrepancy), with standard error.
McEstimate coupling_independence_estimate(const SpinModel& model, int v, long long trials, uint64_t seed,
                                          int exact_subtree_cap = 20);

// Series sum_l min{exact Pr[T>=l], exp(-l(l-1)/2n)} * ||u||^{2l}; exact
// collision probabilities via elementary symmetric polynomials for l <= 12.
// Returns +inf if the tail cannot be truncated below 1e-12.
double rank_one_si_bound(std::span<const double> u, int exact_ell_cap = 12);

struct BirthdayTail {
    double exact = 0.0;
    bool exact_available = false;
    double bound = 0.0;
};
// Exact no-collision probability among ell i.i.d. draws from p (ell <= cap)
// and the exp(-ell(ell-1)/2n) bound.
BirthdayTail birthday_tail(std::span<const double> p, int ell, int exact_ell_cap = 12);

}  // namespace spinlab
