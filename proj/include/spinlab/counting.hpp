#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spinlab/model.hpp"

namespace spinlab {

enum class CountingOracle { Weitz, Exact };

struct CountingPlan {
    double theta = 0.5;
    double epsilon = 0.05;    // truncation error target
    double epsilon0 = 0.05;   // per-term oracle error target
    int k = 0;                // subset-size cutoff, ceil(e^2 n theta/(1-theta) + log(2/eps))
    CountingOracle oracle = CountingOracle::Weitz;
    long long term_budget = 50'000'000;
    long long saw_node_budget = 10'000'000;
};

CountingPlan make_counting_plan(int n, double theta, double epsilon, double epsilon0,
                                CountingOracle oracle = CountingOracle::Weitz);

// Exact log Z_{S,theta} = log sum_{T >= S} wt(T) (1-theta)^{|T|} by enumeration.
double z_s_theta_exact(const SpinModel& model, std::span<const int> S, double theta);

// Occupation marginal of v from the hardcore tree recursion on the SAW tree,
// truncated at `depth` levels (cut children contribute R = 0). Exact once the
// depth reaches the longest self-avoiding walk.
double weitz_marginal(const SpinModel& model, const Pinning& pinning, int v, int depth,
                      long long node_budget = 10'000'000);

// Ising counterpart: Pr[x_v = +1] via the two-spin ratio recursion on the SAW
// tree (pinned closure leaves substituted, cut children contribute factor 1).
double ising_saw_marginal(const SpinModel& model, const Pinning& pinning, int v, int depth,
                          long long node_budget = 10'000'000);

struct ZsEstimate {
    double log_z = 0.0;
    bool empty = false;
    int max_depth_used = 0;
};

// log Z_{S,theta} = |S| log(1-theta) + log wt(S) - log nu^{1_S}(all-out), the
// all-out probability telescoped over ascending free vertices with marginals
// from the correlation-decay recursion (depth doubled until stable).
ZsEstimate estimate_z_s_theta(const SpinModel& model, std::span<const int> S, double theta, double epsilon0,
                              long long saw_node_budget = 10'000'000);

struct CountCertificate {
    double log_z_hat = 0.0;
    int k = 0;
    long long terms = 0;           // subsets that contributed
    double max_term = 0.0;         // largest log term
    int max_depth_used = 0;
};

// Z-hat = sum_{|S| < k} (theta/(1-theta))^{|S|} Z-hat_{S,theta} in log space.
CountCertificate deterministic_count(const SpinModel& model, const CountingPlan& plan);

}  // namespace spinlab
