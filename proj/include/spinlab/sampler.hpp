#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spinlab/model.hpp"
#include "spinlab/rng.hpp"

namespace spinlab {

enum class ChainKind { Glauber, Field, Proximal };

struct ChainState {
    std::vector<int8_t> config;  // +-1 spins; +1 = occupied for hardcore
    long long step = 0;
    CounterRng rng;
};

ChainState init_chain_state(const SpinModel& model, const std::string& init, uint64_t seed, uint64_t chain_index = 0);

// One heat-bath update at a uniformly random site.
void glauber_step(const SpinModel& model, ChainState& state);

struct FieldDynOptions {
    double theta = 0.9;
    int exact_component_cap = 20;        // exact denoise when a free component fits
    double inner_steps_factor = 50.0;    // else 50 * n_free * log(n_free) tilted-Glauber steps
};

struct FieldStepMeta {
    bool inner_exact = true;
    long long inner_steps = 0;
};

// Noising keeps each occupied vertex with probability theta; denoising draws
// from the (1-theta)-tilted model conditioned on containing the survivors.
FieldStepMeta field_dynamics_step(const SpinModel& model, ChainState& state, const FieldDynOptions& opt);

// Proximal round at theta = 1/2: y = Lx + g, then the product measure with
// logit fields 2(h + L^T y).
void proximal_step(const SpinModel& model, ChainState& state, const Eigen::MatrixXd& L);

struct RunOptions {
    ChainKind chain = ChainKind::Glauber;
    std::string init = "default";  // empty | all-minus | all-plus | random | hex:...
    long long steps = 0;
    uint64_t seed = 0;
    long long thin = 1;
    long long burn_in = 0;
    double theta = 0.9;                       // field dynamics
    std::optional<FieldDynOptions> field_opt;
    bool track_pairs = false;
};

struct RunSummary {
    long long steps = 0;
    long long samples = 0;
    std::vector<double> mean_plus;      // per-vertex Pr[x_v = +1] estimate
    double mean_magnetization = 0.0;    // mean of sum_v x_v
    double var_magnetization = 0.0;
    Eigen::MatrixXd pair_plus;          // E[1{x_i=+}1{x_j=+}] when track_pairs
    long long inner_budget_warnings = 0;
};

using SampleSink = std::function<void(long long step, std::span<const int8_t> config)>;

RunSummary run_chain(const SpinModel& model, const RunOptions& opt, const SampleSink& sink = nullptr);

struct QuadEstimate {
    double value = 0.0;   // Var(s^T X) / n
    double stderr_ = 0.0;
    long long samples = 0;
};

struct QuadOptions {
    long long sweeps = 0;        // 0 = auto from n
    long long burn_in_sweeps = 0;
    int batches = 50;
    uint64_t seed = 0;
};

// Monte-Carlo Var(s^T X)/n with batch-means standard error (Glauber chain).
QuadEstimate estimate_covariance_quadratic(const SpinModel& model, std::span<const int> s, const QuadOptions& opt);

}  // namespace spinlab
