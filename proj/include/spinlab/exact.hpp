#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spinlab/model.hpp"

namespace spinlab {

// Resource caps; the distribution cap honors SPINLAB_BUDGET_STATES.
long long state_budget();
long long kernel_state_budget();

// Dense log-probability table over all 2^n configurations, indexed by
// bitmask with bit v = 1 meaning x_v = +1 (occupied). Normalized so that
// logsumexp(log_probs) = 0; infeasible states carry -inf exactly.
struct ExactDistribution {
    int n = 0;
    std::vector<double> log_probs;

    double prob(uint32_t mask) const { return std::exp(log_probs[mask]); }
};

// Row-stochastic kernel over an enumerated subset of configurations.
struct DenseKernel {
    std::vector<uint32_t> states;  // ascending bitmasks
    Eigen::MatrixXd P;

    int size() const { return static_cast<int>(states.size()); }
};

ExactDistribution exact_distribution(const SpinModel& model);

struct LogZ {
    double value;  // -inf iff empty
    bool empty;
};
LogZ log_partition(const SpinModel& model, const Pinning* pinning = nullptr);

// Psi(i,j) = Pr[X_j=+ | X_i=+] - Pr[X_j=+ | X_i=-]; rows of coordinates with
// E[X_i] in {-1,+1} are zeroed, so the diagonal is 1 on non-degenerate rows.
Eigen::MatrixXd influence_matrix(const SpinModel& model);

// Hardcore uses the 0/1 encoding, Ising the +-1 encoding (they differ by the
// factor-4 bridge; influence and SI eigenvalues are encoding-invariant).
Eigen::MatrixXd covariance_matrix(const SpinModel& model);

double si_lambda_max(const SpinModel& model, bool over_pinnings = false);

DenseKernel glauber_kernel(const SpinModel& model);

// Field dynamics K = P_{1->theta} Q_{theta->1} over the independent sets;
// hardcore models only.
DenseKernel field_dynamics_kernel(const SpinModel& model, double theta);

// Proximal sampler kernel at theta = 1/2 with driving matrix from
// factor_interaction; exact via tensorized Gauss-Hermite quadrature (rank <= 3).
DenseKernel proximal_kernel(const SpinModel& model, double theta = 0.5, int gh_nodes = 64, double tol = 1e-8);

struct ChainDiagnostics {
    double gap = 0.0;
    double tensorization_constant = 0.0;
    std::vector<std::pair<long long, double>> tv_curve;  // (t, worst-start TV)
    double reversibility_residual = 0.0;
};
ChainDiagnostics chain_diagnostics(const DenseKernel& kernel, const ExactDistribution& mu, long long t_max = 1024);

enum class PhiKind { Variance, Entropy };
double phi_entropy_weighted(std::span<const double> probs, std::span<const double> values, PhiKind kind);
double phi_entropy(const ExactDistribution& mu, std::span<const double> f, PhiKind kind);

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path);
void write_distribution_csv(const ExactDistribution& d, const std::string& path);

}  // namespace spinlab
