#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "spinlab/graph.hpp"

namespace spinlab {

// Pinning/conditioning produced an empty support (e.g. both endpoints of an
// edge pinned occupied in the hardcore model).
struct EmptySupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind { Hardcore, IsingGraph, IsingMatrix };

// Configurations are spin vectors in {-1,+1}^n; for hardcore +1 means occupied.
struct SpinModel {
    ModelKind kind = ModelKind::Hardcore;
    Graph graph;                    // Hardcore, IsingGraph
    std::vector<double> fugacity;   // Hardcore, per vertex
    double beta = 0.0;              // IsingGraph
    Eigen::MatrixXd J;              // IsingMatrix
    std::vector<double> fields;     // Ising kinds, per vertex
    // Additive log-weight constant carried through pinning reductions.
    double log_weight_offset = 0.0;

    int n() const {
        return kind == ModelKind::IsingMatrix ? static_cast<int>(J.rows()) : graph.n_vertices;
    }
    bool is_ising() const { return kind != ModelKind::Hardcore; }
};

SpinModel make_hardcore(Graph graph, double lambda);
SpinModel make_hardcore(Graph graph, std::vector<double> fugacities);
SpinModel make_ising(Graph graph, double beta, std::vector<double> fields = {});
SpinModel make_ising_matrix(Eigen::MatrixXd J, std::vector<double> fields = {}, double psd_tol = 1e-9);

// Tree-uniqueness thresholds for degree Delta >= 3.
double lambda_c(int delta);
double beta_c(int delta);

// Unique positive solution of x = lambda / (1+x)^d.
double tree_fixed_point(double lambda, int d);
// delta* = 1 - d x / (1+x) with d = Delta-1; zero at lambda_c, negative beyond.
double uniqueness_slack(double lambda, int delta);

double log_weight(const SpinModel& model, std::span<const int8_t> config);

// (1-theta)-tilt: hardcore fugacities scale by (1-theta); Ising fields shift
// by log(1-theta)/2, multiplying each +1 coordinate's weight by (1-theta).
SpinModel tilt(const SpinModel& model, double theta);

// Factor L (r x n, r = numeric rank) with L^T L = J, where J is the model's
// interaction matrix: beta(Delta I + A) for ferromagnetic graphs, beta A
// shifted to PSD by -lambda_min for antiferromagnetic ones, J itself for
// matrix models. Diagonal shifts leave the Gibbs distribution unchanged.
Eigen::MatrixXd factor_interaction(const SpinModel& model, double tol = 1e-9);

struct Pinning {
    std::map<int, int8_t> assignments;  // vertex -> spin (+1 occupied for hardcore)
    bool empty() const { return assignments.empty(); }
};

struct PinnedReduction {
    SpinModel model;                 // reduced model over the free vertices
    std::vector<int> free_vertices;  // original ids, ascending
    double log_constant = 0.0;       // log_weight(orig, pin+free) = log_constant + log_weight(reduced, free)
};

PinnedReduction apply_pinning(const SpinModel& model, const Pinning& pinning);

// JSON (de)serialization; graph stored as a file reference for graph models.
std::string model_to_json(const SpinModel& model, const std::string& graph_path = "");
SpinModel model_from_json(const std::string& json_text);

}  // namespace spinlab
