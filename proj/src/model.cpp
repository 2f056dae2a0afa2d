#include "spinlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "spinlab/logspace.hpp"

namespace spinlab {

SpinModel make_hardcore(Graph graph, double lambda) {
    const auto n = static_cast<size_t>(graph.n_vertices);
    return make_hardcore(std::move(graph), std::vector<double>(n, lambda));
}

SpinModel make_hardcore(Graph graph, std::vector<double> fugacities) {
    if (static_cast<int>(fugacities.size()) != graph.n_vertices)
        throw std::invalid_argument("make_hardcore: fugacity vector size mismatch");
    for (double l : fugacities)
        if (!(l > 0.0)) throw std::invalid_argument("make_hardcore: fugacities must be strictly positive");
    SpinModel m;
    m.kind = ModelKind::Hardcore;
    m.graph = std::move(graph);
    m.fugacity = std::move(fugacities);
    return m;
}

SpinModel make_ising(Graph graph, double beta, std::vector<double> fields) {
    if (fields.empty()) fields.assign(static_cast<size_t>(graph.n_vertices), 0.0);
    if (static_cast<int>(fields.size()) != graph.n_vertices)
        throw std::invalid_argument("make_ising: fields size mismatch");
    SpinModel m;
    m.kind = ModelKind::IsingGraph;
    m.graph = std::move(graph);
    m.beta = beta;
    m.fields = std::move(fields);
    return m;
}

SpinModel make_ising_matrix(Eigen::MatrixXd J, std::vector<double> fields, double psd_tol) {
    if (J.rows() != J.cols()) throw std::invalid_argument("make_ising_matrix: J must be square");
    if (!J.isApprox(J.transpose(), 1e-12)) throw std::invalid_argument("make_ising_matrix: J must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -psd_tol)
        throw std::invalid_argument("make_ising_matrix: J has eigenvalue below -tolerance (not PSD)");
    if (fields.empty()) fields.assign(static_cast<size_t>(J.rows()), 0.0);
    if (static_cast<int>(fields.size()) != J.rows())
        throw std::invalid_argument("make_ising_matrix: fields size mismatch");
    SpinModel m;
    m.kind = ModelKind::IsingMatrix;
    m.J = std::move(J);
    m.fields = std::move(fields);
    return m;
}

double lambda_c(int delta) {
    if (delta < 3) throw std::invalid_argument("lambda_c: requires delta >= 3");
    double d = delta;
    return std::pow(d - 1.0, d - 1.0) / std::pow(d - 2.0, d);
}

double beta_c(int delta) {
    if (delta < 3) throw std::invalid_argument("beta_c: requires delta >= 3");
    return 0.5 * std::log(static_cast<double>(delta) / (delta - 2.0));
}

double tree_fixed_point(double lambda, int d) {
    if (!(lambda > 0.0)) throw std::invalid_argument("tree_fixed_point: lambda must be positive");
    if (d < 2) throw std::invalid_argument("tree_fixed_point: d >= 2 required");
    // g(x) = x(1+x)^d - lambda is increasing on [0, lambda]; Newton on g with
    // bisection safeguard.
    double lo = 0.0, hi = lambda;
    double x = std::min(lambda, 1.0);
    for (int it = 0; it < 200; ++it) {
        double p = std::pow(1.0 + x, d);
        double g = x * p - lambda;
        if (std::fabs(g) < 1e-15 * (1.0 + lambda)) break;
        if (g > 0)
            hi = x;
        else
            lo = x;
        double dg = p + x * d * std::pow(1.0 + x, d - 1);
        double step = x - g / dg;
        x = (step > lo && step < hi) ? step : 0.5 * (lo + hi);
    }
    double residual = std::fabs(x - lambda / std::pow(1.0 + x, d));
    if (!(residual < 1e-12 * (1.0 + x)))
        throw std::runtime_error("tree_fixed_point: did not converge to 1e-12 residual");
    return x;
}

double uniqueness_slack(double lambda, int delta) {
    if (delta < 3) throw std::invalid_argument("uniqueness_slack: requires delta >= 3");
    int d = delta - 1;
    double x = tree_fixed_point(lambda, d);
    return 1.0 - d * x / (1.0 + x);
}

double log_weight(const SpinModel& model, std::span<const int8_t> config) {
    const int n = model.n();
    if (static_cast<int>(config.size()) != n) throw std::invalid_argument("log_weight: config length mismatch");
    double lw = model.log_weight_offset;
    switch (model.kind) {
        case ModelKind::Hardcore: {
            for (auto [u, v] : model.graph.edges)
                if (config[static_cast<size_t>(u)] > 0 && config[static_cast<size_t>(v)] > 0) return kNegInf;
            for (int v = 0; v < n; ++v)
                if (config[static_cast<size_t>(v)] > 0) lw += std::log(model.fugacity[static_cast<size_t>(v)]);
            return lw;
        }
        case ModelKind::IsingGraph: {
            for (auto [u, v] : model.graph.edges)
                lw += model.beta * config[static_cast<size_t>(u)] * config[static_cast<size_t>(v)];
            for (int v = 0; v < n; ++v) lw += model.fields[static_cast<size_t>(v)] * config[static_cast<size_t>(v)];
            return lw;
        }
        case ModelKind::IsingMatrix: {
            Eigen::VectorXd x(n);
            for (int v = 0; v < n; ++v) x[v] = config[static_cast<size_t>(v)];
            lw += 0.5 * x.dot(model.J * x);
            for (int v = 0; v < n; ++v) lw += model.fields[static_cast<size_t>(v)] * x[v];
            return lw;
        }
    }
    return kNegInf;
}

SpinModel tilt(const SpinModel& model, double theta) {
    if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("tilt: theta must lie in [0,1)");
    SpinModel out = model;
    if (model.kind == ModelKind::Hardcore) {
        for (double& l : out.fugacity) l *= (1.0 - theta);
    } else {
        double shift = 0.5 * std::log1p(-theta);
        for (double& h : out.fields) h += shift;
    }
    return out;
}

Eigen::MatrixXd factor_interaction(const SpinModel& model, double tol) {
    if (model.kind == ModelKind::Hardcore) throw std::invalid_argument("factor_interaction: Ising models only");
    const int n = model.n();
    Eigen::MatrixXd J;
    if (model.kind == ModelKind::IsingMatrix) {
        J = model.J;
    } else {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        for (auto [u, v] : model.graph.edges) {
            A(u, v) += 1.0;
            A(v, u) += 1.0;
        }
        if (model.beta >= 0.0) {
            J = model.beta * (model.graph.max_degree * Eigen::MatrixXd::Identity(n, n) + A);
        } else {
            // Antiferromagnetic: shift beta*A by its smallest eigenvalue.
            Eigen::MatrixXd M = model.beta * A;
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> pre(M, Eigen::EigenvaluesOnly);
            J = M - pre.eigenvalues().minCoeff() * Eigen::MatrixXd::Identity(n, n);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    const auto& evals = es.eigenvalues();
    if (evals.minCoeff() < -tol) throw std::invalid_argument("factor_interaction: J is not PSD within tolerance");
    int r = 0;
    for (int i = 0; i < n; ++i)
        if (evals[i] > tol) ++r;
    Eigen::MatrixXd L(r, n);
    int row = 0;
    for (int i = n - 1; i >= 0; --i) {  // descending eigenvalues first
        if (evals[i] > tol) L.row(row++) = std::sqrt(evals[i]) * es.eigenvectors().col(i).transpose();
    }
    double recon = (L.transpose() * L - J).cwiseAbs().maxCoeff();
    double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
    if (recon > 10.0 * std::max(tol, 1e-14) * scale)
        throw std::runtime_error("factor_interaction: reconstruction error above contract");
    return L;
}

PinnedReduction apply_pinning(const SpinModel& model, const Pinning& pinning) {
    const int n = model.n();
    for (const auto& [v, s] : pinning.assignments) {
        if (v < 0 || v >= n) throw std::invalid_argument("apply_pinning: vertex out of range");
        if (s != 1 && s != -1) throw std::invalid_argument("apply_pinning: spins must be +1/-1");
    }
    std::vector<int8_t> pin(static_cast<size_t>(n), 0);
    for (const auto& [v, s] : pinning.assignments) pin[static_cast<size_t>(v)] = s;

    PinnedReduction red;
    if (model.kind == ModelKind::Hardcore) {
        // Occupied pins force neighbors out; conflicting forcings empty the support.
        std::vector<int8_t> eff = pin;
        for (auto [u, v] : model.graph.edges) {
            if (pin[static_cast<size_t>(u)] > 0 && pin[static_cast<size_t>(v)] > 0)
                throw EmptySupportError("apply_pinning: two adjacent vertices pinned occupied");
            if (pin[static_cast<size_t>(u)] > 0 && eff[static_cast<size_t>(v)] == 0) eff[static_cast<size_t>(v)] = -1;
            if (pin[static_cast<size_t>(v)] > 0 && eff[static_cast<size_t>(u)] == 0) eff[static_cast<size_t>(u)] = -1;
        }
        double log_const = model.log_weight_offset;
        std::vector<int> keep;
        std::vector<int> new_id(static_cast<size_t>(n), -1);
        for (int v = 0; v < n; ++v) {
            if (eff[static_cast<size_t>(v)] == 0) {
                new_id[static_cast<size_t>(v)] = static_cast<int>(keep.size());
                keep.push_back(v);
            } else if (eff[static_cast<size_t>(v)] > 0) {
                log_const += std::log(model.fugacity[static_cast<size_t>(v)]);
            }
        }
        std::vector<std::pair<int, int>> edges;
        std::set<std::pair<int, int>> seen;
        for (auto [u, v] : model.graph.edges) {
            int a = new_id[static_cast<size_t>(u)], b = new_id[static_cast<size_t>(v)];
            if (a < 0 || b < 0) continue;
            if (a > b) std::swap(a, b);
            if (model.graph.multigraph || seen.insert({a, b}).second) edges.push_back({a, b});
        }
        std::vector<double> fug;
        fug.reserve(keep.size());
        for (int v : keep) fug.push_back(model.fugacity[static_cast<size_t>(v)]);
        red.model = make_hardcore(make_graph(static_cast<int>(keep.size()), std::move(edges), model.graph.multigraph),
                                  std::move(fug));
        red.model.log_weight_offset = 0.0;
        red.free_vertices = std::move(keep);
        red.log_constant = log_const;
        return red;
    }

    // Ising: pinned spins turn into field shifts on free neighbors plus a constant.
    std::vector<int> keep;
    std::vector<int> new_id(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        if (pin[static_cast<size_t>(v)] == 0) {
            new_id[static_cast<size_t>(v)] = static_cast<int>(keep.size());
            keep.push_back(v);
        }
    double log_const = model.log_weight_offset;
    std::vector<double> fields;
    fields.reserve(keep.size());
    for (int v : keep) fields.push_back(model.fields[static_cast<size_t>(v)]);
    for (const auto& [v, s] : pinning.assignments) log_const += model.fields[static_cast<size_t>(v)] * s;

    if (model.kind == ModelKind::IsingGraph) {
        std::vector<std::pair<int, int>> edges;
        for (auto [u, v] : model.graph.edges) {
            int8_t su = pin[static_cast<size_t>(u)], sv = pin[static_cast<size_t>(v)];
            if (su != 0 && sv != 0) {
                log_const += model.beta * su * sv;
            } else if (su != 0) {
                fields[static_cast<size_t>(new_id[static_cast<size_t>(v)])] += model.beta * su;
            } else if (sv != 0) {
                fields[static_cast<size_t>(new_id[static_cast<size_t>(u)])] += model.beta * sv;
            } else {
                edges.push_back({new_id[static_cast<size_t>(u)], new_id[static_cast<size_t>(v)]});
            }
        }
        red.model = make_ising(make_graph(static_cast<int>(keep.size()), std::move(edges), model.graph.multigraph),
                               model.beta, std::move(fields));
    } else {
        const int k = static_cast<int>(keep.size());
        Eigen::MatrixXd Jr(k, k);
        for (int a = 0; a < k; ++a)
            for (int b = 0; b < k; ++b) Jr(a, b) = model.J(keep[static_cast<size_t>(a)], keep[static_cast<size_t>(b)]);
        for (const auto& [v, s] : pinning.assignments) {
            for (int a = 0; a < k; ++a) fields[static_cast<size_t>(a)] += model.J(keep[static_cast<size_t>(a)], v) * s;
            for (const auto& [w, t] : pinning.assignments)
                if (v < w) log_const += model.J(v, w) * s * t;
            log_const += 0.5 * model.J(v, v);
        }
        // The reduced diagonal may lose PSD-ness; shift it back (free on the cube).
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Jr, Eigen::EigenvaluesOnly);
        double lmin = k > 0 ? es.eigenvalues().minCoeff() : 0.0;
        if (lmin < 0.0) {
            Jr -= lmin * Eigen::MatrixXd::Identity(k, k);
            log_const += 0.5 * lmin * k;  // weight bookkeeping stays exact
        }
        red.model = make_ising_matrix(std::move(Jr), std::move(fields));
    }
    red.model.log_weight_offset = 0.0;
    red.free_vertices = std::move(keep);
    red.log_constant = log_const;
    return red;
}

std::string model_to_json(const SpinModel& model, const std::string& graph_path) {
    nlohmann::json j;
    switch (model.kind) {
        case ModelKind::Hardcore:
            j["type"] = "hardcore";
            j["graph"] = graph_path;
            j["lambda"] = model.fugacity;
            break;
        case ModelKind::IsingGraph:
            j["type"] = "ising";
            j["graph"] = graph_path;
            j["beta"] = model.beta;
            j["fields"] = model.fields;
            break;
        case ModelKind::IsingMatrix: {
            j["type"] = "ising-matrix";
            std::vector<double> flat;
            const int n = model.n();
            flat.reserve(static_cast<size_t>(n) * static_cast<size_t>(n));
            for (int r = 0; r < n; ++r)
                for (int c = 0; c < n; ++c) flat.push_back(model.J(r, c));
            j["J"] = flat;
            j["fields"] = model.fields;
            break;
        }
    }
    return j.dump(2);
}

SpinModel model_from_json(const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    std::string type = j.at("type");
    if (type == "hardcore") {
        Graph g = read_graph_file(j.at("graph"));
        auto lam = j.at("lambda");
        if (lam.is_number()) return make_hardcore(std::move(g), lam.get<double>());
        return make_hardcore(std::move(g), lam.get<std::vector<double>>());
    }
    if (type == "ising") {
        Graph g = read_graph_file(j.at("graph"));
        std::vector<double> fields;
        if (j.contains("fields")) fields = j["fields"].get<std::vector<double>>();
        return make_ising(std::move(g), j.at("beta").get<double>(), std::move(fields));
    }
    if (type == "ising-matrix") {
        auto flat = j.at("J").get<std::vector<double>>();
        auto n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
        if (static_cast<size_t>(n) * static_cast<size_t>(n) != flat.size())
            throw std::invalid_argument("model_from_json: J is not square");
        Eigen::MatrixXd J(n, n);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) J(r, c) = flat[static_cast<size_t>(r) * static_cast<size_t>(n) + c];
        std::vector<double> fields;
        if (j.contains("fields")) fields = j["fields"].get<std::vector<double>>();
        return make_ising_matrix(std::move(J), std::move(fields));
    }
    throw std::invalid_argument("model_from_json: unknown model type " + type);
}

}  // namespace spinlab
