#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "spinlab/cli.hpp"
#include "spinlab/counting.hpp"
#include "spinlab/exact.hpp"
#include "spinlab/graph.hpp"
#include "spinlab/lowerbound.hpp"
#include "spinlab/model.hpp"
#include "spinlab/percolation.hpp"
#include "spinlab/rng.hpp"
#include "spinlab/sampler.hpp"

namespace py = pybind11;
using namespace spinlab;

namespace {

std::vector<int8_t> to_config(const std::vector<int>& xs) {
    std::vector<int8_t> out(xs.size());
    for (size_t i = 0; i < xs.size(); ++i) out[i] = static_cast<int8_t>(xs[i]);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sampling and analysis for critical hardcore and Ising Gibbs distributions";

    py::register_exception<BudgetError>(m, "BudgetError");
    py::register_exception<EmptySupportError>(m, "EmptySupportError");

    py::class_<Graph>(m, "Graph")
        .def_readonly("n_vertices", &Graph::n_vertices)
        .def_readonly("edges", &Graph::edges)
        .def_readonly("multigraph", &Graph::multigraph)
        .def_readonly("max_degree", &Graph::max_degree)
        .def_property_readonly("bipartition",
                               [](const Graph& g) {
                                   return g.bipartition ? py::cast(*g.bipartition) : py::none().cast<py::object>();
                               })
        .def("is_connected", &Graph::is_connected);

    m.def("make_graph", &make_graph, py::arg("n"), py::arg("edges"), py::arg("multigraph") = false,
          py::arg("bipartition") = std::nullopt);
    m.def("gen_symmetric_bipartite", &gen_symmetric_bipartite, py::arg("n"), py::arg("delta"), py::arg("seed"));
    m.def("gen_regular_bipartite", &gen_regular_bipartite, py::arg("n"), py::arg("delta"), py::arg("seed"),
          py::arg("multigraph"));
    m.def("tree_graph_regular", &tree_graph_regular, py::arg("delta"), py::arg("depth"),
          py::arg("node_budget") = 10'000'000);
    m.def("tree_graph_ary", &tree_graph_ary, py::arg("d"), py::arg("depth"), py::arg("node_budget") = 10'000'000);
    m.def("write_graph_file", &write_graph_file);
    m.def("read_graph_file", &read_graph_file);

    py::class_<SawTreeNode>(m, "SawTreeNode")
        .def_readonly("origin_vertex", &SawTreeNode::origin_vertex)
        .def_readonly("parent", &SawTreeNode::parent)
        .def_readonly("pinning", &SawTreeNode::pinning);
    py::class_<SawTree>(m, "SawTree")
        .def_readonly("nodes", &SawTree::nodes)
        .def_readonly("root", &SawTree::root)
        .def_readonly("order_rank", &SawTree::order_rank);
    m.def(
        "build_saw_tree",
        [](const Graph& g, int root, std::optional<std::vector<int>> order, std::optional<int> depth_limit,
           long long node_budget) {
            std::vector<int> ord = order.value_or(std::vector<int>{});
            return build_saw_tree(g, root, ord, depth_limit, node_budget);
        },
        py::arg("graph"), py::arg("root"), py::arg("order") = std::nullopt, py::arg("depth_limit") = std::nullopt,
        py::arg("node_budget") = 10'000'000);

    py::class_<SpinModel>(m, "SpinModel")
        .def_property_readonly("n", &SpinModel::n)
        .def_property_readonly("kind",
                               [](const SpinModel& mm) {
                                   switch (mm.kind) {
                                       case ModelKind::Hardcore: return "hardcore";
                                       case ModelKind::IsingGraph: return "ising";
                                       default: return "ising-matrix";
                                   }
                               })
        .def_readonly("beta", &SpinModel::beta)
        .def_readonly("fugacity", &SpinModel::fugacity)
        .def_readonly("fields", &SpinModel::fields);
    m.def("make_hardcore", py::overload_cast<Graph, double>(&make_hardcore), py::arg("graph"), py::arg("lambda_"));
    m.def("make_hardcore_per_vertex", py::overload_cast<Graph, std::vector<double>>(&make_hardcore));
    m.def("make_ising", &make_ising, py::arg("graph"), py::arg("beta"), py::arg("fields") = std::vector<double>{});
    m.def("make_ising_matrix", &make_ising_matrix, py::arg("J"), py::arg("fields") = std::vector<double>{},
          py::arg("psd_tol") = 1e-9);

    m.def("lambda_c", &lambda_c);
    m.def("beta_c", &beta_c);
    m.def("tree_fixed_point", &tree_fixed_point);
    m.def("uniqueness_slack", &uniqueness_slack);
    m.def("tilt", &tilt);
    m.def("factor_interaction", &factor_interaction, py::arg("model"), py::arg("tol") = 1e-9);
    m.def("log_weight",
          [](const SpinModel& model, const std::vector<int>& config) { return log_weight(model, to_config(config)); });

    py::class_<Pinning>(m, "Pinning")
        .def(py::init([](const std::map<int, int>& a) {
            Pinning p;
            for (auto [v, s] : a) p.assignments[v] = static_cast<int8_t>(s);
            return p;
        }))
        .def(py::init<>());
    m.def("apply_pinning", [](const SpinModel& model, const Pinning& pin) {
        auto red = apply_pinning(model, pin);
        return py::make_tuple(red.model, red.free_vertices, red.log_constant);
    });

    py::class_<ExactDistribution>(m, "ExactDistribution")
        .def_readonly("n", &ExactDistribution::n)
        .def_readonly("log_probs", &ExactDistribution::log_probs);
    py::class_<DenseKernel>(m, "DenseKernel")
        .def_readonly("states", &DenseKernel::states)
        .def_readonly("P", &DenseKernel::P);

    m.def("exact_distribution", &exact_distribution);
    m.def("log_partition", [](const SpinModel& model) {
        auto z = log_partition(model);
        return py::make_tuple(z.value, z.empty);
    });
    m.def("influence_matrix", &influence_matrix);
    m.def("covariance_matrix", &covariance_matrix);
    m.def("si_lambda_max", &si_lambda_max, py::arg("model"), py::arg("over_pinnings") = false);
    m.def("glauber_kernel", &glauber_kernel);
    m.def("field_dynamics_kernel", &field_dynamics_kernel);
    m.def("proximal_kernel", &proximal_kernel, py::arg("model"), py::arg("theta") = 0.5, py::arg("gh_nodes") = 64,
          py::arg("tol") = 1e-8);
    m.def("chain_diagnostics", [](const DenseKernel& k, const ExactDistribution& mu, long long t_max) {
        auto d = chain_diagnostics(k, mu, t_max);
        py::dict out;
        out["gap"] = d.gap;
        out["tensorization_constant"] = d.tensorization_constant;
        out["reversibility_residual"] = d.reversibility_residual;
        out["tv_curve"] = d.tv_curve;
        return out;
    }, py::arg("kernel"), py::arg("mu"), py::arg("t_max") = 1024);
    m.def("phi_entropy", [](const ExactDistribution& mu, const std::vector<double>& f, const std::string& kind) {
        return phi_entropy(mu, f, kind == "variance" ? PhiKind::Variance : PhiKind::Entropy);
    });

    m.def("run_chain", [](const SpinModel& model, const std::string& chain, const std::string& init, long long steps,
                          uint64_t seed, long long thin, long long burn_in, double theta) {
        RunOptions opt;
        opt.chain = chain == "glauber" ? ChainKind::Glauber : chain == "field" ? ChainKind::Field : ChainKind::Proximal;
        opt.init = init;
        opt.steps = steps;
        opt.seed = seed;
        opt.thin = thin;
        opt.burn_in = burn_in;
        opt.theta = theta;
        auto s = run_chain(model, opt);
        py::dict out;
        out["steps"] = s.steps;
        out["samples"] = s.samples;
        out["mean_plus"] = s.mean_plus;
        out["mean_magnetization"] = s.mean_magnetization;
        out["var_magnetization"] = s.var_magnetization;
        return out;
    }, py::arg("model"), py::arg("chain") = "glauber", py::arg("init") = "default", py::arg("steps") = 1000,
       py::arg("seed") = 0, py::arg("thin") = 1, py::arg("burn_in") = 0, py::arg("theta") = 0.9);
    m.def("estimate_covariance_quadratic",
          [](const SpinModel& model, const std::vector<int>& s, long long sweeps, uint64_t seed) {
              QuadOptions opt;
              opt.sweeps = sweeps;
              opt.seed = seed;
              auto est = estimate_covariance_quadratic(model, s, opt);
              return py::make_tuple(est.value, est.stderr_, est.samples);
          },
          py::arg("model"), py::arg("s"), py::arg("sweeps") = 0, py::arg("seed") = 0);

    m.def("ary_percolation_pmf", &ary_percolation_pmf);
    m.def("ary_percolation_log_pmf", &ary_percolation_log_pmf);
    m.def("ary_pmf_total_mass", &ary_pmf_total_mass, py::arg("d"), py::arg("p"), py::arg("terms") = 1'000'000);
    m.def("ary_pmf_tail_exponent", &ary_pmf_tail_exponent, py::arg("d"), py::arg("p"), py::arg("lo"), py::arg("hi"),
          py::arg("points") = 60);
    m.def("extinction_probability", &extinction_probability);
    m.def("explore_saw", [](const Graph& g, int v, double beta, uint64_t seed, long long cap) {
        CounterRng rng(seed, 0, 11);
        auto r = explore_saw(g, v, beta, rng, cap);
        return py::make_tuple(r.explored, r.infinite_flag, r.bound_mode_used);
    }, py::arg("graph"), py::arg("v"), py::arg("beta"), py::arg("seed"), py::arg("cap"));
    m.def("coupling_independence_estimate",
          [](const SpinModel& model, int v, long long trials, uint64_t seed) {
              auto e = coupling_independence_estimate(model, v, trials, seed);
              return py::make_tuple(e.mean, e.stderr_, e.trials);
          },
          py::arg("model"), py::arg("v"), py::arg("trials"), py::arg("seed"));
    m.def("rank_one_si_bound", [](const std::vector<double>& u) { return rank_one_si_bound(u); });
    m.def("birthday_tail", [](const std::vector<double>& p, int ell) {
        auto b = birthday_tail(p, ell);
        return py::make_tuple(b.exact, b.exact_available, b.bound);
    });

    m.def("z_s_theta_exact", [](const SpinModel& model, const std::vector<int>& S, double theta) {
        return z_s_theta_exact(model, S, theta);
    });
    m.def("weitz_marginal", [](const SpinModel& model, const std::map<int, int>& pin_in, int v, int depth) {
        Pinning pin;
        for (auto [vv, s] : pin_in) pin.assignments[vv] = static_cast<int8_t>(s);
        return weitz_marginal(model, pin, v, depth);
    });
    m.def("ising_saw_marginal", [](const SpinModel& model, const std::map<int, int>& pin_in, int v, int depth) {
        Pinning pin;
        for (auto [vv, s] : pin_in) pin.assignments[vv] = static_cast<int8_t>(s);
        return ising_saw_marginal(model, pin, v, depth);
    });
    m.def("estimate_z_s_theta",
          [](const SpinModel& model, const std::vector<int>& S, double theta, double eps0) {
              auto est = estimate_z_s_theta(model, S, theta, eps0);
              return py::make_tuple(est.log_z, est.empty, est.max_depth_used);
          },
          py::arg("model"), py::arg("S"), py::arg("theta"), py::arg("eps0") = 0.01);
    m.def("deterministic_count",
          [](const SpinModel& model, double theta, double eps, double eps0, const std::string& oracle) {
              auto plan = make_counting_plan(model.n(), theta, eps, eps0,
                                             oracle == "exact" ? CountingOracle::Exact : CountingOracle::Weitz);
              auto cert = deterministic_count(model, plan);
              py::dict out;
              out["log_z_hat"] = cert.log_z_hat;
              out["k"] = cert.k;
              out["terms"] = cert.terms;
              out["max_depth_used"] = cert.max_depth_used;
              return out;
          },
          py::arg("model"), py::arg("theta") = 0.5, py::arg("eps") = 0.05, py::arg("eps0") = 0.05,
          py::arg("oracle") = "weitz");

    py::class_<HardcoreCoeffTables>(m, "HardcoreCoeffTables")
        .def(py::init<int, int>(), py::arg("n"), py::arg("delta"))
        .def("log_nstar", &HardcoreCoeffTables::log_nstar)
        .def("log_dstar", &HardcoreCoeffTables::log_dstar)
        .def("log_alpha", &HardcoreCoeffTables::log_alpha)
        .def("nstar_checksum", &HardcoreCoeffTables::nstar_checksum)
        .def("dstar_checksum", &HardcoreCoeffTables::dstar_checksum)
        .def("anti_concentration_ratio", &HardcoreCoeffTables::anti_concentration_ratio, py::arg("eta"),
             py::arg("exponent") = 2.0 / 3.0)
        .def("gaussian_ratio_window", [](const HardcoreCoeffTables& t) {
            auto w = t.gaussian_ratio_window();
            return py::make_tuple(w.log_min_ratio, w.log_max_ratio, w.log_center_ratio, w.points);
        })
        .def("write_alpha_csv", &HardcoreCoeffTables::write_alpha_csv);
    py::class_<IsingCoeffTables>(m, "IsingCoeffTables")
        .def(py::init<int, int>(), py::arg("n"), py::arg("delta"))
        .def("log_n", &IsingCoeffTables::log_n)
        .def("log_d", &IsingCoeffTables::log_d)
        .def("log_alpha", &IsingCoeffTables::log_alpha)
        .def("n_checksum", &IsingCoeffTables::n_checksum)
        .def("d_checksum", &IsingCoeffTables::d_checksum)
        .def("anti_concentration_ratio", &IsingCoeffTables::anti_concentration_ratio, py::arg("eta"),
             py::arg("exponent") = 3.0 / 4.0)
        .def("gaussian_ratio_window", [](const IsingCoeffTables& t) {
            auto w = t.gaussian_ratio_window();
            return py::make_tuple(w.log_min_ratio, w.log_max_ratio, w.log_center_ratio, w.points);
        })
        .def("write_alpha_csv", &IsingCoeffTables::write_alpha_csv);

    m.def("hardcore_gaussian_kappas", &hardcore_gaussian_kappas);
    m.def("evaluate_U_hardcore", &evaluate_U_hardcore);
    m.def("evaluate_U_sym_hardcore", &evaluate_U_sym_hardcore);
    m.def("argmax_U_sym_hardcore", &argmax_U_sym_hardcore, py::arg("delta"), py::arg("tol") = 1e-9);
    m.def("evaluate_U_ising", &evaluate_U_ising);
    m.def("critical_point_ising", &critical_point_ising, py::arg("delta"), py::arg("tol") = 1e-9);
    m.def("si_quadratic_lower", [](const SpinModel& model, const std::vector<int>& s) {
        return si_quadratic_lower(model, s);
    });

    m.def("run_cli", &run_cli, "Invoke the command-line interface with an argument list");
}
