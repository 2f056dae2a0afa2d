#include "spinlab/cli.hpp"

#include <chrono>
#include <map>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spinlab/counting.hpp"
#include "spinlab/exact.hpp"
#include "spinlab/graph.hpp"
#include "spinlab/logspace.hpp"
#include "spinlab/lowerbound.hpp"
#include "spinlab/model.hpp"
#include "spinlab/percolation.hpp"
#include "spinlab/sampler.hpp"

namespace spinlab {

namespace {

constexpr const char* kVersion = "spinlab 0.1.0";

using nlohmann::json;

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << '\n';
}

// Manifest: resolved config plus version; the timestamp lives only here.
void write_manifest(const std::string& command, const json& config, const std::string& path) {
    if (path.empty()) return;
    json m;
    m["command"] = command;
    m["config"] = config;
    m["version"] = kVersion;
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&now));
    m["timestamp"] = buf;
    write_json(m, path);
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

struct ModelFlags {
    std::string model = "hardcore";
    std::string graph_path;
    std::string lambda = "critical";
    std::string beta = "critical";
    std::string fields;  // single value or comma list
    std::string model_json;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "hardcore | ising")->capture_default_str();
        cmd->add_option("--graph", graph_path, "graph file");
        cmd->add_option("--lambda", lambda, "fugacity or 'critical'")->capture_default_str();
        cmd->add_option("--beta", beta, "inverse temperature, 'critical', or 'critical-antiferro'")
            ->capture_default_str();
        cmd->add_option("--fields", fields, "external field (value or comma list)");
        cmd->add_option("--model-json", model_json, "model JSON file (overrides the flags above)");
    }

    SpinModel resolve(json& config) const {
        config["model"] = model;
        if (!model_json.empty()) {
            std::ifstream in(model_json);
            if (!in) throw std::invalid_argument("cannot open model JSON: " + model_json);
            std::stringstream ss;
            ss << in.rdbuf();
            config["model_json"] = model_json;
            return model_from_json(ss.str());
        }
        if (graph_path.empty()) throw std::invalid_argument("--graph (or --model-json) is required");
        Graph g = read_graph_file(graph_path);
        config["graph"] = graph_path;
        if (model == "hardcore") {
            double lam = lambda == "critical" ? lambda_c(g.max_degree) : std::stod(lambda);
            config["lambda"] = lam;
            return make_hardcore(std::move(g), lam);
        }
        if (model == "ising") {
            double b;
            if (beta == "critical")
                b = beta_c(g.max_degree);
            else if (beta == "critical-antiferro")
                b = -beta_c(g.max_degree);
            else
                b = std::stod(beta);
            std::vector<double> h;
            if (!fields.empty()) {
                h = parse_csv_doubles(fields);
                if (h.size() == 1) h.assign(static_cast<size_t>(g.n_vertices), h[0]);
            }
            config["beta"] = b;
            return make_ising(std::move(g), b, std::move(h));
        }
        throw std::invalid_argument("unknown model kind: " + model);
    }
};

// Little-endian nibble encoding (bit v = 1 iff x_v = +1), works for any n.
std::string hex_of_config(std::span<const int8_t> config) {
    const size_t n = config.size();
    std::string hex;
    bool leading = true;
    for (size_t hi = (n + 3) / 4; hi-- > 0;) {
        int nib = 0;
        for (size_t b = 0; b < 4; ++b) {
            size_t v = hi * 4 + b;
            if (v < n && config[v] > 0) nib |= 1 << b;
        }
        if (nib == 0 && leading && hi != 0) continue;
        leading = false;
        hex += "0123456789abcdef"[nib];
    }
    return hex.empty() ? "0" : hex;
}

// Apply a JSON config file as defaults: each key becomes a --key option,
// appended only when the flag is not already present, so explicit flags win.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config") continue;
        std::ifstream in(args[i + 1]);
        if (!in) throw std::invalid_argument("cannot open config file: " + args[i + 1]);
        json j = json::parse(in);
        args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
        for (auto& [key, value] : j.items()) {
            std::string flag = "--" + key;
            if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
            if (value.is_boolean()) {
                if (value.get<bool>()) args.push_back(flag);
                continue;
            }
            args.push_back(flag);
            args.push_back(value.is_string() ? value.get<std::string>() : json(value).dump());
        }
        break;
    }
    return args;
}

int dispatch(std::vector<std::string> args) {
    CLI::App app{"spinlab: critical hardcore/Ising Gibbs sampling and analysis", "spinlab"};
    app.require_subcommand(1);
    int threads = 1;
    app.add_option("--threads", threads, "worker count (outputs are thread-count independent)");

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate graphs");
    struct {
        std::string family = "ising-bipartite";
        int n = 8, delta = 3, depth = 2;
        uint64_t seed = 0;
        bool multigraph = false;
        std::string out = "graph.el", manifest;
    } g;
    gen->add_option("--family", g.family, "hardcore-bipartite | ising-bipartite | tree-regular | tree-ary")
        ->capture_default_str();
    gen->add_option("--n", g.n, "side-size parameter n");
    gen->add_option("--delta", g.delta, "degree parameter");
    gen->add_option("--depth", g.depth, "tree truncation depth");
    gen->add_option("--seed", g.seed, "master seed");
    gen->add_flag("--multigraph", g.multigraph, "keep parallel edges");
    gen->add_option("--out", g.out, "output graph file")->capture_default_str();
    gen->add_option("--manifest", g.manifest, "manifest path (default <out>.manifest.json)");
    gen->callback([&] {
        Graph graph;
        if (g.family == "hardcore-bipartite")
            graph = gen_symmetric_bipartite(g.n, g.delta, g.seed);
        else if (g.family == "ising-bipartite")
            graph = gen_regular_bipartite(g.n, g.delta, g.seed, g.multigraph);
        else if (g.family == "tree-regular")
            graph = tree_graph_regular(g.delta, g.depth);
        else if (g.family == "tree-ary")
            graph = tree_graph_ary(g.delta, g.depth);
        else
            throw std::invalid_argument("unknown family: " + g.family);
        write_graph_file(graph, g.out);
        json config{{"family", g.family}, {"n", g.n},   {"delta", g.delta},         {"depth", g.depth},
                    {"seed", g.seed},     {"out", g.out}, {"multigraph", g.multigraph}};
        write_manifest("gen", config, g.manifest.empty() ? g.out + ".manifest.json" : g.manifest);
    });

    // ---- exact ----
    auto* exact = app.add_subcommand("exact", "brute-force oracles");
    ModelFlags exact_model;
    exact_model.attach(exact);
    struct {
        std::string out = "exact.json", psi_csv, cov_csv, dist_csv, manifest;
        bool over_pinnings = false;
    } e;
    exact->add_option("--out", e.out, "output JSON")->capture_default_str();
    exact->add_option("--psi-csv", e.psi_csv, "write influence matrix CSV");
    exact->add_option("--cov-csv", e.cov_csv, "write covariance matrix CSV");
    exact->add_option("--dist-csv", e.dist_csv, "write distribution CSV");
    exact->add_flag("--over-pinnings", e.over_pinnings, "maximize SI over all pinnings");
    exact->add_option("--manifest", e.manifest, "manifest path");
    exact->callback([&] {
        json config;
        SpinModel m = exact_model.resolve(config);
        config["over_pinnings"] = e.over_pinnings;
        auto lz = log_partition(m);
        json out;
        out["log_Z"] = lz.value;
        out["empty"] = lz.empty;
        out["si_lambda_max"] = si_lambda_max(m, e.over_pinnings);
        auto d = exact_distribution(m);
        std::vector<double> marginals(static_cast<size_t>(m.n()), 0.0);
        for (size_t mask = 0; mask < d.log_probs.size(); ++mask) {
            if (d.log_probs[mask] == kNegInf) continue;
            for (int v = 0; v < m.n(); ++v)
                if (mask >> v & 1) marginals[static_cast<size_t>(v)] += d.prob(static_cast<uint32_t>(mask));
        }
        out["marginal_plus"] = marginals;
        if (!e.psi_csv.empty()) write_matrix_csv(influence_matrix(m), e.psi_csv);
        if (!e.cov_csv.empty()) write_matrix_csv(covariance_matrix(m), e.cov_csv);
        if (!e.dist_csv.empty()) write_distribution_csv(d, e.dist_csv);
        write_json(out, e.out);
        write_manifest("exact", config, e.manifest.empty() ? e.out + ".manifest.json" : e.manifest);
    });

    // ---- sample ----
    auto* sample = app.add_subcommand("sample", "run a Markov chain");
    ModelFlags sample_model;
    sample_model.attach(sample);
    struct {
        std::string chain = "glauber", init = "default";
        long long steps = 1000, thin = 1, burn_in = 0;
        uint64_t seed = 0;
        double theta = 0.9;
        std::string out = "samples.csv", summary = "summary.json", manifest, pairs_csv;
    } s;
    sample->add_option("--chain", s.chain, "glauber | field | proximal")->capture_default_str();
    sample->add_option("--steps", s.steps, "chain steps");
    sample->add_option("--thin", s.thin, "sample every k-th step");
    sample->add_option("--burn-in", s.burn_in, "discarded prefix");
    sample->add_option("--seed", s.seed, "master seed");
    sample->add_option("--theta", s.theta, "field-dynamics theta")->capture_default_str();
    sample->add_option("--init", s.init, "empty | all-minus | all-plus | random | hex:<mask>");
    sample->add_option("--out", s.out, "samples CSV")->capture_default_str();
    sample->add_option("--summary", s.summary, "summary JSON")->capture_default_str();
    sample->add_option("--pairs-csv", s.pairs_csv, "write pair +1/+1 frequencies as CSV");
    sample->add_option("--manifest", s.manifest, "manifest path");
    sample->callback([&] {
        json config;
        SpinModel m = sample_model.resolve(config);
        RunOptions opt;
        if (s.chain == "glauber")
            opt.chain = ChainKind::Glauber;
        else if (s.chain == "field")
            opt.chain = ChainKind::Field;
        else if (s.chain == "proximal")
            opt.chain = ChainKind::Proximal;
        else
            throw std::invalid_argument("unknown chain: " + s.chain);
        opt.init = s.init;
        opt.steps = s.steps;
        opt.seed = s.seed;
        opt.thin = s.thin;
        opt.burn_in = s.burn_in;
        opt.theta = s.theta;
        opt.track_pairs = !s.pairs_csv.empty();
        config["chain"] = s.chain;
        config["steps"] = s.steps;
        config["seed"] = s.seed;
        config["thin"] = s.thin;
        config["burn_in"] = s.burn_in;
        config["theta"] = s.theta;
        config["init"] = s.init;
        std::ofstream csv(s.out);
        if (!csv) throw std::runtime_error("cannot open for writing: " + s.out);
        csv << "step,config_hex,magnetization\n";
        auto summary = run_chain(m, opt, [&](long long step, std::span<const int8_t> config_span) {
            long long mag = 0;
            for (int8_t x : config_span) mag += x;
            csv << step << ',' << hex_of_config(config_span) << ',' << mag << '\n';
        });
        json out;
        out["steps"] = summary.steps;
        out["samples"] = summary.samples;
        out["mean_plus"] = summary.mean_plus;
        out["mean_magnetization"] = summary.mean_magnetization;
        out["var_magnetization"] = summary.var_magnetization;
        out["inner_budget_warnings"] = summary.inner_budget_warnings;
        if (!s.pairs_csv.empty()) write_matrix_csv(summary.pair_plus, s.pairs_csv);
        write_json(out, s.summary);
        write_manifest("sample", config, s.manifest.empty() ? s.summary + ".manifest.json" : s.manifest);
    });

    // ---- mix ----
    auto* mix = app.add_subcommand("mix", "exact-kernel mixing diagnostics");
    ModelFlags mix_model;
    mix_model.attach(mix);
    struct {
        std::string chain = "glauber";
        double theta = 0.5;
        long long t_max = 1024;
        std::string out = "mix.json", tv_csv, manifest;
    } x;
    mix->add_option("--chain", x.chain, "glauber | field | proximal")->capture_default_str();
    mix->add_option("--theta", x.theta, "field-dynamics theta")->capture_default_str();
    mix->add_option("--t-max", x.t_max, "largest time in the TV curve");
    mix->add_option("--out", x.out, "output JSON")->capture_default_str();
    mix->add_option("--tv-csv", x.tv_csv, "TV curve CSV");
    mix->add_option("--manifest", x.manifest, "manifest path");
    mix->callback([&] {
        json config;
        SpinModel m = mix_model.resolve(config);
        config["chain"] = x.chain;
        DenseKernel k;
        if (x.chain == "glauber")
            k = glauber_kernel(m);
        else if (x.chain == "field")
            k = field_dynamics_kernel(m, x.theta);
        else if (x.chain == "proximal")
            k = proximal_kernel(m);
        else
            throw std::invalid_argument("unknown chain: " + x.chain);
        auto d = exact_distribution(m);
        auto diag = chain_diagnostics(k, d, x.t_max);
        json out;
        out["gap"] = diag.gap;
        out["tensorization_constant"] = diag.tensorization_constant;
        out["reversibility_residual"] = diag.reversibility_residual;
        write_json(out, x.out);
        if (!x.tv_csv.empty()) {
            std::ofstream csv(x.tv_csv);
            csv << "t,tv\n";
            for (auto [t, tv] : diag.tv_curve) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%lld,%.17g\n", t, tv);
                csv << buf;
            }
        }
        write_manifest("mix", config, x.manifest.empty() ? x.out + ".manifest.json" : x.manifest);
    });

    // ---- spectral ----
    auto* spectral = app.add_subcommand("spectral", "spectral-independence estimators");
    ModelFlags spec_model;
    spec_model.attach(spectral);
    struct {
        bool si = false, over_pinnings = false;
        int coupling_vertex = -1;
        long long trials = 10000;
        uint64_t seed = 0;
        std::string rank_one_u, quadratic;
        long long sweeps = 0;
        bool mc = false;
        std::string out = "spectral.json", manifest;
    } sp;
    spectral->add_flag("--si", sp.si, "exact lambda_max of the influence matrix");
    spectral->add_flag("--over-pinnings", sp.over_pinnings, "maximize over pinnings");
    spectral->add_option("--coupling-vertex", sp.coupling_vertex, "coupling-independence estimate at this vertex");
    spectral->add_option("--trials", sp.trials, "Monte-Carlo trials");
    spectral->add_option("--seed", sp.seed, "master seed");
    spectral->add_option("--rank-one-u", sp.rank_one_u, "comma list: rank-one SI series bound");
    spectral->add_option("--quadratic", sp.quadratic, "'bipartite-sign' | 'ones' | comma list of +-1");
    spectral->add_flag("--mc", sp.mc, "estimate the quadratic form by Monte Carlo");
    spectral->add_option("--sweeps", sp.sweeps, "MC sweeps for --mc");
    spectral->add_option("--out", sp.out, "output JSON")->capture_default_str();
    spectral->add_option("--manifest", sp.manifest, "manifest path");
    spectral->callback([&] {
        json config, out;
        if (!sp.rank_one_u.empty()) {
            auto u = parse_csv_doubles(sp.rank_one_u);
            out["rank_one_si_bound"] = rank_one_si_bound(u);
            config["rank_one_u"] = sp.rank_one_u;
        }
        if (sp.si || sp.coupling_vertex >= 0 || !sp.quadratic.empty()) {
            SpinModel m = spec_model.resolve(config);
            if (sp.si) out["si_lambda_max"] = si_lambda_max(m, sp.over_pinnings);
            if (sp.coupling_vertex >= 0) {
                auto est = coupling_independence_estimate(m, sp.coupling_vertex, sp.trials, sp.seed);
                out["coupling_independence"] = {{"mean", est.mean}, {"stderr", est.stderr_}, {"trials", est.trials}};
            }
            if (!sp.quadratic.empty()) {
                std::vector<int> s(static_cast<size_t>(m.n()), 1);
                if (sp.quadratic == "bipartite-sign") {
                    if (!m.graph.bipartition) throw std::invalid_argument("--quadratic bipartite-sign needs a bipartition");
                    for (int v = 0; v < m.n(); ++v)
                        if ((*m.graph.bipartition)[static_cast<size_t>(v)]) s[static_cast<size_t>(v)] = -1;
                } else if (sp.quadratic != "ones") {
                    auto vals = parse_csv_doubles(sp.quadratic);
                    for (size_t i = 0; i < vals.size() && i < s.size(); ++i) s[i] = vals[i] < 0 ? -1 : 1;
                }
                if (sp.mc) {
                    QuadOptions qopt;
                    qopt.sweeps = sp.sweeps;
                    qopt.seed = sp.seed;
                    auto est = estimate_covariance_quadratic(m, s, qopt);
                    out["quadratic_mc"] = {{"value", est.value}, {"stderr", est.stderr_}, {"samples", est.samples}};
                } else {
                    out["quadratic_exact"] = si_quadratic_lower(m, s);
                }
            }
        }
        write_json(out, sp.out);
        write_manifest("spectral", config, sp.manifest.empty() ? sp.out + ".manifest.json" : sp.manifest);
    });

    // ---- percolate ----
    auto* percolate = app.add_subcommand("percolate", "branching-process machinery");
    struct {
        int d = 2;
        double p = 0.5;
        long long pmf_max = 0;
        bool extinction = false, total_mass = false;
        long long tail_lo = 0, tail_hi = 0;
        long long mc_trials = 0, mc_cap = 100000;
        uint64_t seed = 0;
        std::string out = "percolate.csv", json_out = "percolate.json", manifest, mc_cdf;
    } pc;
    percolate->add_option("--d", pc.d, "branching arity");
    percolate->add_option("--p", pc.p, "bond probability");
    percolate->add_option("--pmf-max", pc.pmf_max, "write pmf CSV for ell = 1..N");
    percolate->add_flag("--extinction", pc.extinction, "extinction probability");
    percolate->add_flag("--total-mass", pc.total_mass, "sum of the pmf");
    percolate->add_option("--tail-lo", pc.tail_lo, "tail-exponent fit window start");
    percolate->add_option("--tail-hi", pc.tail_hi, "tail-exponent fit window end");
    percolate->add_option("--mc-trials", pc.mc_trials, "Monte-Carlo exploration runs");
    percolate->add_option("--mc-cap", pc.mc_cap, "exploration cap per run");
    percolate->add_option("--mc-cdf", pc.mc_cdf, "empirical CDF CSV for the runs");
    percolate->add_option("--seed", pc.seed, "master seed");
    percolate->add_option("--out", pc.out, "pmf CSV path")->capture_default_str();
    percolate->add_option("--json-out", pc.json_out, "output JSON")->capture_default_str();
    percolate->add_option("--manifest", pc.manifest, "manifest path");
    percolate->callback([&] {
        json config{{"d", pc.d}, {"p", pc.p}};
        json out;
        if (pc.pmf_max > 0) {
            std::ofstream csv(pc.out);
            if (!csv) throw std::runtime_error("cannot open for writing: " + pc.out);
            csv << "ell,pmf\n";
            for (long long ell = 1; ell <= pc.pmf_max; ++ell) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%lld,%.17g\n", ell, ary_percolation_pmf(pc.d, pc.p, ell));
                csv << buf;
            }
            out["pmf_csv"] = pc.out;
        }
        if (pc.extinction) {
            double gamma = extinction_probability(pc.d, pc.p);
            out["extinction_probability"] = gamma;
            out["survival_probability"] = 1.0 - gamma;
        }
        if (pc.total_mass) out["pmf_total_mass"] = ary_pmf_total_mass(pc.d, pc.p);
        if (pc.tail_hi > pc.tail_lo && pc.tail_lo > 0)
            out["tail_exponent"] = ary_pmf_tail_exponent(pc.d, pc.p, pc.tail_lo, pc.tail_hi);
        if (pc.mc_trials > 0) {
            std::map<long long, long long> hist;
            long long infinite = 0;
            for (long long t = 0; t < pc.mc_trials; ++t) {
                CounterRng rng(pc.seed, static_cast<uint64_t>(t), 13);
                auto r = explore_ary(pc.d, pc.p, rng, pc.mc_cap);
                if (r.infinite_flag)
                    ++infinite;
                else
                    hist[r.explored] += 1;
            }
            out["mc_trials"] = pc.mc_trials;
            out["mc_capped_runs"] = infinite;
            if (!pc.mc_cdf.empty()) {
                std::ofstream csv(pc.mc_cdf);
                if (!csv) throw std::runtime_error("cannot open for writing: " + pc.mc_cdf);
                csv << "ell,cdf\n";
                long long acc = 0;
                for (auto [ell, cnt] : hist) {
                    acc += cnt;
                    char buf[64];
                    std::snprintf(buf, sizeof buf, "%lld,%.17g\n", ell,
                                  static_cast<double>(acc) / static_cast<double>(pc.mc_trials));
                    csv << buf;
                }
            }
        }
        write_json(out, pc.json_out);
        write_manifest("percolate", config, pc.manifest.empty() ? pc.json_out + ".manifest.json" : pc.manifest);
    });

    // ---- count ----
    auto* count = app.add_subcommand("count", "deterministic sub-exponential counting");
    ModelFlags count_model;
    count_model.attach(count);
    struct {
        double theta = 0.5, eps = 0.05, eps0 = 0.05;
        std::string oracle = "weitz";
        std::string out = "count.json", manifest;
    } c;
    count->add_option("--theta", c.theta, "tilt parameter")->capture_default_str();
    count->add_option("--eps", c.eps, "truncation error")->capture_default_str();
    count->add_option("--eps0", c.eps0, "per-term oracle error")->capture_default_str();
    count->add_option("--oracle", c.oracle, "weitz | exact")->capture_default_str();
    count->add_option("--out", c.out, "output JSON")->capture_default_str();
    count->add_option("--manifest", c.manifest, "manifest path");
    count->callback([&] {
        json config;
        SpinModel m = count_model.resolve(config);
        config["theta"] = c.theta;
        config["eps"] = c.eps;
        config["eps0"] = c.eps0;
        config["oracle"] = c.oracle;
        auto plan = make_counting_plan(m.n(), c.theta, c.eps, c.eps0,
                                       c.oracle == "exact" ? CountingOracle::Exact : CountingOracle::Weitz);
        auto t0 = std::chrono::steady_clock::now();
        auto cert = deterministic_count(m, plan);
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json out;
        out["log_Z_hat"] = cert.log_z_hat;
        out["k"] = cert.k;
        out["n_terms"] = cert.terms;
        out["epsilon"] = c.eps;
        out["epsilon0"] = c.eps0;
        out["max_depth_used"] = cert.max_depth_used;
        out["wall_time"] = wall;
        write_json(out, c.out);
        write_manifest("count", config, c.manifest.empty() ? c.out + ".manifest.json" : c.manifest);
    });

    // ---- lowerbound ----
    auto* lower = app.add_subcommand("lowerbound", "generating-polynomial lower-bound machinery");
    struct {
        std::string family = "ising";
        int n = 100, delta = 3;
        bool checksum = false, gaussian_window = false, u_critical = false;
        double anti_eta = -1.0;
        std::string alpha_csv, u_at;
        std::string out = "lowerbound.json", manifest;
    } lb;
    lower->add_option("--family", lb.family, "hardcore | ising")->capture_default_str();
    lower->add_option("--n", lb.n, "table size parameter");
    lower->add_option("--delta", lb.delta, "degree");
    lower->add_flag("--checksum", lb.checksum, "evaluate-at-1 identities");
    lower->add_flag("--gaussian-window", lb.gaussian_window, "ratio window around the center of mass");
    lower->add_flag("--u-critical", lb.u_critical, "optimization-landscape critical points");
    lower->add_option("--anti-concentration", lb.anti_eta, "tail-mass ratio at this eta");
    lower->add_option("--alpha-csv", lb.alpha_csv, "export alpha table (gz if *.gz)");
    lower->add_option("--u-at", lb.u_at, "evaluate U at comma-separated rho");
    lower->add_option("--out", lb.out, "output JSON")->capture_default_str();
    lower->add_option("--manifest", lb.manifest, "manifest path");
    lower->callback([&] {
        json config{{"family", lb.family}, {"n", lb.n}, {"delta", lb.delta}};
        json out;
        const bool needs_tables = lb.checksum || lb.gaussian_window || lb.anti_eta >= 0.0 || !lb.alpha_csv.empty();
        if (lb.family == "hardcore") {
            if (needs_tables) {
                HardcoreCoeffTables t(lb.n, lb.delta);
                if (lb.checksum) {
                    auto [s1, c1] = t.nstar_checksum();
                    auto [s2, c2] = t.dstar_checksum();
                    auto [s3, c3] = t.d_raw_checksum();
                    out["nstar_checksum"] = {{"summed", s1}, {"closed_form", c1}};
                    out["dstar_checksum"] = {{"summed", s2}, {"closed_form", c2}};
                    out["d_raw_checksum"] = {{"summed", s3}, {"closed_form", c3}};
                }
                if (lb.anti_eta >= 0.0) out["anti_concentration_ratio"] = t.anti_concentration_ratio(lb.anti_eta);
                if (lb.gaussian_window) {
                    auto w = t.gaussian_ratio_window();
                    out["gaussian_window"] = {{"log_min_ratio", w.log_min_ratio},
                                              {"log_max_ratio", w.log_max_ratio},
                                              {"max_over_min", std::exp(w.log_max_ratio - w.log_min_ratio)},
                                              {"points", w.points}};
                }
                if (!lb.alpha_csv.empty()) t.write_alpha_csv(lb.alpha_csv);
            }
            if (lb.u_critical) {
                auto arg = argmax_U_sym_hardcore(lb.delta);
                out["u_sym_argmax"] = {arg[0], arg[1]};
                out["u_sym_max"] = evaluate_U_sym_hardcore(arg[0], arg[1], lb.delta);
            }
            if (!lb.u_at.empty()) {
                auto r = parse_csv_doubles(lb.u_at);
                if (r.size() != 4) throw std::invalid_argument("--u-at needs 4 components for hardcore");
                out["U"] = evaluate_U_hardcore({r[0], r[1], r[2], r[3]}, lb.delta);
            }
        } else if (lb.family == "ising") {
            if (needs_tables) {
                IsingCoeffTables t(lb.n, lb.delta);
                if (lb.checksum) {
                    auto [s1, c1] = t.n_checksum();
                    auto [s2, c2] = t.d_checksum();
                    out["n_checksum"] = {{"summed", s1}, {"closed_form", c1}};
                    out["d_checksum"] = {{"summed", s2}, {"closed_form", c2}};
                }
                if (lb.anti_eta >= 0.0) out["anti_concentration_ratio"] = t.anti_concentration_ratio(lb.anti_eta);
                if (lb.gaussian_window) {
                    auto w = t.gaussian_ratio_window();
                    out["gaussian_window"] = {{"log_min_ratio", w.log_min_ratio},
                                              {"log_max_ratio", w.log_max_ratio},
                                              {"max_over_min", std::exp(w.log_max_ratio - w.log_min_ratio)},
                                              {"points", w.points}};
                }
                if (!lb.alpha_csv.empty()) t.write_alpha_csv(lb.alpha_csv);
            }
            if (lb.u_critical) {
                auto cp = critical_point_ising(lb.delta);
                out["u_critical_point"] = {cp[0], cp[1]};
                out["u_at_critical"] = evaluate_U_ising({cp[0], cp[1]}, lb.delta);
            }
            if (!lb.u_at.empty()) {
                auto r = parse_csv_doubles(lb.u_at);
                if (r.size() != 2) throw std::invalid_argument("--u-at needs 2 components for ising");
                out["U"] = evaluate_U_ising({r[0], r[1]}, lb.delta);
            }
        } else {
            throw std::invalid_argument("unknown family: " + lb.family);
        }
        write_json(out, lb.out);
        write_manifest("lowerbound", config, lb.manifest.empty() ? lb.out + ".manifest.json" : lb.manifest);
    });

    // CLI11's vector-parse expects the arguments reversed.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    (void)threads;  // worker count is informational: every path is stream-indexed
    return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args) {
    try {
        args = apply_config_file(std::move(args));
        return dispatch(std::move(args));
    } catch (const BudgetError& e) {
        std::cerr << "budget error: " << e.what() << '\n';
        return 3;
    } catch (const EmptySupportError& e) {
        std::cerr << "empty support: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace spinlab
