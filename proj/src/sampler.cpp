#include "spinlab/sampler.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "spinlab/exact.hpp"
#include "spinlab/logspace.hpp"

namespace spinlab {

namespace {

bool hardcore_config_valid(const SpinModel& model, std::span<const int8_t> config) {
    for (auto [u, v] : model.graph.edges)
        if (config[static_cast<size_t>(u)] > 0 && config[static_cast<size_t>(v)] > 0) return false;
    return true;
}

std::vector<int8_t> parse_hex_config(const std::string& hex, int n) {
    std::vector<int8_t> config(static_cast<size_t>(n), -1);
    uint64_t mask = std::stoull(hex, nullptr, 16);
    for (int v = 0; v < n; ++v) config[static_cast<size_t>(v)] = (mask >> v & 1) ? 1 : -1;
    return config;
}

double local_field(const SpinModel& model, std::span<const int8_t> config, int v) {
    if (model.kind == ModelKind::IsingGraph) {
        double s = 0.0;
        for (int u : model.graph.adj[static_cast<size_t>(v)]) s += config[static_cast<size_t>(u)];
        return model.beta * s + model.fields[static_cast<size_t>(v)];
    }
    double s = 0.0;
    const int n = model.n();
    for (int u = 0; u < n; ++u)
        if (u != v) s += model.J(v, u) * config[static_cast<size_t>(u)];
    return s + model.fields[static_cast<size_t>(v)];
}

}  // namespace

ChainState init_chain_state(const SpinModel& model, const std::string& init, uint64_t seed, uint64_t chain_index) {
    const int n = model.n();
    ChainState st;
    st.rng = CounterRng(seed, chain_index, /*purpose=*/7);
    st.step = 0;
    std::string mode = init;
    if (mode == "default") mode = model.kind == ModelKind::Hardcore ? "empty" : "all-minus";
    if (mode == "empty" || mode == "all-minus") {
        st.config.assign(static_cast<size_t>(n), -1);
    } else if (mode == "all-plus") {
        st.config.assign(static_cast<size_t>(n), 1);
        if (model.kind == ModelKind::Hardcore && !hardcore_config_valid(model, st.config))
            throw std::invalid_argument("init_chain_state: all-plus is not an independent set");
    } else if (mode == "random") {
        st.config.assign(static_cast<size_t>(n), -1);
        if (model.kind == ModelKind::Hardcore) {
            // Random independent set: greedy over a random vertex order.
            for (int v = 0; v < n; ++v) {
                if (!st.rng.next_bernoulli(0.5)) continue;
                bool blocked = false;
                for (int u : model.graph.adj[static_cast<size_t>(v)])
                    if (st.config[static_cast<size_t>(u)] > 0) blocked = true;
                if (!blocked) st.config[static_cast<size_t>(v)] = 1;
            }
        } else {
            for (int v = 0; v < n; ++v) st.config[static_cast<size_t>(v)] = st.rng.next_bernoulli(0.5) ? 1 : -1;
        }
    } else if (mode.rfind("hex:", 0) == 0) {
        st.config = parse_hex_config(mode.substr(4), n);
        if (model.kind == ModelKind::Hardcore && !hardcore_config_valid(model, st.config))
            throw std::invalid_argument("init_chain_state: hex config is not an independent set");
    } else {
        throw std::invalid_argument("init_chain_state: unknown init mode " + init);
    }
    return st;
}

void glauber_step(const SpinModel& model, ChainState& state) {
    const int n = model.n();
    assert(model.kind != ModelKind::Hardcore || hardcore_config_valid(model, state.config));
    int v = static_cast<int>(state.rng.next_below(static_cast<uint64_t>(n)));
    if (model.kind == ModelKind::Hardcore) {
        bool blocked = false;
        for (int u : model.graph.adj[static_cast<size_t>(v)])
            if (state.config[static_cast<size_t>(u)] > 0) {
                blocked = true;
                break;
            }
        if (!blocked) {
            double lam = model.fugacity[static_cast<size_t>(v)];
            state.config[static_cast<size_t>(v)] = state.rng.next_bernoulli(lam / (1.0 + lam)) ? 1 : -1;
        }
    } else {
        double a = local_field(model, state.config, v);
        double p_plus = 1.0 / (1.0 + std::exp(-2.0 * a));
        state.config[static_cast<size_t>(v)] = state.rng.next_bernoulli(p_plus) ? 1 : -1;
    }
    state.step += 1;
}

namespace {

// Exact sample from a hardcore model restricted to `verts` (a small connected
// component) by enumerating its independent sets.
void exact_component_sample(const SpinModel& tilted, std::span<const int> verts, std::vector<int8_t>& out,
                            CounterRng& rng) {
    const int k = static_cast<int>(verts.size());
    std::vector<uint32_t> nbr(static_cast<size_t>(k), 0);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b)
            if (a != b && tilted.graph.has_edge(verts[static_cast<size_t>(a)], verts[static_cast<size_t>(b)]))
                nbr[static_cast<size_t>(a)] |= 1u << b;
    std::vector<double> logw;
    std::vector<uint32_t> masks;
    const auto size = static_cast<uint32_t>(1) << k;
    for (uint32_t mask = 0; mask < size; ++mask) {
        double acc = 0.0;
        bool ok = true;
        for (uint32_t rest = mask; rest;) {
            int a = std::countr_zero(rest);
            rest &= rest - 1;
            if (nbr[static_cast<size_t>(a)] & mask) {
                ok = false;
                break;
            }
            acc += std::log(tilted.fugacity[static_cast<size_t>(verts[static_cast<size_t>(a)])]);
        }
        if (ok) {
            logw.push_back(acc);
            masks.push_back(mask);
        }
    }
    double lz = logsumexp(logw);
    double u = rng.next_double();
    double cum = 0.0;
    uint32_t chosen = masks.back();
    for (size_t i = 0; i < masks.size(); ++i) {
        cum += std::exp(logw[i] - lz);
        if (u < cum) {
            chosen = masks[i];
            break;
        }
    }
    for (int a = 0; a < k; ++a)
        out[static_cast<size_t>(verts[static_cast<size_t>(a)])] = (chosen >> a & 1) ? 1 : -1;
}

}  // namespace

FieldStepMeta field_dynamics_step(const SpinModel& model, ChainState& state, const FieldDynOptions& opt) {
    if (model.kind != ModelKind::Hardcore) throw std::invalid_argument("field_dynamics_step: hardcore models only");
    if (!(opt.theta > 0.0 && opt.theta < 1.0)) throw std::invalid_argument("field_dynamics_step: theta in (0,1)");
    const int n = model.n();
    FieldStepMeta meta;

    // Noising: keep each occupied vertex independently with probability theta.
    std::vector<int8_t> survivors(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        if (state.config[static_cast<size_t>(v)] > 0 && state.rng.next_bernoulli(opt.theta))
            survivors[static_cast<size_t>(v)] = 1;

    // Denoising target: (1-theta)-tilted model conditioned on the survivors.
    SpinModel tilted = tilt(model, opt.theta);
    std::vector<int8_t> out(static_cast<size_t>(n), -1);
    std::vector<char> decided(static_cast<size_t>(n), 0);
    for (int v = 0; v < n; ++v)
        if (survivors[static_cast<size_t>(v)] > 0) {
            out[static_cast<size_t>(v)] = 1;
            decided[static_cast<size_t>(v)] = 1;
            for (int u : model.graph.adj[static_cast<size_t>(v)]) decided[static_cast<size_t>(u)] = 1;  // forced out
        }

    // Free vertices resample component by component.
    std::vector<int> comp;
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (int v0 = 0; v0 < n; ++v0) {
        if (decided[static_cast<size_t>(v0)] || seen[static_cast<size_t>(v0)]) continue;
        comp.clear();
        std::vector<int> stack = {v0};
        seen[static_cast<size_t>(v0)] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            comp.push_back(v);
            for (int u : model.graph.adj[static_cast<size_t>(v)])
                if (!decided[static_cast<size_t>(u)] && !seen[static_cast<size_t>(u)]) {
                    seen[static_cast<size_t>(u)] = 1;
                    stack.push_back(u);
                }
        }
        if (static_cast<int>(comp.size()) <= opt.exact_component_cap) {
            exact_component_sample(tilted, comp, out, state.rng);
        } else {
            meta.inner_exact = false;
            // Tilted Glauber restricted to the component, empty start. Free
            // components only touch forced-out or same-component vertices, so
            // the occupancy check can read `out` directly.
            auto nf = static_cast<double>(comp.size());
            auto steps = static_cast<long long>(opt.inner_steps_factor * nf * std::max(1.0, std::log(nf)));
            meta.inner_steps += steps;
            for (long long it = 0; it < steps; ++it) {
                int v = comp[static_cast<size_t>(state.rng.next_below(comp.size()))];
                bool blocked = false;
                for (int u : model.graph.adj[static_cast<size_t>(v)])
                    if (out[static_cast<size_t>(u)] > 0) {
                        blocked = true;
                        break;
                    }
                if (!blocked) {
                    double lam = tilted.fugacity[static_cast<size_t>(v)];
                    out[static_cast<size_t>(v)] = state.rng.next_bernoulli(lam / (1.0 + lam)) ? 1 : -1;
                }
            }
        }
    }
    state.config = std::move(out);
    state.step += 1;
    assert(hardcore_config_valid(model, state.config));
    return meta;
}

void proximal_step(const SpinModel& model, ChainState& state, const Eigen::MatrixXd& L) {
    if (model.kind == ModelKind::Hardcore) throw std::invalid_argument("proximal_step: Ising models only");
    const int n = model.n();
    const int r = static_cast<int>(L.rows());
    Eigen::VectorXd x(n);
    for (int v = 0; v < n; ++v) x[v] = state.config[static_cast<size_t>(v)];
    Eigen::VectorXd y = L * x;
    for (int i = 0; i < r; ++i) y[i] += state.rng.next_gaussian();
    Eigen::VectorXd a = L.transpose() * y;
    for (int v = 0; v < n; ++v) {
        double logit = 2.0 * (model.fields[static_cast<size_t>(v)] + a[v]);
        double p_plus = 1.0 / (1.0 + std::exp(-logit));
        state.config[static_cast<size_t>(v)] = state.rng.next_bernoulli(p_plus) ? 1 : -1;
    }
    state.step += 1;
}

RunSummary run_chain(const SpinModel& model, const RunOptions& opt, const SampleSink& sink) {
    const int n = model.n();
    ChainState st = init_chain_state(model, opt.init, opt.seed);
    if (model.kind == ModelKind::Hardcore && !hardcore_config_valid(model, st.config))
        throw std::invalid_argument("run_chain: initial configuration is not an independent set");

    Eigen::MatrixXd L;
    if (opt.chain == ChainKind::Proximal) L = factor_interaction(model);
    FieldDynOptions fopt = opt.field_opt.value_or(FieldDynOptions{opt.theta, 20, 50.0});

    RunSummary sum;
    sum.mean_plus.assign(static_cast<size_t>(n), 0.0);
    if (opt.track_pairs) sum.pair_plus = Eigen::MatrixXd::Zero(n, n);
    double mag_sum = 0.0, mag_sq = 0.0;

    for (long long t = 0; t < opt.steps; ++t) {
        switch (opt.chain) {
            case ChainKind::Glauber:
                glauber_step(model, st);
                break;
            case ChainKind::Field: {
                auto meta = field_dynamics_step(model, st, fopt);
                if (!meta.inner_exact) sum.inner_budget_warnings += 1;
                break;
            }
            case ChainKind::Proximal:
                proximal_step(model, st, L);
                break;
        }
        if (st.step <= opt.burn_in) continue;
        if ((st.step - opt.burn_in) % opt.thin != 0) continue;
        sum.samples += 1;
        double mag = 0.0;
        for (int v = 0; v < n; ++v) {
            if (st.config[static_cast<size_t>(v)] > 0) sum.mean_plus[static_cast<size_t>(v)] += 1.0;
            mag += st.config[static_cast<size_t>(v)];
        }
        mag_sum += mag;
        mag_sq += mag * mag;
        if (opt.track_pairs) {
            for (int i = 0; i < n; ++i)
                if (st.config[static_cast<size_t>(i)] > 0)
                    for (int j = 0; j < n; ++j)
                        if (st.config[static_cast<size_t>(j)] > 0) sum.pair_plus(i, j) += 1.0;
        }
        if (sink) sink(st.step, st.config);
    }
    sum.steps = st.step;
    if (sum.samples > 0) {
        for (double& p : sum.mean_plus) p /= static_cast<double>(sum.samples);
        sum.mean_magnetization = mag_sum / static_cast<double>(sum.samples);
        sum.var_magnetization =
            mag_sq / static_cast<double>(sum.samples) - sum.mean_magnetization * sum.mean_magnetization;
        if (opt.track_pairs) sum.pair_plus /= static_cast<double>(sum.samples);
    }
    return sum;
}

QuadEstimate estimate_covariance_quadratic(const SpinModel& model, std::span<const int> s, const QuadOptions& opt) {
    const int n = model.n();
    if (static_cast<int>(s.size()) != n) throw std::invalid_argument("estimate_covariance_quadratic: s size mismatch");
    for (int sv : s)
        if (sv != 1 && sv != -1) throw std::invalid_argument("estimate_covariance_quadratic: s entries must be +-1");

    long long sweeps = opt.sweeps > 0 ? opt.sweeps : 3000 + 100LL * static_cast<long long>(std::sqrt(n));
    long long burn = opt.burn_in_sweeps > 0 ? opt.burn_in_sweeps : sweeps / 5;
    ChainState st = init_chain_state(model, "default", opt.seed);

    for (long long t = 0; t < burn * n; ++t) glauber_step(model, st);

    const int batches = std::max(2, opt.batches);
    long long per_batch = std::max<long long>(1, sweeps / batches);
    long long total = batches * per_batch;
    // Batch variances are taken around the global mean; per-batch centering
    // would clip the slow critical fluctuations and bias the variance down.
    std::vector<double> stats(static_cast<size_t>(total));
    for (long long i = 0; i < total; ++i) {
        for (int t = 0; t < n; ++t) glauber_step(model, st);
        double stat = 0.0;
        for (int v = 0; v < n; ++v) stat += s[static_cast<size_t>(v)] * st.config[static_cast<size_t>(v)];
        stats[static_cast<size_t>(i)] = stat;
    }
    double mean = 0.0;
    for (double x : stats) mean += x;
    mean /= static_cast<double>(total);
    std::vector<double> batch_var(static_cast<size_t>(batches), 0.0);
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (long long i = 0; i < per_batch; ++i) {
            double d = stats[static_cast<size_t>(b * per_batch + i)] - mean;
            acc += d * d;
        }
        batch_var[static_cast<size_t>(b)] = acc / static_cast<double>(per_batch);
    }
    double mean_v = 0.0;
    for (double v : batch_var) mean_v += v;
    mean_v /= batches;
    double sd = 0.0;
    for (double v : batch_var) sd += (v - mean_v) * (v - mean_v);
    sd = std::sqrt(sd / (batches - 1.0) / batches);
    QuadEstimate est;
    est.value = mean_v / n;
    est.stderr_ = sd / n;
    est.samples = total;
    return est;
}

}  // namespace spinlab
