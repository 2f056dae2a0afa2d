#include "spinlab/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinlab/logspace.hpp"

namespace spinlab {

namespace {

struct SawDpContext {
    const Graph* g;
    double beta;
    std::span<const double> fields;
    int cap;    // subtree node budget for exact influence
    int count;  // nodes visited so far
};

double field_of(const SawDpContext& ctx, int v) {
    return ctx.fields.empty() ? 0.0 : ctx.fields[static_cast<size_t>(v)];
}

// Log partition functions (log Z(+), log Z(-)) of the SAW subtree rooted at
// the walk extension `u`, spin of u fixed. Returns false when the subtree
// exceeds the node budget. `walk` holds v_0..v_{l-1}; u extends it.
bool saw_subtree_dp(SawDpContext& ctx, std::vector<int>& walk, std::vector<char>& on_walk, int u, double& log_zp,
                    double& log_zm) {
    if (++ctx.count > ctx.cap) return false;
    double h = field_of(ctx, u);
    if (on_walk[static_cast<size_t>(u)]) {
        // Closure leaf: pinned by the order rule (default order = vertex id).
        int i = -1;
        for (int k = 0; k < static_cast<int>(walk.size()); ++k)
            if (walk[static_cast<size_t>(k)] == u) {
                i = k;
                break;
            }
        int succ = walk[static_cast<size_t>(i + 1)];
        int last = walk.back();
        int8_t pin = succ < last ? int8_t{1} : int8_t{-1};
        log_zp = pin > 0 ? h : kNegInf;
        log_zm = pin > 0 ? kNegInf : -h;
        return true;
    }
    int prev = walk.back();
    walk.push_back(u);
    on_walk[static_cast<size_t>(u)] = 1;
    double zp = h, zm = -h;
    bool ok = true;
    bool prev_used = false;
    for (int w : ctx.g->adj[static_cast<size_t>(u)]) {
        if (w == prev && !prev_used) {
            prev_used = true;
            continue;
        }
        double cp, cm;
        if (!saw_subtree_dp(ctx, walk, on_walk, w, cp, cm)) {
            ok = false;
            break;
        }
        zp += log_add(cp + ctx.beta, cm - ctx.beta);
        zm += log_add(cp - ctx.beta, cm + ctx.beta);
    }
    on_walk[static_cast<size_t>(u)] = 0;
    walk.pop_back();
    log_zp = zp;
    log_zm = zm;
    return ok;
}

struct ExploreContext {
    const Graph* g;
    double beta;
    std::span<const double> fields;
    CounterRng* rng;
    long long cap;
    int exact_subtree_cap;
    long long explored = 0;
    bool infinite = false;
    bool bound_used = false;
};

// Explore the SAW-tree node at the end of `walk`; counts it and recursively
// explores activated children. Recursion depth is bounded by the walk length.
void explore_node(ExploreContext& ctx, std::vector<int>& walk, std::vector<char>& on_walk, bool is_closure_leaf) {
    ctx.explored += 1;
    if (ctx.explored >= ctx.cap) {
        ctx.infinite = true;
        return;
    }
    if (is_closure_leaf) return;
    int w = walk.back();
    int prev = walk.size() >= 2 ? walk[walk.size() - 2] : -1;
    const double p_bound = std::fabs(std::tanh(ctx.beta));
    bool prev_used = false;
    for (int u : ctx.g->adj[static_cast<size_t>(w)]) {
        if (ctx.infinite) return;
        if (u == prev && !prev_used) {
            prev_used = true;
            continue;
        }
        bool closure = on_walk[static_cast<size_t>(u)] != 0;
        double p_act;
        if (closure) {
            // A pinned leaf is deterministic; its exact influence is zero.
            p_act = 0.0;
        } else {
            SawDpContext dp{ctx.g, ctx.beta, ctx.fields, ctx.exact_subtree_cap, 0};
            double zp, zm;
            if (saw_subtree_dp(dp, walk, on_walk, u, zp, zm)) {
                // |Pr[u=+|w=+] - Pr[u=+|w=-]| from the subtree ratio.
                double p1 = 1.0 / (1.0 + std::exp(zm - zp - 2.0 * ctx.beta));
                double p2 = 1.0 / (1.0 + std::exp(zm - zp + 2.0 * ctx.beta));
                p_act = std::fabs(p1 - p2);
            } else {
                ctx.bound_used = true;
                p_act = p_bound;
            }
        }
        if (p_act > 0.0 && ctx.rng->next_bernoulli(p_act)) {
            if (closure) {
                walk.push_back(u);
                explore_node(ctx, walk, on_walk, true);
                walk.pop_back();
            } else {
                walk.push_back(u);
                on_walk[static_cast<size_t>(u)] = 1;
                explore_node(ctx, walk, on_walk, false);
                on_walk[static_cast<size_t>(u)] = 0;
                walk.pop_back();
            }
        }
    }
}

}  // namespace

ExploreResult explore_saw(const Graph& g, int v, double beta, CounterRng& rng, long long cap, int exact_subtree_cap,
                          std::span<const double> fields) {
    if (v < 0 || v >= g.n_vertices) throw std::invalid_argument("explore_saw: root out of range");
    if (!fields.empty() && static_cast<int>(fields.size()) != g.n_vertices)
        throw std::invalid_argument("explore_saw: fields size mismatch");
    ExploreContext ctx{&g, beta, fields, &rng, cap, exact_subtree_cap};
    std::vector<int> walk = {v};
    std::vector<char> on_walk(static_cast<size_t>(g.n_vertices), 0);
    on_walk[static_cast<size_t>(v)] = 1;
    explore_node(ctx, walk, on_walk, false);
    return {ctx.explored, ctx.infinite, ctx.bound_used};
}

namespace {
ExploreResult explore_branching(int root_children, int inner_children, double p, CounterRng& rng, long long cap) {
    long long active = 1, explored = 0;
    bool first = true;
    while (active > 0) {
        explored += 1;
        if (explored >= cap) return {explored, true, false};
        active -= 1;
        int fanout = first ? root_children : inner_children;
        first = false;
        for (int c = 0; c < fanout; ++c)
            if (rng.next_bernoulli(p)) active += 1;
    }
    return {explored, false, false};
}
}  // namespace

ExploreResult explore_ary(int d, double p, CounterRng& rng, long long cap) {
    return explore_branching(d, d, p, rng, cap);
}

ExploreResult PercolationSpec::sample(CounterRng& rng, long long cap) const {
    switch (variant) {
        case Variant::Ary: return explore_ary(d, p, rng, cap);
        case Variant::Regular: return explore_regular(d + 1, p, rng, cap);
        case Variant::Saw:
            if (!graph) throw std::invalid_argument("PercolationSpec: Saw variant needs a graph");
            return explore_saw(*graph, root, beta, rng, cap);
    }
    throw std::logic_error("PercolationSpec: unreachable");
}

ExploreResult explore_regular(int delta, double p, CounterRng& rng, long long cap) {
    return explore_branching(delta, delta - 1, p, rng, cap);
}

double ary_percolation_log_pmf(int d, double p, long long ell) {
    if (d < 1 || !(p >= 0.0 && p < 1.0)) throw std::invalid_argument("ary_percolation_pmf: invalid parameters");
    if (ell < 1) return kNegInf;
    return -std::log(static_cast<double>(ell)) + log_binomial_pmf(d * ell, ell - 1, p);
}

double ary_percolation_pmf(int d, double p, long long ell) { return std::exp(ary_percolation_log_pmf(d, p, ell)); }

double ary_pmf_total_mass(int d, double p, long long terms) {
    double sum = 0.0;
    for (long long ell = 1; ell <= terms; ++ell) {
        double t = ary_percolation_pmf(d, p, ell);
        sum += t;
        if (ell > 64 && t < 1e-18) return sum;  // geometric regime converged
    }
    if (std::fabs(d * p - 1.0) < 1e-9) {
        // Critical tail: pmf ~ ell^{-3/2} / sqrt(2 pi v), v = d p (1-p);
        // midpoint integral for sum_{ell > L} ell^{-3/2}.
        double v = d * p * (1.0 - p);
        double c = 1.0 / std::sqrt(2.0 * M_PI * v);
        sum += c * 2.0 / std::sqrt(static_cast<double>(terms) + 0.5);
    }
    return sum;
}

double ary_pmf_tail_exponent(int d, double p, long long lo, long long hi, int points) {
    if (lo < 1 || hi <= lo || points < 2) throw std::invalid_argument("ary_pmf_tail_exponent: bad range");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    long long prev = -1;
    for (int i = 0; i < points; ++i) {
        double frac = static_cast<double>(i) / (points - 1);
        auto ell = static_cast<long long>(std::llround(std::exp(std::log(static_cast<double>(lo)) +
                                                               frac * (std::log(static_cast<double>(hi)) -
                                                                       std::log(static_cast<double>(lo))))));
        if (ell == prev) continue;
        prev = ell;
        double x = std::log(static_cast<double>(ell));
        double y = ary_percolation_log_pmf(d, p, ell);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    return (used * sxy - sx * sy) / (used * sxx - sx * sx);
}

double extinction_probability(int d, double p) {
    if (d < 1 || !(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("extinction_probability: invalid parameters");
    auto G = [&](double z) { return std::pow(1.0 - p + p * z, d); };
    if (d * p <= 1.0) return 1.0;  // (sub)critical: z = 1 is the smallest root
    // Bracket the root away from z = 1, where G(z) - z < 0.
    double hi = 1.0, eps = std::min(0.5, 2.0 * (d * p - 1.0) / std::max(1.0, d * (d - 1.0) * p * p));
    for (int it = 0; it < 200 && G(1.0 - eps) - (1.0 - eps) >= 0.0; ++it) eps *= 0.5;
    hi = 1.0 - eps;
    if (G(hi) - hi >= 0.0) return 1.0;  // numerically at criticality
    double lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (G(mid) - mid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double z = 0.5 * (lo + hi);
    if (std::fabs(G(z) - z) > 1e-12) throw std::runtime_error("extinction_probability: residual above 1e-12");
    return z;
}

McEstimate coupling_independence_estimate(const SpinModel& model, int v, long long trials, uint64_t seed,
                                          int exact_subtree_cap) {
    if (model.kind != ModelKind::IsingGraph)
        throw std::invalid_argument("coupling_independence_estimate: graph Ising models only");
    if (trials < 1) throw std::invalid_argument("coupling_independence_estimate: trials >= 1");
    const int n = model.n();
    double acc = 0.0, acc2 = 0.0;
    for (long long t = 0; t < trials; ++t) {
        CounterRng rng(seed, static_cast<uint64_t>(t), /*purpose=*/11);
        auto res = explore_saw(model.graph, v, model.beta, rng, /*cap=*/n, exact_subtree_cap, model.fields);
        double x = static_cast<double>(std::min<long long>(res.explored, n));
        acc += x;
        acc2 += x * x;
    }
    McEstimate est;
    est.trials = trials;
    est.mean = acc / static_cast<double>(trials);
    double var = acc2 / static_cast<double>(trials) - est.mean * est.mean;
    est.stderr_ = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
    return est;
}

namespace {
// Elementary symmetric polynomials e_0..e_k of the entries of p.
std::vector<double> elementary_symmetric(std::span<const double> p, int k) {
    std::vector<double> e(static_cast<size_t>(k) + 1, 0.0);
    e[0] = 1.0;
    int filled = 0;
    for (double x : p) {
        int top = std::min(k, ++filled);
        for (int j = top; j >= 1; --j) e[static_cast<size_t>(j)] += x * e[static_cast<size_t>(j) - 1];
    }
    return e;
}
}  // namespace

BirthdayTail birthday_tail(std::span<const double> p, int ell, int exact_ell_cap) {
    double total = 0.0;
    for (double x : p) {
        if (x < -1e-15) throw std::invalid_argument("birthday_tail: negative probability");
        total += x;
    }
    if (std::fabs(total - 1.0) > 1e-9) throw std::invalid_argument("birthday_tail: probabilities must sum to 1");
    const auto n = static_cast<double>(p.size());
    BirthdayTail out;
    out.bound = std::exp(-static_cast<double>(ell) * (ell - 1.0) / (2.0 * n));
    if (ell <= exact_ell_cap) {
        auto e = elementary_symmetric(p, ell);
        double fact = 1.0;
        for (int j = 2; j <= ell; ++j) fact *= j;
        out.exact = ell >= 0 ? fact * e[static_cast<size_t>(std::max(ell, 0))] : 1.0;
        out.exact_available = true;
    }
    return out;
}

double rank_one_si_bound(std::span<const double> u, int exact_ell_cap) {
    std::vector<double> sq;
    double norm2 = 0.0;
    for (double x : u)
        if (x != 0.0) {
            sq.push_back(x * x);
            norm2 += x * x;
        }
    if (sq.empty()) throw std::invalid_argument("rank_one_si_bound: u must have a nonzero entry");
    const auto n = static_cast<double>(sq.size());
    std::vector<double> prob(sq.size());
    for (size_t i = 0; i < sq.size(); ++i) prob[i] = sq[i] / norm2;
    auto e = elementary_symmetric(prob, exact_ell_cap);

    const double log_r = std::log(norm2);
    double sum = 0.0;
    double log_fact = 0.0;
    for (long long ell = 0;; ++ell) {
        if (ell > static_cast<long long>(sq.size())) return sum;  // Pr[T >= ell] = 0 beyond the support size
        double log_tail_bound = -static_cast<double>(ell) * (ell - 1.0) / (2.0 * n);
        double log_pr = log_tail_bound;
        if (ell <= exact_ell_cap) {
            if (ell >= 2) log_fact += std::log(static_cast<double>(ell));
            double ex = e[static_cast<size_t>(ell)];
            if (ex <= 0.0) return sum;  // Pr[T >= ell] = 0: series terminates
            log_pr = std::min(log_pr, log_fact + std::log(ex));
        }
        double log_term = log_pr + ell * log_r;
        sum += std::exp(log_term);
        // Geometric tail estimate once the bound term ratio drops below 1.
        double q = std::exp(log_r - static_cast<double>(ell) / n);
        if (q < 1.0) {
            double tail = std::exp(log_term) * q / (1.0 - q);
            if (tail < 1e-12) return sum;
        }
        if (ell > 10'000'000) return std::numeric_limits<double>::infinity();
    }
}

}  // namespace spinlab
