#include "spinlab/counting.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "spinlab/logspace.hpp"

namespace spinlab {

CountingPlan make_counting_plan(int n, double theta, double epsilon, double epsilon0, CountingOracle oracle) {
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("counting plan: theta in (0,1)");
    if (!(epsilon > 0.0 && epsilon0 >= 0.0 && epsilon + epsilon0 < 1.0))
        throw std::invalid_argument("counting plan: need epsilon0 + epsilon < 1");
    CountingPlan plan;
    plan.theta = theta;
    plan.epsilon = epsilon;
    plan.epsilon0 = epsilon0;
    plan.oracle = oracle;
    const double e2 = std::exp(2.0);
    plan.k = static_cast<int>(std::ceil(e2 * n * theta / (1.0 - theta) + std::log(2.0 / epsilon)));
    return plan;
}

namespace {

std::vector<int8_t> mask_config(uint32_t mask, int n) {
    std::vector<int8_t> config(static_cast<size_t>(n), -1);
    for (int v = 0; v < n; ++v)
        if (mask >> v & 1) config[static_cast<size_t>(v)] = 1;
    return config;
}

uint32_t subset_mask(std::span<const int> S, int n) {
    uint32_t mask = 0;
    for (int v : S) {
        if (v < 0 || v >= n) throw std::invalid_argument("subset out of range");
        mask |= 1u << v;
    }
    return mask;
}

}  // namespace

double z_s_theta_exact(const SpinModel& model, std::span<const int> S, double theta) {
    const int n = model.n();
    if (n > 24) throw BudgetError("z_s_theta_exact: enumeration cap exceeded");
    if (!(theta >= 0.0 && theta < 1.0)) throw std::invalid_argument("z_s_theta_exact: theta in [0,1)");
    uint32_t smask = subset_mask(S, n);
    uint32_t free = ((n == 32 ? 0u : (1u << n)) - 1u) & ~smask;
    const double log1m = theta > 0.0 ? std::log1p(-theta) : 0.0;
    std::vector<double> terms;
    for (uint32_t add = free;; add = (add - 1) & free) {
        uint32_t t = smask | add;
        auto config = mask_config(t, n);
        double lw = log_weight(model, config);
        if (lw != kNegInf) terms.push_back(lw + std::popcount(t) * log1m);
        if (add == 0) break;
    }
    return logsumexp(terms);
}

namespace {

struct SawRecursion {
    const Graph* g;
    const SpinModel* model;  // reduced model over the graph
    long long budget;
    long long used = 0;

    // Hardcore occupancy ratio R (log scale) of the SAW subtree below `u`.
    // +inf = forced occupied, -inf = forced out.
    double hardcore_log_ratio(std::vector<int>& walk, std::vector<char>& on_walk, int u, int depth_left) {
        if (++used > budget) throw BudgetError("weitz_marginal: SAW node budget exceeded");
        if (on_walk[static_cast<size_t>(u)]) {
            int i = 0;
            while (walk[static_cast<size_t>(i)] != u) ++i;
            int succ = walk[static_cast<size_t>(i + 1)];
            bool occupied = succ < walk.back();
            return occupied ? std::numeric_limits<double>::infinity() : kNegInf;
        }
        double log_r = std::log(model->fugacity[static_cast<size_t>(u)]);
        if (depth_left == 0) return log_r;  // cut children contribute R = 0
        int prev = walk.back();
        walk.push_back(u);
        on_walk[static_cast<size_t>(u)] = 1;
        bool prev_used = false;
        for (int w : g->adj[static_cast<size_t>(u)]) {
            if (w == prev && !prev_used) {
                prev_used = true;
                continue;
            }
            double child = hardcore_log_ratio(walk, on_walk, w, depth_left - 1);
            log_r -= log_add(0.0, child);  // minus log(1 + R_child)
            if (log_r == kNegInf) break;
        }
        on_walk[static_cast<size_t>(u)] = 0;
        walk.pop_back();
        return log_r;
    }

    // Ising +/- ratio (log scale) of the SAW subtree below `u`.
    double ising_log_ratio(std::vector<int>& walk, std::vector<char>& on_walk, int u, int depth_left) {
        if (++used > budget) throw BudgetError("ising_saw_marginal: SAW node budget exceeded");
        const double beta = model->beta;
        if (on_walk[static_cast<size_t>(u)]) {
            int i = 0;
            while (walk[static_cast<size_t>(i)] != u) ++i;
            int succ = walk[static_cast<size_t>(i + 1)];
            bool plus = succ < walk.back();
            return plus ? std::numeric_limits<double>::infinity() : kNegInf;
        }
        double log_r = 2.0 * model->fields[static_cast<size_t>(u)];
        if (depth_left == 0) return log_r;
        int prev = walk.back();
        walk.push_back(u);
        on_walk[static_cast<size_t>(u)] = 1;
        bool prev_used = false;
        for (int w : g->adj[static_cast<size_t>(u)]) {
            if (w == prev && !prev_used) {
                prev_used = true;
                continue;
            }
            double child = ising_log_ratio(walk, on_walk, w, depth_left - 1);
            if (child == std::numeric_limits<double>::infinity())
                log_r += 2.0 * beta;  // pinned +: factor e^{2 beta}
            else if (child == kNegInf)
                log_r -= 2.0 * beta;  // pinned -
            else
                log_r += log_add(child + beta, -beta) - log_add(child - beta, beta);
        }
        on_walk[static_cast<size_t>(u)] = 0;
        walk.pop_back();
        return log_r;
    }
};

double marginal_from_log_ratio(double log_r) {
    if (log_r == std::numeric_limits<double>::infinity()) return 1.0;
    if (log_r == kNegInf) return 0.0;
    return 1.0 / (1.0 + std::exp(-log_r));
}

// Shared scaffolding: reduce by the pinning, locate v, run the recursion from
// a fake root so that v itself is handled as "child" uniformly.
template <typename Recurse>
double saw_marginal(const SpinModel& model, const Pinning& pinning, int v, int depth, long long node_budget,
                    Recurse&& rec) {
    if (pinning.assignments.count(v)) throw std::invalid_argument("saw marginal: v is pinned");
    auto red = apply_pinning(model, pinning);
    auto it = std::find(red.free_vertices.begin(), red.free_vertices.end(), v);
    if (it == red.free_vertices.end()) return 0.0;  // forced out by an occupied neighbor
    int rv = static_cast<int>(it - red.free_vertices.begin());
    SawRecursion ctx{&red.model.graph, &red.model, node_budget};
    std::vector<int> walk;
    std::vector<char> on_walk(static_cast<size_t>(red.model.n()), 0);
    // Root has no parent: seed the walk with a sentinel below and call directly.
    walk.reserve(static_cast<size_t>(red.model.n()) + 1);
    return rec(ctx, walk, on_walk, rv, depth);
}

}  // namespace

double weitz_marginal(const SpinModel& model, const Pinning& pinning, int v, int depth, long long node_budget) {
    if (model.kind != ModelKind::Hardcore) throw std::invalid_argument("weitz_marginal: hardcore models only");
    return saw_marginal(model, pinning, v, depth, node_budget,
                        [](SawRecursion& ctx, std::vector<int>& walk, std::vector<char>& on_walk, int rv, int d) {
                            // run as root: no parent to skip
                            walk.push_back(-1);
                            double log_r = ctx.hardcore_log_ratio(walk, on_walk, rv, d);
                            walk.pop_back();
                            return marginal_from_log_ratio(log_r);
                        });
}

double ising_saw_marginal(const SpinModel& model, const Pinning& pinning, int v, int depth, long long node_budget) {
    if (model.kind != ModelKind::IsingGraph) throw std::invalid_argument("ising_saw_marginal: graph Ising only");
    return saw_marginal(model, pinning, v, depth, node_budget,
                        [](SawRecursion& ctx, std::vector<int>& walk, std::vector<char>& on_walk, int rv, int d) {
                            walk.push_back(-1);
                            double log_r = ctx.ising_log_ratio(walk, on_walk, rv, d);
                            walk.pop_back();
                            return marginal_from_log_ratio(log_r);
                        });
}

namespace {

// Marginal with depth doubled until successive values differ by < tol/2,
// capped at the natural SAW depth (graph size).
double calibrated_marginal(const SpinModel& tilted, const Pinning& pin, int v, double tol, long long budget,
                           int* depth_used) {
    const int max_depth = tilted.n() + 1;
    int depth = 4;
    double prev = tilted.kind == ModelKind::Hardcore ? weitz_marginal(tilted, pin, v, depth, budget)
                                                     : ising_saw_marginal(tilted, pin, v, depth, budget);
    while (depth < max_depth) {
        depth = std::min(2 * depth, max_depth);
        double cur = tilted.kind == ModelKind::Hardcore ? weitz_marginal(tilted, pin, v, depth, budget)
                                                        : ising_saw_marginal(tilted, pin, v, depth, budget);
        if (std::fabs(cur - prev) < 0.5 * tol) {
            prev = cur;
            break;
        }
        prev = cur;
    }
    if (depth_used) *depth_used = std::max(*depth_used, depth);
    return prev;
}

}  // namespace

ZsEstimate estimate_z_s_theta(const SpinModel& model, std::span<const int> S, double theta, double epsilon0,
                              long long saw_node_budget) {
    const int n = model.n();
    uint32_t smask = subset_mask(S, n);
    ZsEstimate out;

    auto s_config = mask_config(smask, n);
    double log_wt_s = log_weight(model, s_config);
    if (log_wt_s == kNegInf) {  // infeasible S (hardcore)
        out.log_z = kNegInf;
        out.empty = true;
        return out;
    }
    SpinModel tilted = tilt(model, theta);
    Pinning pin;
    for (int v = 0; v < n; ++v)
        if (smask >> v & 1) pin.assignments[v] = 1;

    const double eps1 = epsilon0 > 0.0 ? epsilon0 / (2.0 * n) : 1e-12;
    double log_all_out = 0.0;
    for (int v = 0; v < n; ++v) {
        if (smask >> v & 1) continue;
        double p = calibrated_marginal(tilted, pin, v, eps1, saw_node_budget, &out.max_depth_used);
        log_all_out += std::log1p(-p);
        pin.assignments[v] = -1;
    }
    out.log_z = std::popcount(smask) * std::log1p(-theta) + log_wt_s - log_all_out;
    return out;
}

CountCertificate deterministic_count(const SpinModel& model, const CountingPlan& plan) {
    const int n = model.n();
    if (n > 24) throw BudgetError("deterministic_count: subset enumeration infeasible");
    const int k = plan.k > 0 ? plan.k : make_counting_plan(n, plan.theta, plan.epsilon, plan.epsilon0).k;
    const double log_ratio = std::log(plan.theta) - std::log1p(-plan.theta);

    // Fixed enumeration order (size, then mask) keeps the reduction bit-stable.
    std::vector<double> terms;
    CountCertificate cert;
    cert.k = k;
    const uint64_t size = 1ull << n;
    std::vector<uint32_t> masks;
    for (uint64_t mask = 0; mask < size; ++mask)
        if (std::popcount(mask) < k) masks.push_back(static_cast<uint32_t>(mask));
    std::stable_sort(masks.begin(), masks.end(),
                     [](uint32_t a, uint32_t b) { return std::popcount(a) < std::popcount(b); });
    if (static_cast<long long>(masks.size()) > plan.term_budget)
        throw BudgetError("deterministic_count: term budget exceeded");

    cert.max_term = kNegInf;
    for (uint32_t mask : masks) {
        std::vector<int> S;
        for (int v = 0; v < n; ++v)
            if (mask >> v & 1) S.push_back(v);
        double log_zs;
        if (plan.oracle == CountingOracle::Exact) {
            log_zs = z_s_theta_exact(model, S, plan.theta);
        } else {
            auto est = estimate_z_s_theta(model, S, plan.theta, plan.epsilon0, plan.saw_node_budget);
            cert.max_depth_used = std::max(cert.max_depth_used, est.max_depth_used);
            log_zs = est.log_z;
        }
        if (log_zs == kNegInf) continue;
        double term = std::popcount(mask) * log_ratio + log_zs;
        terms.push_back(term);
        cert.max_term = std::max(cert.max_term, term);
        cert.terms += 1;
    }
    cert.log_z_hat = logsumexp(terms);
    return cert;
}

}  // namespace spinlab
