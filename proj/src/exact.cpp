#include "spinlab/exact.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "spinlab/logspace.hpp"

namespace spinlab {

long long state_budget() {
    static long long cap = [] {
        if (const char* env = std::getenv("SPINLAB_BUDGET_STATES")) {
            long long v = std::atoll(env);
            if (v > 0) return v;
        }
        return 1LL << 24;
    }();
    return cap;
}

long long kernel_state_budget() { return std::min(state_budget(), 1LL << 20); }

namespace {

void check_state_cap(int n, long long cap, const char* what) {
    if (n < 0 || n >= 31 || (1LL << n) > cap) throw BudgetError(std::string(what) + ": state-space cap exceeded");
}

// Neighbor bitmasks; only valid for n <= 30.
std::vector<uint32_t> adjacency_masks(const Graph& g) {
    std::vector<uint32_t> m(static_cast<size_t>(g.n_vertices), 0);
    for (auto [u, v] : g.edges) {
        m[static_cast<size_t>(u)] |= 1u << v;
        m[static_cast<size_t>(v)] |= 1u << u;
    }
    return m;
}

// Unnormalized log weight of every configuration.
std::vector<double> log_weight_table(const SpinModel& model) {
    const int n = model.n();
    const auto size = static_cast<size_t>(1) << n;
    std::vector<double> lw(size, 0.0);
    if (model.kind == ModelKind::Hardcore) {
        auto nbr = adjacency_masks(model.graph);
        std::vector<double> logfug(static_cast<size_t>(n));
        for (int v = 0; v < n; ++v) logfug[static_cast<size_t>(v)] = std::log(model.fugacity[static_cast<size_t>(v)]);
        for (size_t mask = 0; mask < size; ++mask) {
            double acc = 0.0;
            bool ok = true;
            for (uint32_t rest = static_cast<uint32_t>(mask); rest;) {
                int v = std::countr_zero(rest);
                rest &= rest - 1;
                if (nbr[static_cast<size_t>(v)] & static_cast<uint32_t>(mask)) {
                    ok = false;
                    break;
                }
                acc += logfug[static_cast<size_t>(v)];
            }
            lw[mask] = ok ? acc : kNegInf;
        }
    } else if (model.kind == ModelKind::IsingGraph) {
        for (size_t mask = 0; mask < size; ++mask) {
            double acc = 0.0;
            for (auto [u, v] : model.graph.edges) {
                bool su = mask >> u & 1, sv = mask >> v & 1;
                acc += (su == sv) ? model.beta : -model.beta;
            }
            for (int v = 0; v < n; ++v)
                acc += (mask >> v & 1) ? model.fields[static_cast<size_t>(v)] : -model.fields[static_cast<size_t>(v)];
            lw[mask] = acc;
        }
    } else {
        Eigen::VectorXd x(n);
        for (size_t mask = 0; mask < size; ++mask) {
            for (int v = 0; v < n; ++v) x[v] = (mask >> v & 1) ? 1.0 : -1.0;
            double acc = 0.5 * x.dot(model.J * x);
            for (int v = 0; v < n; ++v) acc += model.fields[static_cast<size_t>(v)] * x[v];
            lw[mask] = acc;
        }
    }
    if (model.log_weight_offset != 0.0)
        for (double& w : lw)
            if (w != kNegInf) w += model.log_weight_offset;
    return lw;
}

struct Moments {
    // Pairwise +1 probabilities: p[i] = Pr[X_i=+1], pp(i,j) = Pr[X_i=+1, X_j=+1].
    Eigen::VectorXd p;
    Eigen::MatrixXd pp;
};

Moments plus_moments(const ExactDistribution& d) {
    const int n = d.n;
    Moments m;
    m.p = Eigen::VectorXd::Zero(n);
    m.pp = Eigen::MatrixXd::Zero(n, n);
    const auto size = static_cast<size_t>(1) << n;
    std::vector<int> bits;
    for (size_t mask = 0; mask < size; ++mask) {
        if (d.log_probs[mask] == kNegInf) continue;
        double pr = std::exp(d.log_probs[mask]);
        bits.clear();
        for (uint32_t rest = static_cast<uint32_t>(mask); rest;) {
            bits.push_back(std::countr_zero(rest));
            rest &= rest - 1;
        }
        for (int i : bits) {
            m.p[i] += pr;
            for (int j : bits) m.pp(i, j) += pr;
        }
    }
    return m;
}

constexpr double kDegenerateTol = 1e-13;

}  // namespace

ExactDistribution exact_distribution(const SpinModel& model) {
    check_state_cap(model.n(), state_budget(), "exact_distribution");
    ExactDistribution d;
    d.n = model.n();
    d.log_probs = log_weight_table(model);
    double log_z = logsumexp(d.log_probs);
    if (log_z == kNegInf) throw EmptySupportError("exact_distribution: empty support");
    for (double& lp : d.log_probs)
        if (lp != kNegInf) lp -= log_z;
    return d;
}

LogZ log_partition(const SpinModel& model, const Pinning* pinning) {
    const SpinModel* m = &model;
    PinnedReduction red;
    if (pinning && !pinning->empty()) {
        try {
            red = apply_pinning(model, *pinning);
        } catch (const EmptySupportError&) {
            return {kNegInf, true};
        }
        m = &red.model;
    }
    check_state_cap(m->n(), state_budget(), "log_partition");
    auto lw = log_weight_table(*m);
    double lz = logsumexp(lw);
    if (pinning && !pinning->empty()) lz += red.log_constant;
    return {lz, lz == kNegInf};
}

Eigen::MatrixXd influence_matrix(const SpinModel& model) {
    auto d = exact_distribution(model);
    auto m = plus_moments(d);
    const int n = d.n;
    Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        double pi = m.p[i];
        if (pi < kDegenerateTol || pi > 1.0 - kDegenerateTol) continue;  // degenerate row stays zero
        for (int j = 0; j < n; ++j)
            psi(i, j) = m.pp(i, j) / pi - (m.p[j] - m.pp(i, j)) / (1.0 - pi);
    }
    return psi;
}

Eigen::MatrixXd covariance_matrix(const SpinModel& model) {
    auto d = exact_distribution(model);
    auto m = plus_moments(d);
    const int n = d.n;
    Eigen::MatrixXd cov(n, n);
    const bool pm_one = model.is_ising();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double c01 = m.pp(i, j) - m.p[i] * m.p[j];
            cov(i, j) = pm_one ? 4.0 * c01 : c01;
        }
    return cov;
}

namespace {

double si_lambda_max_single(const SpinModel& model) {
    auto d = exact_distribution(model);
    auto m = plus_moments(d);
    const int n = d.n;
    std::vector<int> live;
    for (int i = 0; i < n; ++i) {
        double var = m.p[i] * (1.0 - m.p[i]);
        if (var > kDegenerateTol) live.push_back(i);
    }
    if (live.empty()) return 0.0;
    const int k = static_cast<int>(live.size());
    Eigen::MatrixXd sym(k, k);  // D^{-1/2} Cov D^{-1/2}, same spectrum as Psi
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            int i = live[static_cast<size_t>(a)], j = live[static_cast<size_t>(b)];
            double cov = m.pp(i, j) - m.p[i] * m.p[j];
            double si = std::sqrt(m.p[i] * (1.0 - m.p[i]));
            double sj = std::sqrt(m.p[j] * (1.0 - m.p[j]));
            sym(a, b) = cov / (si * sj);
        }
    sym = 0.5 * (sym + sym.transpose().eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
}

void enumerate_pinnings(const SpinModel& model, int v, Pinning& pin, double& best) {
    const int n = model.n();
    if (v == n) {
        if (static_cast<int>(pin.assignments.size()) == n) return;  // fully pinned: nothing free
        try {
            auto red = apply_pinning(model, pin);
            if (red.model.n() > 0) best = std::max(best, si_lambda_max_single(red.model));
        } catch (const EmptySupportError&) {
        }
        return;
    }
    enumerate_pinnings(model, v + 1, pin, best);  // leave v free
    for (int8_t s : {int8_t{1}, int8_t{-1}}) {
        pin.assignments[v] = s;
        enumerate_pinnings(model, v + 1, pin, best);
        pin.assignments.erase(v);
    }
}

}  // namespace

double si_lambda_max(const SpinModel& model, bool over_pinnings) {
    if (!over_pinnings) return si_lambda_max_single(model);
    if (model.n() > 14) throw BudgetError("si_lambda_max: pinning enumeration capped at n = 14");
    double best = 0.0;
    Pinning pin;
    enumerate_pinnings(model, 0, pin, best);
    return best;
}

namespace {

// Feasible states in ascending bitmask order along with the stationary law.
struct StateSpace {
    std::vector<uint32_t> states;
    std::vector<int> index;  // 2^n -> position or -1
    std::vector<double> log_pi;
};

StateSpace feasible_states(const SpinModel& model) {
    check_state_cap(model.n(), kernel_state_budget(), "kernel");
    auto lw = log_weight_table(model);
    StateSpace s;
    s.index.assign(lw.size(), -1);
    for (size_t mask = 0; mask < lw.size(); ++mask)
        if (lw[mask] != kNegInf) {
            s.index[mask] = static_cast<int>(s.states.size());
            s.states.push_back(static_cast<uint32_t>(mask));
            s.log_pi.push_back(lw[mask]);
        }
    double lz = logsumexp(s.log_pi);
    for (double& lp : s.log_pi) lp -= lz;
    return s;
}

}  // namespace

DenseKernel glauber_kernel(const SpinModel& model) {
    const int n = model.n();
    auto lw = log_weight_table(model);
    auto space = feasible_states(model);
    const int m = static_cast<int>(space.states.size());
    DenseKernel k;
    k.states = space.states;
    k.P = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        uint32_t x = space.states[static_cast<size_t>(a)];
        for (int v = 0; v < n; ++v) {
            uint32_t xp = x | (1u << v), xm = x & ~(1u << v);
            double lwp = lw[xp], lwm = lw[xm];
            double p_plus;
            if (lwp == kNegInf)
                p_plus = 0.0;
            else if (lwm == kNegInf)
                p_plus = 1.0;
            else
                p_plus = 1.0 / (1.0 + std::exp(lwm - lwp));
            if (p_plus > 0.0) k.P(a, space.index[xp]) += p_plus / n;
            if (p_plus < 1.0) k.P(a, space.index[xm]) += (1.0 - p_plus) / n;
        }
    }
    return k;
}

DenseKernel field_dynamics_kernel(const SpinModel& model, double theta) {
    if (model.kind != ModelKind::Hardcore)
        throw std::invalid_argument("field_dynamics_kernel: hardcore models only");
    if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("field_dynamics_kernel: theta must be in (0,1)");
    auto space = feasible_states(model);
    const int m = static_cast<int>(space.states.size());
    if (static_cast<long long>(m) * m > 100'000'000LL)
        throw BudgetError("field_dynamics_kernel: dense kernel too large");

    const double log_theta = std::log(theta), log_1mtheta = std::log1p(-theta);
    // Down walk: drop each element independently with probability 1-theta.
    Eigen::MatrixXd down = Eigen::MatrixXd::Zero(m, m);
    for (int a = 0; a < m; ++a) {
        uint32_t t = space.states[static_cast<size_t>(a)];
        int sz = std::popcount(t);
        for (uint32_t s = t;; s = (s - 1) & t) {
            int ks = std::popcount(s);
            down(a, space.index[s]) = std::exp(ks * log_theta + (sz - ks) * log_1mtheta);
            if (s == 0) break;
        }
    }
    // Up walk: Q(s,.) is (1-theta)*mu conditioned on containing s.
    auto lw = log_weight_table(model);
    Eigen::MatrixXd up = Eigen::MatrixXd::Zero(m, m);
    const auto full = (1u << model.n()) - 1u;
    std::vector<double> terms;
    for (int a = 0; a < m; ++a) {
        uint32_t s = space.states[static_cast<size_t>(a)];
        uint32_t free = full & ~s;
        terms.clear();
        std::vector<int> targets;
        for (uint32_t add = free;; add = (add - 1) & free) {
            uint32_t t = s | add;
            if (lw[t] != kNegInf) {
                terms.push_back(lw[t] + std::popcount(t) * log_1mtheta);
                targets.push_back(space.index[t]);
            }
            if (add == 0) break;
        }
        double lz = logsumexp(terms);
        for (size_t i = 0; i < terms.size(); ++i) up(a, targets[i]) = std::exp(terms[i] - lz);
    }
    DenseKernel k;
    k.states = space.states;
    k.P = down * up;
    return k;
}

DenseKernel proximal_kernel(const SpinModel& model, double theta, int gh_nodes, double tol) {
    if (model.kind == ModelKind::Hardcore) throw std::invalid_argument("proximal_kernel: Ising models only");
    if (theta != 0.5) throw std::invalid_argument("proximal_kernel: only theta = 1/2 is supported");
    Eigen::MatrixXd L = factor_interaction(model);
    const int r = static_cast<int>(L.rows());
    const int n = model.n();
    if (r > 3) throw BudgetError("proximal_kernel: exact quadrature limited to rank <= 3");
    check_state_cap(n, kernel_state_budget(), "proximal_kernel");

    // Gauss-Hermite nodes/weights via the Golub-Welsch tridiagonal.
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(gh_nodes, gh_nodes);
    for (int i = 1; i < gh_nodes; ++i) {
        double b = std::sqrt(i / 2.0);
        jac(i, i - 1) = jac(i - 1, i) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    Eigen::VectorXd nodes = es.eigenvalues();
    Eigen::VectorXd weights(gh_nodes);
    const double sqrt_pi = std::sqrt(M_PI);
    for (int i = 0; i < gh_nodes; ++i) {
        double w0 = es.eigenvectors()(0, i);
        weights[i] = sqrt_pi * w0 * w0;
    }

    const auto size = static_cast<size_t>(1) << n;
    DenseKernel k;
    k.states.resize(size);
    for (size_t mask = 0; mask < size; ++mask) k.states[mask] = static_cast<uint32_t>(mask);
    k.P = Eigen::MatrixXd::Zero(static_cast<int>(size), static_cast<int>(size));

    // Tensor grid over r dimensions; y = L x + sqrt(2) t, weight normalized by pi^{r/2}.
    long long grid = 1;
    for (int i = 0; i < r; ++i) grid *= gh_nodes;
    Eigen::VectorXd h(n);
    for (int v = 0; v < n; ++v) h[v] = model.fields[static_cast<size_t>(v)];
    Eigen::MatrixXd LtL = L.transpose() * L;
    std::vector<double> row(size), probs(static_cast<size_t>(n)), scratch(size);
    std::vector<int> idx(static_cast<size_t>(r));
    for (size_t a = 0; a < size; ++a) {
        Eigen::VectorXd x(n);
        for (int v = 0; v < n; ++v) x[v] = (a >> v & 1) ? 1.0 : -1.0;
        Eigen::VectorXd base = h + LtL * x;  // h + L^T (Lx)
        std::fill(row.begin(), row.end(), 0.0);
        for (long long g = 0; g < grid; ++g) {
            long long rest = g;
            double w = 1.0;
            Eigen::VectorXd t(r);
            for (int i = 0; i < r; ++i) {
                idx[static_cast<size_t>(i)] = static_cast<int>(rest % gh_nodes);
                rest /= gh_nodes;
                w *= weights[idx[static_cast<size_t>(i)]] / sqrt_pi;
                t[i] = nodes[idx[static_cast<size_t>(i)]];
            }
            Eigen::VectorXd arg = base + std::sqrt(2.0) * (L.transpose() * t);
            for (int v = 0; v < n; ++v) probs[static_cast<size_t>(v)] = 1.0 / (1.0 + std::exp(-2.0 * arg[v]));
            // Expand the product measure into the row.
            std::fill(scratch.begin(), scratch.end(), 0.0);
            scratch[0] = w;
            size_t cur = 1;
            for (int v = 0; v < n; ++v) {
                double pv = probs[static_cast<size_t>(v)];
                for (size_t mask = 0; mask < cur; ++mask) {
                    double val = scratch[mask];
                    scratch[mask | (static_cast<size_t>(1) << v)] = val * pv;
                    scratch[mask] = val * (1.0 - pv);
                }
                cur <<= 1;
            }
            for (size_t mask = 0; mask < size; ++mask) row[mask] += scratch[mask];
        }
        for (size_t mask = 0; mask < size; ++mask) k.P(static_cast<int>(a), static_cast<int>(mask)) = row[mask];
    }

    // Certify the quadrature: rows stochastic and mu stationary.
    auto d = exact_distribution(model);
    Eigen::VectorXd mu(static_cast<int>(size));
    for (size_t mask = 0; mask < size; ++mask) mu[static_cast<int>(mask)] = d.prob(static_cast<uint32_t>(mask));
    double row_err = (k.P.rowwise().sum() - Eigen::VectorXd::Ones(static_cast<int>(size))).cwiseAbs().maxCoeff();
    double stat_err = (k.P.transpose() * mu - mu).cwiseAbs().maxCoeff();
    double achieved = std::max(row_err, stat_err);
    if (achieved > tol)
        throw std::runtime_error("proximal_kernel: quadrature tolerance not met, achieved error = " +
                                 std::to_string(achieved));
    return k;
}

ChainDiagnostics chain_diagnostics(const DenseKernel& kernel, const ExactDistribution& mu, long long t_max) {
    const int m = kernel.size();
    Eigen::VectorXd pi(m);
    for (int a = 0; a < m; ++a) pi[a] = mu.prob(kernel.states[static_cast<size_t>(a)]);
    double mass = pi.sum();
    if (std::fabs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("chain_diagnostics: kernel states do not carry the full stationary mass");
    double stat_err = (kernel.P.transpose() * pi - pi).cwiseAbs().maxCoeff();
    if (stat_err > 1e-8) throw std::invalid_argument("chain_diagnostics: kernel is not stationary for mu");

    ChainDiagnostics diag;
    double rev = 0.0;
    for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) rev = std::max(rev, std::fabs(pi[a] * kernel.P(a, b) - pi[b] * kernel.P(b, a)));
    diag.reversibility_residual = rev;

    double lambda2;
    if (m == 1) {
        lambda2 = 0.0;
    } else if (rev < 1e-9) {
        Eigen::VectorXd sq = pi.cwiseSqrt();
        Eigen::MatrixXd sym = sq.asDiagonal() * kernel.P * sq.cwiseInverse().asDiagonal();
        sym = 0.5 * (sym + sym.transpose().eval());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
        lambda2 = es.eigenvalues()[m - 2];
    } else {
        Eigen::EigenSolver<Eigen::MatrixXd> es(kernel.P);
        std::vector<double> re(static_cast<size_t>(m));
        for (int i = 0; i < m; ++i) re[static_cast<size_t>(i)] = es.eigenvalues()[i].real();
        std::sort(re.begin(), re.end());
        lambda2 = re[static_cast<size_t>(m) - 2];
    }
    diag.gap = 1.0 - lambda2;
    diag.tensorization_constant = 1.0 / (mu.n * diag.gap);

    Eigen::MatrixXd pt = kernel.P;
    for (long long t = 1; t <= t_max; t *= 2) {
        double worst = 0.0;
        for (int a = 0; a < m; ++a) {
            double tv = 0.0;
            for (int b = 0; b < m; ++b) tv += std::fabs(pt(a, b) - pi[b]);
            worst = std::max(worst, 0.5 * tv);
        }
        diag.tv_curve.push_back({t, worst});
        if (2 * t <= t_max) pt = pt * pt;
    }
    return diag;
}

double phi_entropy_weighted(std::span<const double> probs, std::span<const double> values, PhiKind kind) {
    if (probs.size() != values.size()) throw std::invalid_argument("phi_entropy: size mismatch");
    double mean = 0.0, ephi = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        double p = probs[i], f = values[i];
        if (p == 0.0) continue;
        if (kind == PhiKind::Entropy && f < 0.0)
            throw std::invalid_argument("phi_entropy: negative value under entropy kind");
        mean += p * f;
        ephi += p * (kind == PhiKind::Variance ? f * f : (f > 0.0 ? f * std::log(f) : 0.0));
    }
    double phi_mean = kind == PhiKind::Variance ? mean * mean : (mean > 0.0 ? mean * std::log(mean) : 0.0);
    return ephi - phi_mean;
}

double phi_entropy(const ExactDistribution& mu, std::span<const double> f, PhiKind kind) {
    if (f.size() != mu.log_probs.size()) throw std::invalid_argument("phi_entropy: table size mismatch");
    std::vector<double> probs(f.size());
    for (size_t i = 0; i < f.size(); ++i) probs[i] = std::exp(mu.log_probs[i]);
    return phi_entropy_weighted(probs, f, kind);
}

namespace {
void write_17g(std::ofstream& out, double v, bool first) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (!first) out << ',';
    out << buf;
}
}  // namespace

void write_matrix_csv(const Eigen::MatrixXd& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) write_17g(out, m(r, c), c == 0);
        out << '\n';
    }
}

void write_distribution_csv(const ExactDistribution& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "mask,log_prob\n";
    for (size_t mask = 0; mask < d.log_probs.size(); ++mask) {
        out << mask << ',';
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", d.log_probs[mask]);
        out << buf << '\n';
    }
}

}  // namespace spinlab
