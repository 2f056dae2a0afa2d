#include "spinlab/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <stdexcept>

#include <zlib.h>

#include "spinlab/exact.hpp"

namespace spinlab {

namespace {

// Streaming log-sum-exp accumulator (one exp per entry).
struct LogAccumulator {
    double max = kNegInf;
    double sum = 0.0;
    void add(double x) {
        if (x == kNegInf) return;
        if (x <= max) {
            sum += std::exp(x - max);
        } else {
            sum = sum * std::exp(max - x) + 1.0;
            max = x;
        }
    }
    double value() const { return max == kNegInf ? kNegInf : max + std::log(sum); }
};

inline double lse5(double a, double b, double c, double d, double e) {
    double m = std::max({a, b, c, d, e});
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    if (a != kNegInf) s += std::exp(a - m);
    if (b != kNegInf) s += std::exp(b - m);
    if (c != kNegInf) s += std::exp(c - m);
    if (d != kNegInf) s += std::exp(d - m);
    if (e != kNegInf) s += std::exp(e - m);
    return m + std::log(s);
}

inline double lse4(double a, double b, double c, double d) {
    double m = std::max({a, b, c, d});
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    if (a != kNegInf) s += std::exp(a - m);
    if (b != kNegInf) s += std::exp(b - m);
    if (c != kNegInf) s += std::exp(c - m);
    if (d != kNegInf) s += std::exp(d - m);
    return m + std::log(s);
}

void write_text_maybe_gz(const std::string& path, const std::string& text) {
    if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
        gzclose(f);
    } else {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot open for writing: " + path);
        out << text;
    }
}

}  // namespace

HardcoreCoeffTables::HardcoreCoeffTables(int n, int delta)
    : n_(n), delta_(delta), lf_(2 * n + 1), log_d_reweight_(std::log(delta - 1.0)),
      log_n_reweight_(std::log(delta - 2.0)) {
    if (n < 1 || n > 400) throw BudgetError("HardcoreCoeffTables: n in [1, 400]");
    if (delta < 3) throw std::invalid_argument("HardcoreCoeffTables: delta >= 3");

    // Packed layout: slice C holds the triangle {A,B >= 0, A+B <= 2(n-C)}.
    slice_offset_.assign(static_cast<size_t>(n) + 2, 0);
    for (int C = 0; C <= n; ++C) {
        long long m = 2LL * (n - C);
        slice_offset_[static_cast<size_t>(C) + 1] =
            slice_offset_[static_cast<size_t>(C)] + static_cast<size_t>((m + 1) * (m + 2) / 2);
    }
    nstar_.assign(slice_offset_.back(), kNegInf);

    // cur = log coefficients of M^k, M = 1 + 2x + 2y + x^2 + y^2.
    const int side = 2 * n + 1;
    std::vector<double> cur(static_cast<size_t>(side) * side, kNegInf);
    auto at = [&](int A, int B) -> double& { return cur[static_cast<size_t>(A) * side + B]; };
    at(0, 0) = 0.0;
    const double log2 = std::log(2.0);

    for (int k = 0;; ++k) {
        // Deposit slice C = n - k, reweighted by (Delta-2)^{-(A+B+2C)}.
        int C = n_ - k;
        double slice_const = lf_.log_binomial(n_, C) + C * log2 - 2.0 * C * log_n_reweight_;
        size_t base = slice_offset_[static_cast<size_t>(C)];
        long long m = 2LL * k;
        for (int A = 0; A <= 2 * k; ++A) {
            size_t row = base + static_cast<size_t>(A) * (m + 1) - static_cast<size_t>(A) * (A - 1) / 2;
            for (int B = 0; B + A <= 2 * k; ++B) {
                double v = at(A, B);
                if (v != kNegInf) nstar_[row + static_cast<size_t>(B)] = v + slice_const - (A + B) * log_n_reweight_;
            }
        }
        if (k == n_) break;
        // In-place multiply by M, descending so lower indices are still old.
        int top = 2 * (k + 1);
        for (int A = top; A >= 0; --A)
            for (int B = top - A; B >= 0; --B) {
                double v0 = at(A, B);
                double v1 = A >= 1 ? at(A - 1, B) + log2 : kNegInf;
                double v2 = B >= 1 ? at(A, B - 1) + log2 : kNegInf;
                double v3 = A >= 2 ? at(A - 2, B) : kNegInf;
                double v4 = B >= 2 ? at(A, B - 2) : kNegInf;
                at(A, B) = lse5(v0, v1, v2, v3, v4);
            }
    }
}

size_t HardcoreCoeffTables::pack_index(int A, int B, int C) const {
    long long m = 2LL * (n_ - C);
    return slice_offset_[static_cast<size_t>(C)] + static_cast<size_t>(A) * (m + 1) -
           static_cast<size_t>(A) * (A - 1) / 2 + static_cast<size_t>(B);
}

double HardcoreCoeffTables::log_nstar(int A, int B, int C) const {
    if (A < 0 || B < 0 || C < 0 || C > n_ || A + B > 2 * (n_ - C)) return kNegInf;
    return nstar_[pack_index(A, B, C)];
}

double HardcoreCoeffTables::log_dstar(int A, int B, int C) const {
    double lm = lf_.log_multinomial3(2 * n_, A, B, C);
    if (lm == kNegInf) return kNegInf;
    return lm - (A + B + 2.0 * C) * log_d_reweight_;
}

double HardcoreCoeffTables::log_alpha(int A, int B, int C) const {
    double ln = log_nstar(A, B, C);
    if (ln == kNegInf) return kNegInf;
    return delta_ * ln - (delta_ - 1.0) * log_dstar(A, B, C);
}

std::pair<double, double> HardcoreCoeffTables::nstar_checksum() const {
    LogAccumulator acc;
    for (double v : nstar_) acc.add(v);
    // N*(1,1,1) = ((1 + 2/(Delta-2))^2)^n = (Delta/(Delta-2))^{2n}
    double closed = 2.0 * n_ * (std::log(static_cast<double>(delta_)) - std::log(delta_ - 2.0));
    return {acc.value(), closed};
}

std::pair<double, double> HardcoreCoeffTables::n_raw_checksum() const {
    LogAccumulator acc;
    for (int C = 0; C <= n_; ++C)
        for (int A = 0; A + C <= 2 * n_; ++A)
            for (int B = 0; A + B <= 2 * (n_ - C); ++B) {
                double v = nstar_[pack_index(A, B, C)];
                if (v != kNegInf) acc.add(v + (A + B + 2.0 * C) * log_n_reweight_);
            }
    return {acc.value(), n_ * std::log(9.0)};
}

std::pair<double, double> HardcoreCoeffTables::dstar_checksum() const {
    LogAccumulator acc;
    for (int C = 0; C <= 2 * n_; ++C)
        for (int A = 0; A + C <= 2 * n_; ++A)
            for (int B = 0; A + B + C <= 2 * n_; ++B) acc.add(log_dstar(A, B, C));
    // D*(1,1,1) = ((1 + 1/(Delta-1))^2)^{2n} = (Delta/(Delta-1))^{4n}
    double closed = 4.0 * n_ * (std::log(static_cast<double>(delta_)) - std::log(delta_ - 1.0));
    return {acc.value(), closed};
}

std::pair<double, double> HardcoreCoeffTables::d_raw_checksum() const {
    LogAccumulator acc;
    for (int C = 0; C <= 2 * n_; ++C)
        for (int A = 0; A + C <= 2 * n_; ++A)
            for (int B = 0; A + B + C <= 2 * n_; ++B) acc.add(lf_.log_multinomial3(2 * n_, A, B, C));
    return {acc.value(), 2.0 * n_ * std::log(4.0)};
}

double HardcoreCoeffTables::anti_concentration_ratio(double eta, double exponent) const {
    const double cut = eta * std::pow(static_cast<double>(n_), exponent);
    LogAccumulator tail, total;
    for (int C = 0; C <= n_; ++C)
        for (int A = 0; A <= 2 * (n_ - C); ++A)
            for (int B = 0; A + B <= 2 * (n_ - C); ++B) {
                double la = log_alpha(A, B, C);
                if (la == kNegInf) continue;
                total.add(la);
                if (std::fabs(A - B) > cut) tail.add(la);
            }
    return std::exp(tail.value() - total.value());
}

HardcoreCoeffTables::RatioWindow HardcoreCoeffTables::gaussian_ratio_window(double window_exponent) const {
    auto kap = hardcore_gaussian_kappas(delta_);
    const double m1 = 2.0 * (delta_ - 1.0) * n_ / (delta_ * delta_);
    const double m3 = 2.0 * n_ / (delta_ * delta_);
    const double w = 2.0 * std::pow(static_cast<double>(n_), window_exponent);
    RatioWindow out{std::numeric_limits<double>::infinity(), kNegInf, 0.0, 0};
    auto log_ratio = [&](int A, int B, int C) {
        double la = log_alpha(A, B, C);
        if (la == kNegInf) return kNegInf;
        double ta = A - m1, tb = B - m1, tc = C - m3;
        double q = kap[0] * (ta + tb) * (ta + tb) + 2.0 * kap[1] * (ta + tb) * tc + kap[2] * tc * tc;
        return la + q / (4.0 * n_);
    };
    for (int A = std::max(0, static_cast<int>(std::ceil(m1 - w))); A <= static_cast<int>(std::floor(m1 + w)); ++A)
        for (int B = std::max(0, static_cast<int>(std::ceil(m1 - w))); B <= static_cast<int>(std::floor(m1 + w)); ++B)
            for (int C = std::max(0, static_cast<int>(std::ceil(m3 - w))); C <= static_cast<int>(std::floor(m3 + w));
                 ++C) {
                double lr = log_ratio(A, B, C);
                if (lr == kNegInf) continue;
                out.log_min_ratio = std::min(out.log_min_ratio, lr);
                out.log_max_ratio = std::max(out.log_max_ratio, lr);
                out.points += 1;
            }
    out.log_center_ratio = log_ratio(static_cast<int>(std::llround(m1)), static_cast<int>(std::llround(m1)),
                                     static_cast<int>(std::llround(m3)));
    return out;
}

void HardcoreCoeffTables::write_alpha_csv(const std::string& path) const {
    std::string text = "A,B,C,log_alpha\n";
    char buf[96];
    for (int C = 0; C <= n_; ++C)
        for (int A = 0; A <= 2 * (n_ - C); ++A)
            for (int B = 0; A + B <= 2 * (n_ - C); ++B) {
                double la = log_alpha(A, B, C);
                if (la == kNegInf) continue;
                std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", A, B, C, la);
                text += buf;
            }
    write_text_maybe_gz(path, text);
}

std::array<double, 3> hardcore_gaussian_kappas(int delta) {
    if (delta < 3) throw std::invalid_argument("hardcore_gaussian_kappas: delta >= 3");
    double D = delta;
    double kappa = D * D / ((D - 1.0) * (D * D * D - 4.0 * D * D + 6.0 * D - 4.0));
    double k1 = (2.0 - 2.0 * D * D + D * D * D) * kappa;
    double k2 = (4.0 - 4.0 * D + D * D * D) * kappa;
    double k3 = (8.0 - 16.0 * D + 12.0 * D * D - 4.0 * D * D * D + D * D * D * D) * kappa;
    return {k1, k2, k3};
}

IsingCoeffTables::IsingCoeffTables(int n, int delta) : n_(n), delta_(delta), beta_(-beta_c(delta)), lf_(n + 1) {
    if (n < 1 || n > 2000) throw BudgetError("IsingCoeffTables: n in [1, 2000]");
    const double c = 2.0 * beta_;  // log e^{2 beta}
    const auto side = static_cast<size_t>(n) + 1;
    logn_.assign(side * side, kNegInf);
    auto at = [&](int s, int t) -> double& { return logn_[static_cast<size_t>(s) * side + t]; };
    at(0, 0) = 0.0;
    for (int k = 1; k <= n; ++k) {
        for (int s = k; s >= 0; --s)
            for (int t = k; t >= 0; --t) {
                double v0 = at(s, t) + c;                             // constant e^{2b}
                double v1 = s >= 1 ? at(s - 1, t) : kNegInf;          // x
                double v2 = t >= 1 ? at(s, t - 1) : kNegInf;          // y
                double v3 = s >= 1 && t >= 1 ? at(s - 1, t - 1) + c : kNegInf;  // e^{2b} x y
                at(s, t) = lse4(v0, v1, v2, v3);
            }
    }
}

double IsingCoeffTables::log_n(int s, int t) const {
    if (s < 0 || t < 0 || s > n_ || t > n_) return kNegInf;
    return logn_[static_cast<size_t>(s) * (n_ + 1) + t];
}

double IsingCoeffTables::log_d(int s, int t) const {
    double v = lf_.log_binomial(n_, s);
    double w = lf_.log_binomial(n_, t);
    if (v == kNegInf || w == kNegInf) return kNegInf;
    return v + w;
}

double IsingCoeffTables::log_alpha(int s, int t) const {
    double ln = log_n(s, t);
    if (ln == kNegInf) return kNegInf;
    return delta_ * ln - (delta_ - 1.0) * log_d(s, t);
}

std::pair<double, double> IsingCoeffTables::n_checksum() const {
    LogAccumulator acc;
    for (double v : logn_) acc.add(v);
    double closed = n_ * std::log(2.0 + 2.0 * std::exp(2.0 * beta_));
    return {acc.value(), closed};
}

std::pair<double, double> IsingCoeffTables::d_checksum() const {
    LogAccumulator acc;
    for (int s = 0; s <= n_; ++s)
        for (int t = 0; t <= n_; ++t) acc.add(log_d(s, t));
    return {acc.value(), n_ * std::log(4.0)};
}

double IsingCoeffTables::anti_concentration_ratio(double eta, double exponent) const {
    const double cut = eta * std::pow(static_cast<double>(n_), exponent);
    LogAccumulator tail, total;
    for (int s = 0; s <= n_; ++s)
        for (int t = 0; t <= n_; ++t) {
            double la = log_alpha(s, t);
            if (la == kNegInf) continue;
            total.add(la);
            if (std::fabs(s - t) > cut) tail.add(la);
        }
    return std::exp(tail.value() - total.value());
}

IsingCoeffTables::RatioWindow IsingCoeffTables::gaussian_ratio_window(double window_exponent) const {
    const double m = n_ / 2.0;
    const double Q = 2.0 * (delta_ - 1.0) / (delta_ - 2.0);
    const double w = 2.0 * std::pow(static_cast<double>(n_), window_exponent);
    RatioWindow out{std::numeric_limits<double>::infinity(), kNegInf, 0.0, 0};
    auto log_ratio = [&](int s, int t) {
        double la = log_alpha(s, t);
        if (la == kNegInf) return kNegInf;
        double d = (s - m) + (t - m);
        return la + Q / n_ * d * d;
    };
    for (int s = std::max(0, static_cast<int>(std::ceil(m - w))); s <= std::min(n_, static_cast<int>(std::floor(m + w)));
         ++s)
        for (int t = std::max(0, static_cast<int>(std::ceil(m - w)));
             t <= std::min(n_, static_cast<int>(std::floor(m + w))); ++t) {
            double lr = log_ratio(s, t);
            if (lr == kNegInf) continue;
            out.log_min_ratio = std::min(out.log_min_ratio, lr);
            out.log_max_ratio = std::max(out.log_max_ratio, lr);
            out.points += 1;
        }
    out.log_center_ratio = log_ratio(static_cast<int>(std::llround(m)), static_cast<int>(std::llround(m)));
    return out;
}

void IsingCoeffTables::write_alpha_csv(const std::string& path) const {
    std::string text = "s,t,log_alpha\n";
    char buf[80];
    for (int s = 0; s <= n_; ++s)
        for (int t = 0; t <= n_; ++t) {
            double la = log_alpha(s, t);
            if (la == kNegInf) continue;
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", s, t, la);
            text += buf;
        }
    write_text_maybe_gz(path, text);
}

namespace {

double entropy_h(double x) { return x > 0.0 ? -x * std::log(x) : 0.0; }

constexpr double kBoundaryClip = 1e-9;

}  // namespace

double evaluate_U_hardcore(const std::array<double, 4>& rho_in, int delta) {
    if (delta < 3) throw std::invalid_argument("evaluate_U_hardcore: delta >= 3");
    auto rho = rho_in;
    double sum = rho[0] + rho[1] + rho[2] + rho[3];
    if (std::fabs(sum - 1.0) > 1e-8) throw std::invalid_argument("evaluate_U_hardcore: rho must sum to 1");
    if (rho[1] + rho[2] + 2.0 * rho[3] > 1.0 + 1e-12)
        throw std::invalid_argument("evaluate_U_hardcore: rho2 + rho3 + 2 rho4 must be <= 1");
    for (double& r : rho) r = std::max(r, kBoundaryClip);
    // Keep the inner program strictly interior (boundary handled by clipping).
    double cons = rho[1] + rho[2] + 2.0 * rho[3];
    if (cons > 1.0 - kBoundaryClip) {
        double shrink = (1.0 - kBoundaryClip) / cons;
        rho[1] *= shrink;
        rho[2] *= shrink;
        rho[3] *= shrink;
        rho[0] = 1.0 - rho[1] - rho[2] - rho[3];
    }

    const double lambda = lambda_c(delta);
    const double x = std::pow(lambda, 1.0 / delta);
    const double rho2 = rho[1], rho3 = rho[2], rho4 = rho[3];

    // Lagrange form: theta1 = P, theta2 = 2 P a2, theta5 = P a2^2 (a = x Q),
    // with P a (1+a) = rho; the normalization fixes P by bisection.
    auto a_of = [&](double P, double r) { return 0.5 * (std::sqrt(1.0 + 4.0 * r / P) - 1.0); };
    auto F = [&](double P) {
        double a2 = a_of(P, rho2), a3 = a_of(P, rho3);
        return P * (1.0 + a2 + a3) + rho2 + rho3 + 2.0 * rho4 - 1.0;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (F(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double P = 0.5 * (lo + hi);
    double a2 = a_of(P, rho2), a3 = a_of(P, rho3);
    double R = rho4 / (P * x * x);

    std::array<double, 6> theta = {P, 2.0 * P * a2, 2.0 * P * a3, 2.0 * rho4, P * a2 * a2, P * a3 * a3};
    std::array<double, 6> logp = {0.0,
                                  std::log(2.0 * x),
                                  std::log(2.0 * x),
                                  std::log(2.0 * x * x),
                                  2.0 * std::log(x),
                                  2.0 * std::log(x)};
    double theta_sum = 0.0;
    for (double t : theta) theta_sum += t;
    if (std::fabs(theta_sum - 1.0) > 1e-10)
        throw std::runtime_error("evaluate_U_hardcore: inner solve residual above 1e-10");

    double f_n = 0.0;
    for (int i = 0; i < 6; ++i) f_n += entropy_h(theta[static_cast<size_t>(i)]) + theta[static_cast<size_t>(i)] * logp[static_cast<size_t>(i)];
    // Cross-check against the Lagrange closed form of the inner maximum.
    double f_n_alt = -(std::log(P) + 2.0 * rho2 * std::log(a2 / x) + 2.0 * rho3 * std::log(a3 / x) +
                       2.0 * rho4 * std::log(R));
    if (std::fabs(f_n - f_n_alt) > 1e-9 * std::max(1.0, std::fabs(f_n)))
        throw std::runtime_error("evaluate_U_hardcore: Lagrange-form residual above tolerance");
    double f_d = entropy_h(rho[0]) + entropy_h(rho[1]) + entropy_h(rho[2]) + entropy_h(rho[3]);
    return delta * f_n - 2.0 * (delta - 1.0) * f_d;
}

double evaluate_U_sym_hardcore(double rho2, double rho4, int delta) {
    return evaluate_U_hardcore({1.0 - 2.0 * rho2 - rho4, rho2, rho2, rho4}, delta);
}

namespace {

// Nelder-Mead maximization on R^2 with -inf objective outside the domain.
std::array<double, 2> nelder_mead_max(const std::function<double(double, double)>& f, std::array<double, 2> start,
                                      double scale, double tol, int max_iter = 4000) {
    struct Pt {
        std::array<double, 2> x;
        double v;
    };
    auto eval = [&](std::array<double, 2> x) { return Pt{x, f(x[0], x[1])}; };
    std::array<Pt, 3> simplex = {eval(start), eval({start[0] + scale, start[1]}), eval({start[0], start[1] + scale})};
    for (int it = 0; it < max_iter; ++it) {
        std::sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.v > b.v; });
        double size = 0.0;
        for (int i = 1; i < 3; ++i)
            size = std::max(size, std::hypot(simplex[static_cast<size_t>(i)].x[0] - simplex[0].x[0],
                                             simplex[static_cast<size_t>(i)].x[1] - simplex[0].x[1]));
        if (size < tol) break;
        std::array<double, 2> centroid = {(simplex[0].x[0] + simplex[1].x[0]) / 2.0,
                                          (simplex[0].x[1] + simplex[1].x[1]) / 2.0};
        auto reflect = [&](double t) {
            return eval({centroid[0] + t * (centroid[0] - simplex[2].x[0]),
                         centroid[1] + t * (centroid[1] - simplex[2].x[1])});
        };
        Pt r = reflect(1.0);
        if (r.v > simplex[0].v) {
            Pt e = reflect(2.0);
            simplex[2] = e.v > r.v ? e : r;
        } else if (r.v > simplex[1].v) {
            simplex[2] = r;
        } else {
            Pt c = reflect(0.5);
            if (c.v > simplex[2].v) {
                simplex[2] = c;
            } else {
                for (int i = 1; i < 3; ++i) {
                    simplex[static_cast<size_t>(i)].x[0] = 0.5 * (simplex[static_cast<size_t>(i)].x[0] + simplex[0].x[0]);
                    simplex[static_cast<size_t>(i)].x[1] = 0.5 * (simplex[static_cast<size_t>(i)].x[1] + simplex[0].x[1]);
                    simplex[static_cast<size_t>(i)] = eval(simplex[static_cast<size_t>(i)].x);
                }
            }
        }
    }
    std::sort(simplex.begin(), simplex.end(), [](const Pt& a, const Pt& b) { return a.v > b.v; });
    return simplex[0].x;
}

}  // namespace

std::array<double, 2> argmax_U_sym_hardcore(int delta, double tol) {
    auto f = [&](double r2, double r4) {
        if (r2 < kBoundaryClip || r4 < kBoundaryClip || 2.0 * r2 + 2.0 * r4 > 1.0 - kBoundaryClip) return kNegInf;
        return evaluate_U_sym_hardcore(r2, r4, delta);
    };
    double d = delta;
    std::array<double, 2> start = {(d - 1.0) / (d * d) * 1.15, 1.0 / (d * d) * 0.8};
    return nelder_mead_max(f, start, 0.05, tol);
}

double evaluate_U_ising(const std::array<double, 2>& rho, int delta) {
    if (delta < 3) throw std::invalid_argument("evaluate_U_ising: delta >= 3");
    double r1 = std::clamp(rho[0], kBoundaryClip, 1.0 - kBoundaryClip);
    double r2 = std::clamp(rho[1], kBoundaryClip, 1.0 - kBoundaryClip);
    const double beta = -beta_c(delta);

    // One free parameter tau = theta4; stationarity theta1 theta4 / (theta2 theta3) = e^{4 beta}.
    double lo = std::max(0.0, r1 + r2 - 1.0), hi = std::min(r1, r2);
    auto fprime = [&](double tau) {
        double t1 = 1.0 - r1 - r2 + tau, t2 = r1 - tau, t3 = r2 - tau;
        return std::log(t2) + std::log(t3) - std::log(t1) - std::log(tau) + 4.0 * beta;
    };
    double a = lo + kBoundaryClip * (hi - lo), b = hi - kBoundaryClip * (hi - lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        if (fprime(mid) > 0.0)
            a = mid;
        else
            b = mid;
    }
    double tau = 0.5 * (a + b);
    double t1 = 1.0 - r1 - r2 + tau, t2 = r1 - tau, t3 = r2 - tau;
    double f_n = entropy_h(t1) + entropy_h(t2) + entropy_h(t3) + entropy_h(tau) + 2.0 * beta * (t1 + tau);
    double f_d = entropy_h(r1) + entropy_h(1.0 - r1) + entropy_h(r2) + entropy_h(1.0 - r2);
    return delta * f_n - (delta - 1.0) * f_d;
}

std::array<double, 2> critical_point_ising(int delta, double tol) {
    // The s<->t symmetry puts the critical point on the diagonal, where the
    // curvature is quadratic; off-diagonal the landscape is quartic-flat and
    // double-precision values cannot localize it. Golden-section on U(r,r).
    auto g = [&](double r) { return evaluate_U_ising({r, r}, delta); };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = kBoundaryClip, b = 1.0 - kBoundaryClip;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = g(c), fd = g(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = g(d);
        }
    }
    double r = 0.5 * (a + b);
    return {r, r};
}

double si_quadratic_lower(const SpinModel& model, std::span<const int> s) {
    const int n = model.n();
    if (static_cast<int>(s.size()) != n) throw std::invalid_argument("si_quadratic_lower: s size mismatch");
    if (n > 14) throw BudgetError("si_quadratic_lower: exact path capped at n = 14");
    Eigen::VectorXd sv(n);
    for (int i = 0; i < n; ++i) sv[i] = s[static_cast<size_t>(i)];
    if (model.kind == ModelKind::Hardcore) {
        Eigen::MatrixXd cov = covariance_matrix(model);  // 0/1 encoding
        return 4.0 * sv.dot(cov * sv) / sv.squaredNorm();
    }
    Eigen::MatrixXd psi = influence_matrix(model);
    return sv.dot(psi * sv) / sv.squaredNorm();
}

}  // namespace spinlab
