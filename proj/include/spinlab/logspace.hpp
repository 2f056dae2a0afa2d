#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace spinlab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(e^a + e^b), safe for -inf arguments.
inline double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    if (a < b) std::swap(a, b);
    return a + std::log1p(std::exp(b - a));
}

// log(e^a - e^b) for a >= b; returns -inf when equal.
inline double log_sub(double a, double b) {
    if (b == kNegInf) return a;
    if (a <= b) return kNegInf;
    return a + std::log1p(-std::exp(b - a));
}

double logsumexp(std::span<const double> xs);

// Log-factorials for 0..nmax, shared by binomial/multinomial lookups.
class LogFactorial {
public:
    explicit LogFactorial(int nmax);
    double operator()(int k) const { return table_[static_cast<size_t>(k)]; }
    double log_binomial(int n, int k) const;
    // log of n! / (a! b! c! (n-a-b-c)!); -inf when infeasible.
    double log_multinomial3(int n, int a, int b, int c) const;

private:
    std::vector<double> table_;
};

double log_binomial_pmf(long long n, long long k, double p);

// Inverse standard normal CDF (Wichura's AS241, double precision).
double inverse_normal_cdf(double p);

}  // namespace spinlab
