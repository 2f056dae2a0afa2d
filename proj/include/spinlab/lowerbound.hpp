#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "spinlab/logspace.hpp"
#include "spinlab/model.hpp"

namespace spinlab {

// Log-space coefficient tables of the hardcore lower-bound generating
// polynomials at lambda = lambda_c(Delta):
//   N* = N(x/(D-2), y/(D-2), z/(D-2)^2),  N = (1+2x+2y+2z+x^2+y^2)^n
//   D* = D(x/(D-1), y/(D-1), z/(D-1)^2),  D = (1+x+y+z)^{2n}
// N* is built by one-factor-at-a-time convolution (z handled through its
// linear occurrence); D* entries are exact multinomials.
class HardcoreCoeffTables {
public:
    HardcoreCoeffTables(int n, int delta);

    int n() const { return n_; }
    int delta() const { return delta_; }

    double log_nstar(int A, int B, int C) const;
    double log_dstar(int A, int B, int C) const;
    // log alpha_{A,B,C} = Delta log N* - (Delta-1) log D*; -inf off support.
    double log_alpha(int A, int B, int C) const;

    // Evaluate-at-1 identities: {log of summed table, closed form}.
    std::pair<double, double> nstar_checksum() const;
    std::pair<double, double> n_raw_checksum() const;  // sum of N coefficients vs 9^n
    std::pair<double, double> dstar_checksum() const;
    std::pair<double, double> d_raw_checksum() const;  // sum of D coefficients vs 4^{2n}

    // Tail-to-total alpha mass over {|A-B| > eta * n^exponent}.
    double anti_concentration_ratio(double eta, double exponent = 2.0 / 3.0) const;

    struct RatioWindow {
        double log_min_ratio;
        double log_max_ratio;
        double log_center_ratio;
        long long points;
    };
    // log of alpha / exp(-(1/4n) Q(theta_A+theta_B, theta_C)) over the window
    // ||(A,B,C) - m||_inf <= 2 n^exponent around the center of mass.
    RatioWindow gaussian_ratio_window(double window_exponent = 2.0 / 3.0) const;

    void write_alpha_csv(const std::string& path) const;  // finite entries; .gz compresses

private:
    size_t pack_index(int A, int B, int C) const;
    int n_, delta_;
    LogFactorial lf_;
    double log_d_reweight_;  // log(Delta-1)
    double log_n_reweight_;  // log(Delta-2)
    std::vector<size_t> slice_offset_;
    std::vector<double> nstar_;
};

// Quadratic-form coefficients of the hardcore Gaussian comparison,
// Sigma = 2 Delta Sigma_N^{-1} - (Delta-1) Sigma_D^{-1} collapsed onto
// (theta_A + theta_B, theta_C); kappa1*kappa3 - kappa2^2 > 0.
std::array<double, 3> hardcore_gaussian_kappas(int delta);

// Ising tables at beta = -beta_c(Delta):
//   N = (e^{2 beta} x y + x + y + e^{2 beta})^n,  D = (1+x)^n (1+y)^n.
class IsingCoeffTables {
public:
    IsingCoeffTables(int n, int delta);

    int n() const { return n_; }
    int delta() const { return delta_; }

    double log_n(int s, int t) const;
    double log_d(int s, int t) const;
    double log_alpha(int s, int t) const;

    std::pair<double, double> n_checksum() const;  // vs n log(2 + 2e^{2 beta})
    std::pair<double, double> d_checksum() const;  // vs n log 4

    double anti_concentration_ratio(double eta, double exponent = 3.0 / 4.0) const;

    struct RatioWindow {
        double log_min_ratio;
        double log_max_ratio;
        double log_center_ratio;
        long long points;
    };
    RatioWindow gaussian_ratio_window(double window_exponent = 3.0 / 4.0) const;

    void write_alpha_csv(const std::string& path) const;

private:
    int n_, delta_;
    double beta_;
    LogFactorial lf_;
    std::vector<double> logn_;  // (n+1)^2 row-major
};

// U(rho) = Delta max_theta f_N(theta) - 2(Delta-1) f_D(rho) for the hardcore
// family; rho = (rho1, rho2, rho3, rho4) on the simplex with
// rho2 + rho3 + 2 rho4 <= 1. Inner maximum solved through the Lagrange
// parametrization with a scalar bisection; residuals below 1e-10.
double evaluate_U_hardcore(const std::array<double, 4>& rho, int delta);

// Symmetric section U(1-2r2-r4, r2, r2, r4).
double evaluate_U_sym_hardcore(double rho2, double rho4, int delta);
std::array<double, 2> argmax_U_sym_hardcore(int delta, double tol = 1e-9);

// Ising analogue: f_N over theta in the 1-parameter family, f_D from binary
// entropies; rho in (0,1)^2.
double evaluate_U_ising(const std::array<double, 2>& rho, int delta);
std::array<double, 2> critical_point_ising(int delta, double tol = 1e-9);

// Quadratic-form lower bound on lambda_max(Psi): s^T Psi s / s^T s for Ising,
// 4 s^T Cov s / s^T s (0/1 encoding) for hardcore. Exact path (n <= 14).
double si_quadratic_lower(const SpinModel& model, std::span<const int> s);

}  // namespace spinlab
