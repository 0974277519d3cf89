#pragma once

// Reference implementations used as test oracles. They work on plain dense matrices and avoid
// the library's block machinery so that agreement is meaningful.

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// ---- generators ----

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(gen); }
};

Mat random_matrix(Rng& rng, int rows, int cols);
// W W^T / k + ridge I with W of shape n x k.
Mat random_spd(Rng& rng, int n, double ridge = 0.1);
// n i.i.d. N(0, I) rows mapped through a random mixing matrix.
Mat random_samples(Rng& rng, int n, int cols);
// Block matrix with roughly `density` of its m x m blocks nonzero.
Mat random_sparse_blocks(Rng& rng, int m, int p, double density);

// ---- linear algebra ----

Mat kron(const Mat& a, const Mat& b);
// Column-stacking vec.
Vec vec(const Mat& a);
Mat unvec(const Vec& v, int rows, int cols);

// ---- D-trace loss through the Kronecker form ----

// 0.5 vec(D)' (Sy kron Sx) vec(D) - vec(Sx - Sy)' vec(D)
double dtrace_loss_kron(const Mat& delta, const Mat& sx, const Mat& sy);
Mat central_difference_gradient(const Mat& delta, const Mat& sx, const Mat& sy, double h);

// ---- one-block prox by damped Newton on a smoothed norm ----

// argmin_X 0.5 ||X - A||_F^2 + t ||X||_F
Mat prox_block_numeric(const Mat& a, double t);

// ---- convex lasso reference for m = 1 ----

// argmin_D L(D) + lambda sum_ij |D_ij| by cyclic coordinate descent until the largest update is below tol.
Mat lasso_coordinate_descent(const Mat& sx, const Mat& sy, double lambda, double tol, int max_sweeps);
double lasso_objective(const Mat& delta, const Mat& sx, const Mat& sy, double lambda);

// ---- scalar penalties written from their closed forms ----

double rho_lasso(double u, double lambda);
double rho_logsum(double u, double lambda, double eps);
double rho_scad(double u, double lambda, double a);

// ---- theory constants for m = 1 via the Kronecker product ----

struct Constants {
  double M = 0.0;
  double M_sigma = 0.0;
  double kappa_gamma = 0.0;
  double alpha = 0.0;
  double sigma_bar = 0.0;
  double C0 = 0.0;
  double phi_min_star = 0.0;
};

// support: unordered node pairs; both (k,l) and (l,k) enter S.
Constants constants_m1(const Mat& sx, const Mat& sy, const std::vector<std::pair<int, int>>& support, double tau);

// ---- straight-line fit ----

// Slope of the least-squares line through (t, z_t) from the normal equations.
double ols_slope(const Vec& z);

}  // namespace oracle
