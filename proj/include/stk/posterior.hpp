#pragma once

#include "stk/prior.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace stk {

/// Sigma = variance * I.
struct ScaledIdentityNoise {
    double variance = 1.0;
};

/// Sigma = diag(variances).
struct DiagonalNoise {
    Eigen::VectorXd variances;
};

/// Explicit, possibly singular, symmetric PSD covariance. Solves use eigenvalue-thresholded
/// pseudo-inverses with cutoff 1e-12 lambda_max.
struct StructuredNoise {
    Eigen::MatrixXd covariance;
};

using NoiseCovariance = std::variant<ScaledIdentityNoise, DiagonalNoise, StructuredNoise>;

/// variance * Phi P0 Phi^T with P0 the prior covariance divided by its scale squared.
StructuredNoise projected_structured_noise(double variance, const Eigen::MatrixXd& phi, const StructuredPrior& prior);

/// W x with W^T W = Sigma^+. Singular directions of a structured Sigma are dropped, so W may have
/// fewer rows than Sigma.
Eigen::MatrixXd whiten(const NoiseCovariance& noise, const Eigen::MatrixXd& x);

/// y = Phi w + e, e ~ N(0, Sigma).
struct ForwardModel {
    Eigen::MatrixXd phi;
    Eigen::VectorXd y;
    NoiseCovariance noise = ScaledIdentityNoise{1.0};
};

enum class SolverKind { direct, square_root, change_of_variables, dual, truncated_svd, pseudo_precision };

std::string to_string(SolverKind kind);

/// How the prior enters the stacked least-squares system.
enum class PrecisionForm {
    /// w = w0 + F z with z ~ N(0, I): the prior support coordinates.
    support,
    /// Full space with the pseudo-inverse square-root precision of P0; directions outside the
    /// prior support are left unpenalized.
    full_space,
};

struct GaussianPosterior {
    Eigen::VectorXd mean;
    /// F with P+ = F F^T; empty for mean-only solvers.
    std::optional<Eigen::MatrixXd> covariance_factor;
    SolverKind solver = SolverKind::direct;
    std::vector<std::string> warnings;

    bool mean_only() const noexcept { return !covariance_factor.has_value(); }
    Eigen::MatrixXd covariance() const;
};

/// Normal equations in support coordinates, solved by Cholesky.
GaussianPosterior solve_direct(const ForwardModel& model, const StructuredPrior& prior);

/// Orthogonal factorization of the stacked square-root system in support coordinates.
GaussianPosterior solve_sqrt(const ForwardModel& model, const StructuredPrior& prior);

/// (W Phi P0; B) x = (W (y - Phi w0); 0), w+ = P0 x + w0, using only products with P0.
/// B = sigma I for projector covariances sigma^2 P0 and B = F^T for a dense factor.
GaussianPosterior solve_change_of_vars(const ForwardModel& model, const StructuredPrior& prior);

struct DualSolution {
    /// Dual variables v of (Phi P0 Phi^T + Sigma) v = y - Phi w0.
    Eigen::VectorXd v;
    GaussianPosterior posterior;

    /// phi*^T w+ for a new design row.
    double predict(const Eigen::VectorXd& phi_star) const { return phi_star.dot(posterior.mean); }
};

/// Dual solve; only the N x N matrix Phi P0 Phi^T is formed.
DualSolution solve_dual(const ForwardModel& model, const StructuredPrior& prior);

/// Stacked square-root system restricted to its top `rank` singular triples. A rank above the
/// number of singular values is clamped with a warning.
GaussianPosterior truncated_svd_solve(const ForwardModel& model, const StructuredPrior& prior, Index rank,
                                      PrecisionForm form = PrecisionForm::support);

/// Minimum-norm solution of (W Phi; Q) w = (W y; Q w0), Q the full-space square-root precision.
GaussianPosterior solve_pseudo_precision(const ForwardModel& model, const StructuredPrior& prior);

/// Minimum-norm least-squares solution of W Phi w = W y.
Eigen::VectorXd max_likelihood(const ForwardModel& model);

/// Posterior means for several right-hand sides (columns of y) sharing Phi, Sigma, and the prior.
Eigen::MatrixXd posterior_mean_columns(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                                       const NoiseCovariance& noise, const StructuredPrior& prior,
                                       PrecisionForm form = PrecisionForm::support);

/// Singular values, descending, of the square-root precision operators Q (prior), W Phi
/// (likelihood), and (W Phi; Q) (posterior), all in the full space.
struct PrecisionSpectra {
    Eigen::VectorXd prior;
    Eigen::VectorXd likelihood;
    Eigen::VectorXd posterior;
};

PrecisionSpectra precision_singular_values(const Eigen::MatrixXd& phi, const NoiseCovariance& noise,
                                           const StructuredPrior& prior);

}  // namespace stk
