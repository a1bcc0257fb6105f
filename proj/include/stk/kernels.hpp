#pragma once

#include "stk/posterior.hpp"
#include "stk/prior.hpp"

#include <Eigen/Core>

#include <functional>
#include <memory>
#include <string>
#include <variant>

namespace stk {

/// (c + x^T y)^d.
struct PolynomialKernel {
    double c = 0.0;
    int degree = 1;
};

/// 1/2 (c + x^T y)^d + 1/2 (a^T J b)^d with a = (sqrt(c), x), b = (sqrt(c), y) and J the reversal
/// of length len + 1. This is phi(x)^T 1/2 (I + J_d) phi(y) for the degree-d Kronecker features.
struct CentrosymmetricPolynomialKernel {
    double c = 0.0;
    int degree = 1;
};

/// phi(x)^T P0 phi(y) for an explicit feature map and prior covariance.
struct FeatureKernel {
    std::string id;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> feature;
    std::shared_ptr<const StructuredPrior> prior;
};

using KernelSpec = std::variant<PolynomialKernel, CentrosymmetricPolynomialKernel, FeatureKernel>;

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj);

/// Symmetric matrix of pairwise kernel values over the rows of `inputs`.
Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& inputs);

/// Kernel values between rows of `a` and rows of `b`.
Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Zero-mean kernel regression: (K + Sigma) v = y, prediction k(x*, X) v.
class KernelDualSolution {
public:
    KernelDualSolution(KernelSpec spec, Eigen::MatrixXd inputs, Eigen::VectorXd v)
        : spec_(std::move(spec)), inputs_(std::move(inputs)), v_(std::move(v)) {}

    const Eigen::VectorXd& dual_variables() const noexcept { return v_; }
    double predict(const Eigen::VectorXd& x) const;
    Eigen::VectorXd predict_rows(const Eigen::MatrixXd& x) const;

private:
    KernelSpec spec_;
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd v_;
};

KernelDualSolution solve_dual(const KernelSpec& spec, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                              const NoiseCovariance& noise);

}  // namespace stk
