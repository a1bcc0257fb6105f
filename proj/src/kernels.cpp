#include "stk/kernels.hpp"

#include "stk/errors.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace stk {

namespace {

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void check_params(double c, int degree) {
    if (!(c >= 0.0)) throw DomainError("kernel offset c must be non-negative");
    if (degree < 1) throw DomainError("kernel degree must be at least 1");
}

// sum_k a_k b_{L-1-k} for a = (sqrt(c), x), b = (sqrt(c), y), L = len + 1.
double reversed_product(double c, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
    const Index len = x.size();
    const double rc = std::sqrt(c);
    auto at = [&](const Eigen::VectorXd& v, Index k) { return k == 0 ? rc : v[k - 1]; };
    double s = 0.0;
    for (Index k = 0; k <= len; ++k) s += at(x, k) * at(y, len - k);
    return s;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    if (xi.size() != xj.size()) throw DomainError("kernel inputs must have equal lengths");
    return std::visit(overloaded{[&](const PolynomialKernel& k) {
                                     check_params(k.c, k.degree);
                                     return std::pow(k.c + xi.dot(xj), k.degree);
                                 },
                                 [&](const CentrosymmetricPolynomialKernel& k) {
                                     check_params(k.c, k.degree);
                                     return 0.5 * std::pow(k.c + xi.dot(xj), k.degree) +
                                            0.5 * std::pow(reversed_product(k.c, xi, xj), k.degree);
                                 },
                                 [&](const FeatureKernel& k) {
                                     if (!k.feature || !k.prior) throw DomainError("feature kernel is incomplete");
                                     const Eigen::VectorXd fi = k.feature(xi);
                                     const Eigen::VectorXd fj = k.feature(xj);
                                     return fi.dot(k.prior->apply_covariance(fj));
                                 }},
                      spec);
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& inputs) {
    const Index n = inputs.rows();
    Eigen::MatrixXd k(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j <= i; ++j) {
            k(i, j) = kernel_eval(spec, inputs.row(i).transpose(), inputs.row(j).transpose());
            k(j, i) = k(i, j);
        }
    }
    return k;
}

Eigen::MatrixXd cross_kernel(const KernelSpec& spec, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd k(a.rows(), b.rows());
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < b.rows(); ++j) {
            k(i, j) = kernel_eval(spec, a.row(i).transpose(), b.row(j).transpose());
        }
    }
    return k;
}

double KernelDualSolution::predict(const Eigen::VectorXd& x) const {
    double s = 0.0;
    for (Index i = 0; i < inputs_.rows(); ++i) s += kernel_eval(spec_, x, inputs_.row(i).transpose()) * v_[i];
    return s;
}

Eigen::VectorXd KernelDualSolution::predict_rows(const Eigen::MatrixXd& x) const {
    return cross_kernel(spec_, x, inputs_) * v_;
}

KernelDualSolution solve_dual(const KernelSpec& spec, const Eigen::MatrixXd& inputs, const Eigen::VectorXd& y,
                              const NoiseCovariance& noise) {
    const Index n = inputs.rows();
    if (y.size() != n) throw DomainError("one target per input row is required");
    Eigen::MatrixXd k = gram_matrix(spec, inputs);
    bool pseudo = false;
    std::visit(overloaded{[&](const ScaledIdentityNoise& s) { k.diagonal().array() += s.variance; },
                          [&](const DiagonalNoise& d) {
                              if (d.variances.size() != n) throw DomainError("diagonal noise has wrong length");
                              k.diagonal() += d.variances;
                          },
                          [&](const StructuredNoise& s) {
                              if (s.covariance.rows() != n || s.covariance.cols() != n) {
                                  throw DomainError("structured noise covariance must be N x N");
                              }
                              k += s.covariance;
                              pseudo = true;
                          }},
               noise);
    Eigen::VectorXd v;
    if (pseudo) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
        const auto& lam = es.eigenvalues();
        const double cut = 1e-12 * std::max(0.0, lam.maxCoeff());
        Eigen::VectorXd coeff = es.eigenvectors().transpose() * y;
        for (Index i = 0; i < lam.size(); ++i) coeff[i] = lam[i] > cut ? coeff[i] / lam[i] : 0.0;
        v = es.eigenvectors() * coeff;
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success || llt.rcond() < std::numeric_limits<double>::epsilon()) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
            const auto& lam = es.eigenvalues();
            const double cond = lam[0] > 0.0 ? lam[lam.size() - 1] / lam[0] : std::numeric_limits<double>::infinity();
            throw NumericalError("kernel dual system is numerically singular", cond);
        }
        v = llt.solve(y);
    }
    return KernelDualSolution(spec, inputs, std::move(v));
}

}  // namespace stk
