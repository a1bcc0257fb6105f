#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stk::detail {

/// Thin SVD with U, V and singular values. BDCSVD vectors can be inaccurate when singular values
/// repeat, so the factorization is verified and recomputed with Jacobi when it does not reconstruct.
struct CheckedSvd {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd v;

    explicit CheckedSvd(const Eigen::MatrixXd& a, bool full_v = false) {
        const unsigned opts = Eigen::ComputeThinU | (full_v ? Eigen::ComputeFullV : Eigen::ComputeThinV);
        Eigen::BDCSVD<Eigen::MatrixXd> bdc(a, opts);
        take(bdc);
        if (!accurate(a)) {
            Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> jac(
                a, full_v ? (Eigen::ComputeFullU | Eigen::ComputeFullV) : opts);
            take(jac);
            u = u.leftCols(s.size()).eval();
        }
    }

private:
    template <class Svd>
    void take(const Svd& svd) {
        u = svd.matrixU();
        s = svd.singularValues();
        v = svd.matrixV();
    }

    bool accurate(const Eigen::MatrixXd& a) const {
        if (a.size() == 0) return true;
        const Eigen::Index k = s.size();
        const double scale = std::max(k > 0 ? s[0] : 0.0, 1e-300);
        const double tol = 1e3 * std::numeric_limits<double>::epsilon() *
                           std::sqrt(static_cast<double>(std::max(a.rows(), a.cols()))) * scale;
        const Eigen::MatrixXd vk = v.leftCols(k);
        if ((a * vk - u * s.asDiagonal()).cwiseAbs().maxCoeff() > tol) return false;
        if (v.cols() > k && (a * v.rightCols(v.cols() - k)).cwiseAbs().maxCoeff() > tol) return false;
        const Eigen::MatrixXd iv = v.transpose() * v - Eigen::MatrixXd::Identity(v.cols(), v.cols());
        const Eigen::MatrixXd iu = u.transpose() * u - Eigen::MatrixXd::Identity(u.cols(), u.cols());
        return iv.cwiseAbs().maxCoeff() <= 1e-10 && iu.cwiseAbs().maxCoeff() <= 1e-10;
    }
};

inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
    return a.size() == 0 ? Eigen::VectorXd(0) : CheckedSvd(a).s;
}

}  // namespace stk::detail
