#include "stk/posterior.hpp"

#include "stk/errors.hpp"
#include "stk/nullspace.hpp"

#include "checked_svd.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>

namespace stk {

namespace {

constexpr double kPseudoCutoff = 1e-12;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

// Applies W with W^T W = Sigma^+ for one noise model.
class Whitener {
public:
    Whitener(const NoiseCovariance& noise, Index n) {
        std::visit(overloaded{[&](const ScaledIdentityNoise& s) {
                                  if (!(s.variance > 0.0)) throw DomainError("noise variance must be positive");
                                  scale_ = 1.0 / std::sqrt(s.variance);
                                  kind_ = 0;
                              },
                              [&](const DiagonalNoise& d) {
                                  if (d.variances.size() != n) {
                                      throw DomainError("diagonal noise has wrong length");
                                  }
                                  if (n > 0 && !(d.variances.minCoeff() > 0.0)) {
                                      throw DomainError("diagonal noise variances must be positive");
                                  }
                                  diag_ = d.variances.cwiseSqrt().cwiseInverse();
                                  kind_ = 1;
                              },
                              [&](const StructuredNoise& s) {
                                  if (s.covariance.rows() != n || s.covariance.cols() != n) {
                                      throw DomainError("structured noise covariance must be N x N");
                                  }
                                  kind_ = 2;
                                  if (n == 0) {
                                      w_.resize(0, 0);
                                      return;
                                  }
                                  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.covariance);
                                  const auto& lam = es.eigenvalues();
                                  const double cut = kPseudoCutoff * std::max(0.0, lam.maxCoeff());
                                  std::vector<Index> keep;
                                  for (Index i = lam.size() - 1; i >= 0; --i) {
                                      if (lam[i] > cut) keep.push_back(i);
                                  }
                                  w_.resize(static_cast<Index>(keep.size()), n);
                                  for (std::size_t r = 0; r < keep.size(); ++r) {
                                      w_.row(static_cast<Index>(r)) =
                                          es.eigenvectors().col(keep[r]).transpose() / std::sqrt(lam[keep[r]]);
                                  }
                              }},
                   noise);
    }

    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const {
        switch (kind_) {
            case 0: return scale_ * x;
            case 1: return diag_.asDiagonal() * x;
            default: return w_ * x;
        }
    }

private:
    int kind_ = 0;
    double scale_ = 1.0;
    Eigen::VectorXd diag_;
    Eigen::MatrixXd w_;
};

void validate(const ForwardModel& model, const StructuredPrior& prior) {
    if (model.phi.cols() != prior.size()) {
        throw DomainError("design matrix has " + std::to_string(model.phi.cols()) + " columns, prior has " +
                          std::to_string(prior.size()) + " entries");
    }
    if (model.y.size() != model.phi.rows()) {
        throw DomainError("measurement vector has length " + std::to_string(model.y.size()) + ", design has " +
                          std::to_string(model.phi.rows()) + " rows");
    }
}

std::vector<std::string> data_warnings(const ForwardModel& model) {
    if (model.phi.rows() == 0) return {"no measurements: posterior equals prior"};
    return {};
}

// Support-coordinate data: G = W Phi F and r = W (y - Phi w0).
struct SupportSystem {
    Eigen::MatrixXd f;
    Eigen::MatrixXd g;
    Eigen::VectorXd r;
};

SupportSystem support_system(const ForwardModel& model, const StructuredPrior& prior) {
    validate(model, prior);
    Whitener w(model.noise, model.phi.rows());
    SupportSystem s;
    s.f = prior.support_factor();
    s.g = w.apply(model.phi * s.f);
    s.r = w.apply(model.y - model.phi * prior.mean());
    return s;
}

// C Phi^T, one covariance application per design row.
Eigen::MatrixXd covariance_times_transpose(const StructuredPrior& prior, const Eigen::MatrixXd& rows) {
    Eigen::MatrixXd out(prior.size(), rows.rows());
    for (Index i = 0; i < rows.rows(); ++i) {
        out.col(i) = prior.apply_covariance(rows.row(i).transpose());
    }
    return out;
}

Eigen::MatrixXd stack(const Eigen::MatrixXd& top, const Eigen::MatrixXd& bottom) {
    Eigen::MatrixXd m(top.rows() + bottom.rows(), std::max(top.cols(), bottom.cols()));
    m << top, bottom;
    return m;
}

Eigen::VectorXd stack(const Eigen::VectorXd& top, const Eigen::VectorXd& bottom) {
    Eigen::VectorXd v(top.size() + bottom.size());
    v << top, bottom;
    return v;
}

double svd_condition(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 1.0;
    const Eigen::VectorXd s = detail::singular_values(m);
    const double smin = s[s.size() - 1];
    return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

StructuredNoise projected_structured_noise(double variance, const Eigen::MatrixXd& phi, const StructuredPrior& prior) {
    if (phi.cols() != prior.size()) throw DomainError("design matrix does not match the prior size");
    if (!(variance >= 0.0)) throw DomainError("noise variance must be non-negative");
    const double s = prior.scale();
    const double unscale = (s > 0.0) ? 1.0 / (s * s) : 1.0;
    Eigen::MatrixXd c = phi * covariance_times_transpose(prior, phi);
    c = 0.5 * (c + c.transpose()).eval();
    return StructuredNoise{variance * unscale * c};
}

Eigen::MatrixXd whiten(const NoiseCovariance& noise, const Eigen::MatrixXd& x) {
    return Whitener(noise, x.rows()).apply(x);
}

std::string to_string(SolverKind kind) {
    switch (kind) {
        case SolverKind::direct: return "direct";
        case SolverKind::square_root: return "square_root";
        case SolverKind::change_of_variables: return "change_of_variables";
        case SolverKind::dual: return "dual";
        case SolverKind::truncated_svd: return "truncated_svd";
        case SolverKind::pseudo_precision: return "pseudo_precision";
    }
    return "unknown";
}

Eigen::MatrixXd GaussianPosterior::covariance() const {
    if (!covariance_factor) throw DomainError("posterior from a mean-only solver has no covariance");
    return *covariance_factor * covariance_factor->transpose();
}

GaussianPosterior solve_direct(const ForwardModel& model, const StructuredPrior& prior) {
    const SupportSystem s = support_system(model, prior);
    const Index r = s.f.cols();
    const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(r, r) + s.g.transpose() * s.g;
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success || llt.rcond() < std::numeric_limits<double>::epsilon()) {
        throw NumericalError("posterior normal equations are numerically singular", svd_condition(h));
    }
    const Eigen::VectorXd z = llt.solve(s.g.transpose() * s.r);
    GaussianPosterior post;
    post.mean = prior.mean() + s.f * z;
    post.covariance_factor = Eigen::MatrixXd(llt.matrixL().solve(s.f.transpose()).transpose());
    post.solver = SolverKind::direct;
    post.warnings = data_warnings(model);
    return post;
}

GaussianPosterior solve_sqrt(const ForwardModel& model, const StructuredPrior& prior) {
    const SupportSystem s = support_system(model, prior);
    const Index r = s.f.cols();
    const Eigen::MatrixXd m = stack(s.g, Eigen::MatrixXd::Identity(r, r));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    const Eigen::MatrixXd rr = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    if (r > 0) {
        const Eigen::VectorXd d = rr.diagonal().cwiseAbs();
        if (d.minCoeff() <= std::numeric_limits<double>::epsilon() * d.maxCoeff()) {
            throw NumericalError("square-root system is numerically singular", svd_condition(m));
        }
    }
    const Eigen::VectorXd z = qr.solve(stack(s.r, Eigen::VectorXd::Zero(r)));
    GaussianPosterior post;
    post.mean = prior.mean() + s.f * z;
    post.covariance_factor =
        Eigen::MatrixXd(rr.transpose().triangularView<Eigen::Lower>().solve(s.f.transpose()).transpose());
    post.solver = SolverKind::square_root;
    post.warnings = data_warnings(model);
    return post;
}

GaussianPosterior solve_change_of_vars(const ForwardModel& model, const StructuredPrior& prior) {
    validate(model, prior);
    Whitener w(model.noise, model.phi.rows());
    const Index n = prior.size();
    const Eigen::MatrixXd wphi = w.apply(model.phi);
    const Eigen::MatrixXd wphi_c = covariance_times_transpose(prior, wphi).transpose();
    const Eigen::MatrixXd b = prior.is_scaled_projector() ? Eigen::MatrixXd(prior.scale() * Eigen::MatrixXd::Identity(n, n))
                                                          : Eigen::MatrixXd(prior.support_factor().transpose());
    const Eigen::MatrixXd sys = stack(wphi_c, b);
    const Eigen::VectorXd rhs = stack(Eigen::VectorXd(w.apply(model.y - model.phi * prior.mean())),
                                      Eigen::VectorXd::Zero(b.rows()));
    const Eigen::VectorXd x = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(sys).solve(rhs);
    GaussianPosterior post;
    post.mean = prior.apply_covariance(x) + prior.mean();
    post.solver = SolverKind::change_of_variables;
    post.warnings = data_warnings(model);
    return post;
}

DualSolution solve_dual(const ForwardModel& model, const StructuredPrior& prior) {
    validate(model, prior);
    const Index nobs = model.phi.rows();
    const Eigen::MatrixXd c_phi_t = covariance_times_transpose(prior, model.phi);
    Eigen::MatrixXd k = model.phi * c_phi_t;
    k = 0.5 * (k + k.transpose()).eval();
    const Eigen::VectorXd z = model.y - model.phi * prior.mean();

    DualSolution out;
    std::visit(overloaded{[&](const ScaledIdentityNoise& s) {
                              if (!(s.variance > 0.0)) throw DomainError("noise variance must be positive");
                              k.diagonal().array() += s.variance;
                          },
                          [&](const DiagonalNoise& d) {
                              if (d.variances.size() != nobs) throw DomainError("diagonal noise has wrong length");
                              k.diagonal() += d.variances;
                          },
                          [&](const StructuredNoise& s) {
                              if (s.covariance.rows() != nobs || s.covariance.cols() != nobs) {
                                  throw DomainError("structured noise covariance must be N x N");
                              }
                              k += s.covariance;
                          }},
               model.noise);

    if (nobs == 0) {
        out.v.resize(0);
    } else if (std::holds_alternative<StructuredNoise>(model.noise)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
        const auto& lam = es.eigenvalues();
        const double cut = kPseudoCutoff * std::max(0.0, lam.maxCoeff());
        Eigen::VectorXd coeff = es.eigenvectors().transpose() * z;
        for (Index i = 0; i < lam.size(); ++i) coeff[i] = lam[i] > cut ? coeff[i] / lam[i] : 0.0;
        out.v = es.eigenvectors() * coeff;
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(k);
        if (llt.info() != Eigen::Success || llt.rcond() < std::numeric_limits<double>::epsilon()) {
            throw NumericalError("dual system is numerically singular", svd_condition(k));
        }
        out.v = llt.solve(z);
    }
    out.posterior.mean = prior.mean() + c_phi_t * out.v;
    out.posterior.solver = SolverKind::dual;
    out.posterior.warnings = data_warnings(model);
    return out;
}

GaussianPosterior truncated_svd_solve(const ForwardModel& model, const StructuredPrior& prior, Index rank,
                                      PrecisionForm form) {
    if (rank < 1) throw DomainError("truncation rank must be at least 1");
    validate(model, prior);
    Eigen::MatrixXd m;
    Eigen::VectorXd rhs;
    Eigen::MatrixXd f;
    if (form == PrecisionForm::support) {
        SupportSystem s = support_system(model, prior);
        const Index r = s.f.cols();
        m = stack(s.g, Eigen::MatrixXd::Identity(r, r));
        rhs = stack(s.r, Eigen::VectorXd::Zero(r));
        f = std::move(s.f);
    } else {
        Whitener w(model.noise, model.phi.rows());
        const Eigen::MatrixXd q = prior.precision_sqrt_dense();
        m = stack(w.apply(model.phi), q);
        rhs = stack(Eigen::VectorXd(w.apply(model.y)), Eigen::VectorXd(q * prior.mean()));
    }

    GaussianPosterior post;
    post.solver = SolverKind::truncated_svd;
    post.warnings = data_warnings(model);
    const Index available = std::min(m.rows(), m.cols());
    if (rank > available) {
        post.warnings.push_back("truncation rank " + std::to_string(rank) + " clamped to " + std::to_string(available));
        rank = available;
    }
    Eigen::VectorXd sol = Eigen::VectorXd::Zero(m.cols());
    if (available > 0) {
        const detail::CheckedSvd svd(m);
        const auto& sv = svd.s;
        const double cut = rank_cutoff(sv[0], m.rows(), m.cols());
        for (Index i = 0; i < rank; ++i) {
            if (sv[i] <= cut) break;
            sol += svd.v.col(i) * (svd.u.col(i).dot(rhs) / sv[i]);
        }
    }
    post.mean = (form == PrecisionForm::support) ? Eigen::VectorXd(prior.mean() + f * sol) : sol;
    return post;
}

GaussianPosterior solve_pseudo_precision(const ForwardModel& model, const StructuredPrior& prior) {
    validate(model, prior);
    GaussianPosterior post;
    post.mean = posterior_mean_columns(model.phi, model.y, model.noise, prior, PrecisionForm::full_space).col(0);
    post.solver = SolverKind::pseudo_precision;
    post.warnings = data_warnings(model);
    return post;
}

Eigen::VectorXd max_likelihood(const ForwardModel& model) {
    if (model.y.size() != model.phi.rows()) throw DomainError("measurement vector does not match the design");
    Whitener w(model.noise, model.phi.rows());
    if (model.phi.rows() == 0) return Eigen::VectorXd::Zero(model.phi.cols());
    return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(w.apply(model.phi)).solve(w.apply(model.y));
}

Eigen::MatrixXd posterior_mean_columns(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& y,
                                       const NoiseCovariance& noise, const StructuredPrior& prior,
                                       PrecisionForm form) {
    if (phi.cols() != prior.size() || y.rows() != phi.rows()) {
        throw DomainError("design, measurements, and prior sizes do not match");
    }
    Whitener w(noise, phi.rows());
    const Eigen::MatrixXd mean_cols = prior.mean().replicate(1, y.cols());
    if (form == PrecisionForm::support) {
        const Eigen::MatrixXd f = prior.support_factor();
        const Index r = f.cols();
        const Eigen::MatrixXd g = w.apply(phi * f);
        const Eigen::MatrixXd res = w.apply(y - phi * mean_cols);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(g.rows() + r, y.cols());
        rhs.topRows(g.rows()) = res;
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(stack(g, Eigen::MatrixXd::Identity(r, r)));
        return mean_cols + f * qr.solve(rhs);
    }
    const Eigen::MatrixXd q = prior.precision_sqrt_dense();
    const Eigen::MatrixXd wphi = w.apply(phi);
    Eigen::MatrixXd rhs(wphi.rows() + q.rows(), y.cols());
    rhs << w.apply(y), q * mean_cols;
    return Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(stack(wphi, q)).solve(rhs);
}

PrecisionSpectra precision_singular_values(const Eigen::MatrixXd& phi, const NoiseCovariance& noise,
                                           const StructuredPrior& prior) {
    if (phi.cols() != prior.size()) throw DomainError("design matrix does not match the prior size");
    const Eigen::MatrixXd q = prior.precision_sqrt_dense();
    const Eigen::MatrixXd wphi = whiten(noise, phi);
    PrecisionSpectra out;
    out.prior = detail::singular_values(q);
    out.likelihood = detail::singular_values(wphi);
    out.posterior = detail::singular_values(stack(wphi, q));
    return out;
}

}  // namespace stk
