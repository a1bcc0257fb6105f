#include "oracles.hpp"

#include "stk/constraints.hpp"
#include "stk/errors.hpp"
#include "stk/permutation.hpp"
#include "stk/posterior.hpp"
#include "stk/prior.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <doctest.h>

using namespace stk;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using Big = boost::multiprecision::cpp_bin_float_50;

/// Solves a square system in 50-digit arithmetic by Gaussian elimination with partial pivoting.
std::vector<Big> solve_big(std::vector<std::vector<Big>> a, std::vector<Big> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (abs(a[r][c]) > abs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const Big f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<Big> x(n);
    for (std::size_t i = n; i-- > 0;) {
        Big s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

MatrixXd noise_matrix(const NoiseCovariance& noise, Eigen::Index n) {
    if (const auto* s = std::get_if<ScaledIdentityNoise>(&noise)) return s->variance * MatrixXd::Identity(n, n);
    if (const auto* d = std::get_if<DiagonalNoise>(&noise)) return d->variances.asDiagonal();
    return std::get<StructuredNoise>(noise).covariance;
}

/// Posterior mean and covariance from the textbook formulas with explicit inverses.
std::pair<VectorXd, MatrixXd> brute_posterior(const ForwardModel& m, const MatrixXd& p0, const VectorXd& w0) {
    const MatrixXd si = noise_matrix(m.noise, m.phi.rows()).inverse();
    const MatrixXd pp = (p0.inverse() + m.phi.transpose() * si * m.phi).inverse();
    return {pp * (m.phi.transpose() * si * m.y + p0.inverse() * w0), pp};
}

StructuredPrior random_dense_prior(oracle::Gen& g, Eigen::Index n) {
    const MatrixXd f = g.mat(n, n) + 2.0 * MatrixXd::Identity(n, n);
    return StructuredPrior(TensorShape{static_cast<std::size_t>(n)}, g.vec(n), DenseFactor{f});
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("no measurements returns the prior") {
    oracle::Gen g(71);
    const auto prior = prior_from_cycles(hankel_permutation(TensorShape{4, 4}), false, {}, 1.5);
    ForwardModel m{MatrixXd(0, 16), VectorXd(0), ScaledIdentityNoise{1.0}};
    for (const auto& post : {solve_direct(m, prior), solve_sqrt(m, prior), solve_change_of_vars(m, prior),
                             solve_dual(m, prior).posterior}) {
        CHECK(post.mean == prior.mean());
        REQUIRE_FALSE(post.warnings.empty());
        CHECK(post.warnings.front().find("no measurements") != std::string::npos);
    }
    CHECK(oracle::max_abs(solve_direct(m, prior).covariance() - prior.dense_covariance()) <= 1e-14);
    CHECK(oracle::max_abs(solve_sqrt(m, prior).covariance() - prior.dense_covariance()) <= 1e-14);
}

TEST_CASE("zero design returns the prior") {
    oracle::Gen g(72);
    const auto prior = random_dense_prior(g, 5);
    ForwardModel m{MatrixXd::Zero(3, 5), VectorXd::Zero(3), ScaledIdentityNoise{1.0}};
    CHECK(oracle::rel_diff(solve_direct(m, prior).mean, prior.mean()) <= 1e-15);
    CHECK(oracle::max_abs(solve_direct(m, prior).covariance() - prior.dense_covariance()) <= 1e-12);
    CHECK(oracle::rel_diff(solve_change_of_vars(m, prior).mean, prior.mean()) <= 1e-15);
}

TEST_CASE("scalar case") {
    const StructuredPrior prior(TensorShape{1}, VectorXd::Zero(1), DenseFactor{MatrixXd::Ones(1, 1)});
    ForwardModel m{MatrixXd::Ones(1, 1), VectorXd::Constant(1, 2.0), ScaledIdentityNoise{1.0}};
    const auto d = solve_direct(m, prior);
    CHECK(d.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(d.covariance()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(solve_sqrt(m, prior).mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(solve_sqrt(m, prior).covariance()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(solve_change_of_vars(m, prior).mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    const auto dual = solve_dual(m, prior);
    CHECK(dual.v[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(dual.posterior.mean[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(solve_change_of_vars(m, prior).mean_only());
    CHECK_THROWS_AS(solve_change_of_vars(m, prior).covariance(), DomainError);
}

TEST_CASE("random instances match the explicit formulas") {
    oracle::Gen g(73);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Index n = 12;
        const Eigen::Index nobs = static_cast<Eigen::Index>(g.uniform(1, 20));
        const auto prior = random_dense_prior(g, n);
        NoiseCovariance noise = ScaledIdentityNoise{g.real(0.1, 2.0)};
        if (t % 2 == 1) noise = DiagonalNoise{(g.vec(nobs).array().abs() + 0.1).matrix()};
        ForwardModel m{g.mat(nobs, n), g.vec(nobs), noise};
        const auto [mean, cov] = brute_posterior(m, prior.dense_covariance(), prior.mean());
        const auto d = solve_direct(m, prior);
        CHECK(oracle::rel_diff(d.mean, mean) <= 1e-8);
        CHECK(oracle::max_abs(d.covariance() - cov) <= 1e-8 * oracle::max_abs(cov));
        const auto s = solve_sqrt(m, prior);
        CHECK(oracle::rel_diff(s.mean, d.mean) <= 1e-8);
        CHECK(oracle::max_abs(s.covariance() - cov) <= 1e-8 * oracle::max_abs(cov));
        CHECK(oracle::rel_diff(solve_change_of_vars(m, prior).mean, mean) <= 1e-8);
        CHECK(oracle::rel_diff(solve_dual(m, prior).posterior.mean, mean) <= 1e-8);
        CHECK(oracle::rel_diff(solve_pseudo_precision(m, prior).mean, mean) <= 1e-8);
        Eigen::SelfAdjointEigenSolver<MatrixXd> es(d.covariance(), Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
    }
}

TEST_CASE("square-root solve is at least as accurate as the normal equations") {
    // Condition of I + G^T G is 1e8 by construction.
    oracle::Gen g(74);
    const Eigen::Index n = 8;
    Eigen::HouseholderQR<MatrixXd> q1(g.mat(n, n)), q2(g.mat(n, n));
    const MatrixXd u = q1.householderQ(), v = q2.householderQ();
    VectorXd sv(n);
    for (Eigen::Index i = 0; i < n; ++i) sv[i] = std::pow(10.0, 4.0 * static_cast<double>(i) / static_cast<double>(n - 1));
    const MatrixXd phi = u * sv.asDiagonal() * v.transpose();
    const VectorXd y = g.vec(n);
    const StructuredPrior prior(TensorShape{static_cast<std::size_t>(n)}, VectorXd::Zero(n), DenseFactor{MatrixXd::Identity(n, n)});
    ForwardModel m{phi, y, ScaledIdentityNoise{1.0}};

    std::vector<std::vector<Big>> h(static_cast<std::size_t>(n), std::vector<Big>(static_cast<std::size_t>(n)));
    std::vector<Big> rhs(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            Big s = i == j ? 1 : 0;
            for (Eigen::Index k = 0; k < n; ++k) s += Big(phi(k, i)) * Big(phi(k, j));
            h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = s;
        }
        Big s = 0;
        for (Eigen::Index k = 0; k < n; ++k) s += Big(phi(k, i)) * Big(y[k]);
        rhs[static_cast<std::size_t>(i)] = s;
    }
    const auto exact = solve_big(h, rhs);
    VectorXd ref(n);
    for (Eigen::Index i = 0; i < n; ++i) ref[i] = static_cast<double>(exact[static_cast<std::size_t>(i)]);

    const double err_direct = oracle::rel_diff(solve_direct(m, prior).mean, ref);
    const double err_sqrt = oracle::rel_diff(solve_sqrt(m, prior).mean, ref);
    MESSAGE("direct " << err_direct << ", square root " << err_sqrt);
    CHECK(err_sqrt <= err_direct);
    CHECK(err_sqrt <= 1e-10);
}

TEST_CASE("change of variables on a Hankel completion instance") {
    oracle::Gen g(75);
    const auto perm = hankel_permutation(TensorShape{6, 6});
    std::mt19937_64 rng(2);
    for (const auto& prior : {prior_from_cycles(perm, false, {}, 2.0), prior_from_permutation(perm, false, {}, 2.0),
                              prior_from_constraints(invariance_constraints(perm, false), {}, {}, 2.0)}) {
        const VectorXd truth = sample(prior, rng);
        MatrixXd phi = MatrixXd::Zero(18, 36);
        for (Eigen::Index i = 0; i < 18; ++i) phi(i, 2 * i) = 1.0;
        const VectorXd y = phi * truth + 0.1 * g.vec(18);
        ForwardModel m{phi, y, ScaledIdentityNoise{0.01}};
        CHECK(oracle::rel_diff(solve_change_of_vars(m, prior).mean, solve_direct(m, prior).mean) <= 1e-8);
    }
}

TEST_CASE("averaged-powers and dense-factor priors give the same posterior") {
    oracle::Gen g(76);
    const auto perm = symmetric_permutation(TensorShape::cube(3, 3));
    const auto a = prior_from_permutation(perm, false, {}, 1.2);
    const auto b = prior_from_constraints(invariance_constraints(perm, false), {}, {}, 1.2);
    ForwardModel m{g.mat(7, 27), g.vec(7), ScaledIdentityNoise{0.3}};
    CHECK(oracle::rel_diff(solve_change_of_vars(m, a).mean, solve_change_of_vars(m, b).mean) <= 1e-10);
    CHECK(oracle::rel_diff(solve_direct(m, a).mean, solve_direct(m, b).mean) <= 1e-10);
}

TEST_CASE("dual solve") {
    const StructuredPrior prior(TensorShape{3}, VectorXd::Zero(3), DenseFactor{MatrixXd::Identity(3, 3)});
    VectorXd y(3);
    y << 1, -2, 4;
    ForwardModel m{MatrixXd::Identity(3, 3), y, ScaledIdentityNoise{1.0}};
    const auto d = solve_dual(m, prior);
    CHECK(oracle::rel_diff(d.v, y / 2) <= 1e-15);
    CHECK(oracle::rel_diff(d.posterior.mean, y / 2) <= 1e-15);

    oracle::Gen g(77);
    for (int t = 0; t < 10; ++t) {
        const auto p = prior_from_cycles(hankel_permutation(TensorShape{5, 5}), false, {}, 1.0);
        ForwardModel rm{g.mat(10, 25), g.vec(10), ScaledIdentityNoise{0.5}};
        const auto dual = solve_dual(rm, p);
        const auto primal = solve_sqrt(rm, p);
        const VectorXd star = g.vec(25);
        CHECK(std::abs(dual.predict(star) - primal.mean.dot(star)) <= 1e-8 * std::max(1.0, std::abs(primal.mean.dot(star))));
    }
}

TEST_CASE("dual solve on a large feature space") {
    oracle::Gen g(78);
    const auto p = prior_from_cycles(hankel_permutation(TensorShape{100, 100}), false);
    MatrixXd phi = MatrixXd::Zero(50, 10000);
    for (Eigen::Index i = 0; i < 50; ++i) phi(i, static_cast<Eigen::Index>(g.uniform(0, 9999))) = 1.0;
    ForwardModel m{phi, g.vec(50), ScaledIdentityNoise{1.0}};
    const auto d = solve_dual(m, p);
    CHECK(d.v.size() == 50);
    const auto hcs = invariance_constraints(hankel_permutation(TensorShape{100, 100}), false);
    CHECK(hcs.residual(d.posterior.mean).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("truncated SVD") {
    oracle::Gen g(79);
    const auto p = prior_from_cycles(hankel_permutation(TensorShape{4, 4}), false, {}, 1.0);
    ForwardModel m{g.mat(6, 16), g.vec(6), ScaledIdentityNoise{1.0}};
    const auto full = truncated_svd_solve(m, p, p.inner_dimension());
    CHECK(oracle::rel_diff(full.mean, solve_sqrt(m, p).mean) <= 1e-10);
    const auto clamped = truncated_svd_solve(m, p, 1000);
    CHECK(oracle::rel_diff(clamped.mean, full.mean) <= 1e-12);
    REQUIRE_FALSE(clamped.warnings.empty());
    CHECK(clamped.warnings.back().find("clamped") != std::string::npos);
    CHECK_THROWS_AS(truncated_svd_solve(m, p, 0), DomainError);

    // One-dimensional prior support and exact data: rank 1 recovers the truth.
    const auto line = prior_from_cycles(toeplitz_permutation(TensorShape{5}), false, {}, 1e3);
    const VectorXd truth = VectorXd::Constant(5, 3.0);
    const MatrixXd phi = g.mat(3, 5);
    ForwardModel exact{phi, phi * truth, ScaledIdentityNoise{1e-10}};
    const auto r1 = truncated_svd_solve(exact, line, 1);
    CHECK(oracle::rel_diff(r1.mean, truth) <= 1e-10);
    CHECK(oracle::rel_diff(r1.mean, solve_sqrt(exact, line).mean) <= 1e-12);
}

TEST_CASE("maximum likelihood") {
    oracle::Gen g(80);
    const VectorXd y = g.vec(6);
    CHECK(oracle::rel_diff(max_likelihood({MatrixXd::Identity(6, 6), y, ScaledIdentityNoise{1.0}}), y) <= 1e-14);
    MatrixXd mask = MatrixXd::Zero(3, 6);
    mask(0, 1) = mask(1, 3) = mask(2, 4) = 1.0;
    const VectorXd w = max_likelihood({mask, y.head(3), ScaledIdentityNoise{2.0}});
    VectorXd ref = VectorXd::Zero(6);
    ref[1] = y[0];
    ref[3] = y[1];
    ref[4] = y[2];
    CHECK(oracle::rel_diff(w, ref) <= 1e-14);
}

TEST_CASE("posterior means keep the prior structure") {
    oracle::Gen g(81);
    for (int t = 0; t < 10; ++t) {
        const TensorShape s(g.cube(2, 3, 2, 5, 125));
        const auto perm = t % 2 == 0 ? hankel_permutation(s) : symmetric_permutation(s);
        const auto cs = invariance_constraints(perm, false);
        const auto p = prior_from_cycles(perm, false, {}, 1.0);
        const Eigen::Index n = static_cast<Eigen::Index>(s.size());
        ForwardModel m{g.mat(static_cast<Eigen::Index>(g.uniform(1, 30)), n), VectorXd(), ScaledIdentityNoise{0.2}};
        m.y = g.vec(m.phi.rows());
        for (const auto& w : {solve_direct(m, p).mean, solve_sqrt(m, p).mean, solve_change_of_vars(m, p).mean,
                              solve_dual(m, p).posterior.mean}) {
            CHECK(cs.residual(w).cwiseAbs().maxCoeff() <= 1e-8);
        }
    }
}

TEST_CASE("solvers agree for every noise representation") {
    oracle::Gen g(82);
    for (int t = 0; t < 30; ++t) {
        const TensorShape s(g.cube(2, 3, 2, 6, 200));
        const auto perm = t % 3 == 0 ? hankel_permutation(s) : (t % 3 == 1 ? circulant_permutation(s) : symmetric_permutation(s));
        const auto p = t % 2 == 0 ? prior_from_cycles(perm, false, {}, 1.3) : prior_from_constraints(invariance_constraints(perm, false), {}, {}, 1.3);
        const Eigen::Index n = static_cast<Eigen::Index>(s.size());
        const Eigen::Index nobs = static_cast<Eigen::Index>(g.uniform(1, std::min<std::size_t>(100, s.size())));
        MatrixXd phi = MatrixXd::Zero(nobs, n);
        for (Eigen::Index i = 0; i < nobs; ++i) phi(i, static_cast<Eigen::Index>(g.uniform(0, s.size() - 1))) = 1.0;
        std::mt19937_64 rng(static_cast<std::uint64_t>(t));
        const VectorXd truth = sample(p, rng);
        NoiseCovariance noise;
        VectorXd y;
        switch (t % 3) {
            case 0:
                noise = ScaledIdentityNoise{0.5};
                y = phi * truth + g.vec(nobs);
                break;
            case 1:
                noise = DiagonalNoise{(g.vec(nobs).array().abs() + 0.2).matrix()};
                y = phi * truth + g.vec(nobs);
                break;
            default:
                noise = projected_structured_noise(0.4, phi, p);
                y = phi * (truth + std::sqrt(0.4) / 1.3 * (sample(p, rng) - p.mean()));
        }
        ForwardModel m{phi, y, noise};
        const VectorXd ref = solve_sqrt(m, p).mean;
        CHECK(oracle::rel_diff(solve_direct(m, p).mean, ref) <= 1e-8);
        CHECK(oracle::rel_diff(solve_change_of_vars(m, p).mean, ref) <= 1e-8);
        CHECK(oracle::rel_diff(solve_dual(m, p).posterior.mean, ref) <= 1e-8);
    }
}

TEST_CASE("projected structured noise") {
    oracle::Gen g(83);
    const auto p = prior_from_cycles(hankel_permutation(TensorShape{3, 3}), false, {}, 2.0);
    const MatrixXd phi = g.mat(4, 9);
    const auto sn = projected_structured_noise(0.5, phi, p);
    CHECK(oracle::max_abs(sn.covariance - 0.5 * phi * (p.dense_covariance() / 4.0) * phi.transpose()) <= 1e-13);
    const MatrixXd w = whiten(sn, MatrixXd::Identity(4, 4));
    CHECK(w.rows() == 4);
    CHECK(oracle::max_abs(w.transpose() * w - oracle::pinv(sn.covariance, 1e-12)) <= 1e-8 * oracle::max_abs(oracle::pinv(sn.covariance, 1e-12)));
    const MatrixXd phi6 = g.mat(7, 9);
    const MatrixXd w6 = whiten(projected_structured_noise(1.0, phi6, p), MatrixXd::Identity(7, 7));
    CHECK(w6.rows() == 5);
}

TEST_CASE("multi-column means") {
    oracle::Gen g(84);
    const auto p = prior_from_permutation(circulant_permutation(TensorShape{5, 5}), false, {}, 0.3);
    const MatrixXd phi = g.mat(12, 25);
    const MatrixXd y = g.mat(12, 4);
    const MatrixXd sup = posterior_mean_columns(phi, y, ScaledIdentityNoise{1.0}, p, PrecisionForm::support);
    const MatrixXd full = posterior_mean_columns(phi, y, ScaledIdentityNoise{1.0}, p, PrecisionForm::full_space);
    for (Eigen::Index c = 0; c < 4; ++c) {
        ForwardModel m{phi, y.col(c), ScaledIdentityNoise{1.0}};
        CHECK(oracle::rel_diff(sup.col(c), solve_sqrt(m, p).mean) <= 1e-10);
        CHECK(oracle::rel_diff(full.col(c), solve_pseudo_precision(m, p).mean) <= 1e-10);
        // Full-space form: minimum-norm solution of the stacked pseudo-precision system.
        const MatrixXd q = p.precision_sqrt_dense();
        MatrixXd sys(12 + 25, 25);
        sys << phi, q;
        VectorXd rhs(37);
        rhs << y.col(c), q * p.mean();
        CHECK(oracle::rel_diff(full.col(c), oracle::pinv(sys) * rhs) <= 1e-9);
    }
}

TEST_CASE("precision spectra") {
    oracle::Gen g(85);
    const auto p = prior_from_cycles(hankel_permutation(TensorShape{4, 4}), false, {}, 0.5);
    const MatrixXd phi = g.mat(5, 16);
    const auto sp = precision_singular_values(phi, ScaledIdentityNoise{4.0}, p);
    REQUIRE(sp.prior.size() == 16);
    for (Eigen::Index i = 0; i < 7; ++i) CHECK(sp.prior[i] == doctest::Approx(2.0).epsilon(1e-12));
    for (Eigen::Index i = 7; i < 16; ++i) CHECK(std::abs(sp.prior[i]) <= 1e-12);
    Eigen::JacobiSVD<MatrixXd> lik(phi / 2.0);
    for (Eigen::Index i = 0; i < 5; ++i) CHECK(sp.likelihood[i] == doctest::Approx(lik.singularValues()[i]).epsilon(1e-12));
    MatrixXd st(21, 16);
    st << phi / 2.0, p.precision_sqrt_dense();
    Eigen::JacobiSVD<MatrixXd> post(st);
    CHECK(oracle::rel_diff(sp.posterior, post.singularValues()) <= 1e-12);
}

TEST_CASE("errors") {
    oracle::Gen g(86);
    const auto p = random_dense_prior(g, 4);
    CHECK_THROWS_AS(solve_direct({g.mat(2, 5), g.vec(2), ScaledIdentityNoise{1.0}}, p), DomainError);
    CHECK_THROWS_AS(solve_sqrt({g.mat(2, 4), g.vec(3), ScaledIdentityNoise{1.0}}, p), DomainError);
    CHECK_THROWS_AS(solve_direct({g.mat(2, 4), g.vec(2), ScaledIdentityNoise{0.0}}, p), DomainError);
    CHECK_THROWS_AS(solve_direct({g.mat(2, 4), g.vec(2), DiagonalNoise{VectorXd::Ones(3)}}, p), DomainError);
    MatrixXd dup(2, 4);
    dup.row(0) = g.vec(4).transpose();
    dup.row(1) = dup.row(0);
    try {
        solve_dual({dup, g.vec(2), ScaledIdentityNoise{1e-300}}, p);
        FAIL("expected a numerical error");
    } catch (const NumericalError& e) {
        CHECK(e.condition_estimate() > 1e15);
    }
    CHECK(to_string(SolverKind::square_root) == "square_root");
}

}  // TEST_SUITE
