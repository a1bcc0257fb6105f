#include "stk/errors.hpp"
#include "stk/experiments/hankel_completion.hpp"
#include "stk/experiments/idx.hpp"
#include "stk/experiments/mnist.hpp"
#include "stk/experiments/report.hpp"
#include "stk/experiments/sampling.hpp"
#include "stk/kernels.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <iostream>

namespace ex = stk::experiments;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

struct KernelGramConfig {
    std::string kernel = "centrosymmetric";
    double c = 1.0;
    int degree = 2;
    std::size_t count = 10;
    std::size_t length = 4;
    std::uint64_t seed = 1;
};

void run_kernel_gram(const KernelGramConfig& cfg, const std::string& out) {
    stk::KernelSpec spec;
    if (cfg.kernel == "polynomial") {
        spec = stk::PolynomialKernel{cfg.c, cfg.degree};
    } else if (cfg.kernel == "centrosymmetric") {
        spec = stk::CentrosymmetricPolynomialKernel{cfg.c, cfg.degree};
    } else {
        throw ex::UsageError("--kernel must be polynomial or centrosymmetric");
    }
    if (cfg.count < 1 || cfg.length < 1) throw ex::UsageError("--count and --length must be positive");
    std::mt19937_64 rng = ex::random_stream(cfg.seed, 1);
    std::normal_distribution<double> nd(0.0, 1.0);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(cfg.count), static_cast<Eigen::Index>(cfg.length));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = nd(rng);
    }
    const Eigen::MatrixXd k = stk::gram_matrix(spec, x);
    std::vector<std::string> header{"i"};
    for (Eigen::Index j = 0; j < k.cols(); ++j) header.push_back("k" + std::to_string(j + 1));
    ex::CsvTable csv(header);
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
        std::vector<std::string> row{std::to_string(i + 1)};
        for (Eigen::Index j = 0; j < k.cols(); ++j) row.push_back(ex::format_double(k(i, j)));
        csv.add_row(std::move(row));
    }
    ex::CsvTable inputs([&] {
        std::vector<std::string> h{"i"};
        for (std::size_t j = 0; j < cfg.length; ++j) h.push_back("x" + std::to_string(j + 1));
        return h;
    }());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        std::vector<std::string> row{std::to_string(i + 1)};
        for (Eigen::Index j = 0; j < x.cols(); ++j) row.push_back(ex::format_double(x(i, j)));
        inputs.add_row(std::move(row));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    ex::Json summary = ex::manifest("kernel-gram", {{"kernel", cfg.kernel},
                                                    {"c", cfg.c},
                                                    {"degree", cfg.degree},
                                                    {"count", cfg.count},
                                                    {"length", cfg.length},
                                                    {"seed", cfg.seed}});
    summary["result"] = {{"min_eigenvalue", es.eigenvalues()[0]}};
    ex::write_file(out, "inputs.csv", inputs.str());
    ex::write_file(out, "gram.csv", csv.str());
    ex::write_file(out, "summary.json", ex::dump_json(summary));
}

void print_table(const std::vector<ex::EstimateRow>& rows) {
    for (const auto& r : rows) {
        std::cout << r.name << ": relative error " << ex::format_double(r.relative_error) << ", Hankel residual "
                  << ex::format_double(r.hankel_residual) << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structured tensor priors: sampling, Hankel completion, and MNIST classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ex::version_string());

    std::string out = "out";
    std::uint64_t seed = 1;
    std::size_t dense_threshold = stk::NumericOptions{}.dense_threshold;

    ex::SampleConfig sample_cfg;
    bool save_prior = false;
    auto* sample = app.add_subcommand("sample", "Draw samples from a structured prior");
    sample->add_option("--structure", sample_cfg.structure, "Structure name")
        ->check(CLI::IsMember(ex::sample_structures()))
        ->required();
    sample->add_option("--shape", sample_cfg.shape, "Dimensions, comma separated")->delimiter(',');
    sample->add_option("--sigma-p", sample_cfg.sigma_p2, "Prior variance sigma_P^2");
    sample->add_option("--count", sample_cfg.count, "Number of samples");
    sample->add_option("--seed", seed, "Random seed");
    sample->add_option("--out", out, "Output directory");
    sample->add_option("--dense-threshold", dense_threshold, "Largest column count formed densely");
    sample->add_flag("--save-prior", save_prior, "Also write prior.json");

    ex::HankelConfig hankel_cfg;
    std::vector<std::size_t> hankel_shape{10, 10};
    auto* hankel = app.add_subcommand("hankel-complete", "Complete a Hankel matrix from noisy samples");
    hankel->add_option("--shape", hankel_shape, "Matrix shape J,J")->delimiter(',');
    hankel->add_option("--rate", hankel_cfg.rate, "Fraction of entries measured");
    hankel->add_option("--sigma-p", hankel_cfg.sigma_p2, "Prior variance sigma_P^2");
    hankel->add_option("--sigma-e", hankel_cfg.sigma_e2, "Noise variance sigma_e^2");
    hankel->add_option("--noise", hankel_cfg.noise, "Assumed noise covariance")
        ->check(CLI::IsMember({"white", "structured"}));
    hankel->add_flag("--structured-data", hankel_cfg.structured_data, "Draw data with Hankel-structured noise");
    hankel->add_flag("--with-replacement", hankel_cfg.with_replacement, "Sample the mask with replacement");
    hankel->add_option("--rank", hankel_cfg.rank, "Truncation rank");
    hankel->add_option("--truth-scale", hankel_cfg.truth_scale, "Standard deviation of the true values");
    hankel->add_option("--seed", seed, "Random seed");
    hankel->add_option("--out", out, "Output directory");

    ex::MnistConfig mnist_cfg;
    std::string data_dir;
    std::string form = "full-space";
    bool full = false;
    bool no_spectra = false;
    auto* mnist = app.add_subcommand("mnist", "One-vs-all random Fourier feature classifier");
    mnist->add_option("--data-dir", data_dir, "Directory with the MNIST IDX files")->envname("STK_DATA_DIR");
    mnist->add_option("--train-size", mnist_cfg.train_size, "Training images");
    mnist->add_option("--test-size", mnist_cfg.test_size, "Test images");
    mnist->add_flag("--full", full, "Use 10,000 training and 10,000 test images");
    mnist->add_option("--sigma-p", mnist_cfg.sigma_p2, "Prior variances, comma separated")->delimiter(',');
    mnist->add_option("--sigma-e", mnist_cfg.sigma_e2, "Noise variance sigma_e^2");
    mnist->add_option("--priors", mnist_cfg.priors, "Priors, comma separated")->delimiter(',');
    mnist->add_option("--form", form, "Prior precision form")->check(CLI::IsMember({"full-space", "support"}));
    mnist->add_flag("--no-spectra", no_spectra, "Skip the precision singular values");
    mnist->add_option("--seed", seed, "Random seed");
    mnist->add_option("--out", out, "Output directory");

    KernelGramConfig kernel_cfg;
    auto* kernel = app.add_subcommand("kernel-gram", "Gram matrix of a polynomial kernel on random inputs");
    kernel->add_option("--kernel", kernel_cfg.kernel, "polynomial or centrosymmetric");
    kernel->add_option("--c", kernel_cfg.c, "Kernel offset c");
    kernel->add_option("--degree", kernel_cfg.degree, "Kernel degree d");
    kernel->add_option("--count", kernel_cfg.count, "Number of inputs");
    kernel->add_option("--length", kernel_cfg.length, "Input length");
    kernel->add_option("--seed", seed, "Random seed");
    kernel->add_option("--out", out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*sample) {
            sample_cfg.seed = seed;
            sample_cfg.options.dense_threshold = dense_threshold;
            const auto result = ex::run_sample(sample_cfg, save_prior);
            ex::write_sample_outputs(result, out);
            std::cout << "route " << result.route << ", max constraint residual "
                      << ex::format_double(result.max_residual) << "\n";
        } else if (*hankel) {
            if (hankel_shape.size() != 2 || hankel_shape[0] != hankel_shape[1]) {
                throw ex::UsageError("hankel-complete needs a square matrix shape J,J");
            }
            hankel_cfg.dim = hankel_shape[0];
            hankel_cfg.seed = seed;
            const auto result = ex::run_hankel_completion(hankel_cfg);
            ex::write_hankel_outputs(result, out);
            print_table(result.rows);
            for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
        } else if (*mnist) {
            if (full) {
                mnist_cfg.train_size = 10000;
                mnist_cfg.test_size = 10000;
            }
            mnist_cfg.seed = seed;
            mnist_cfg.form = form == "support" ? stk::PrecisionForm::support : stk::PrecisionForm::full_space;
            mnist_cfg.spectra = !no_spectra;
            const auto data = ex::load_mnist(data_dir);
            const auto result = ex::run_mnist(mnist_cfg, data);
            ex::write_mnist_outputs(result, out);
            for (const auto& r : result.rows) {
                std::cout << r.prior << " sigma_P^2=" << ex::format_double(r.sigma_p2) << ": accuracy "
                          << ex::format_double(r.accuracy) << "\n";
            }
        } else if (*kernel) {
            kernel_cfg.seed = seed;
            run_kernel_gram(kernel_cfg, out);
        }
    } catch (const ex::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const stk::UnsupportedShapeError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const stk::DomainError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const stk::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const stk::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const stk::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << " (condition estimate "
                  << ex::format_double(e.condition_estimate()) << ")\n";
        return kExitNumerical;
    } catch (const stk::InconsistentConstraintsError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
