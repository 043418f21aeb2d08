#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace engine::evaluate {

// Row-major dense design matrix; the intercept column is added by the fit.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
};

struct LogisticFit {
    std::vector<std::string> names; // "(Intercept)" first
    std::vector<double> beta;
    std::vector<double> std_errors;
    bool converged = false;
    bool separation_warning = false;
    int iterations = 0;
    double log_likelihood = 0.0;
};

// Maximum-likelihood logistic regression by IRLS with step-halving.
// Throws SingularSystemError on exactly collinear columns; coefficients
// escaping past +-50 are capped and flagged as separation.
LogisticFit fit_logistic(const Matrix& x, std::span<const int> y,
                         const std::vector<std::string>& names);

double log_likelihood(const Matrix& x, std::span<const int> y, std::span<const double> beta);

std::vector<double> predict_probabilities(const Matrix& x, std::span<const double> beta);

// Mann-Whitney AUC with ties counted half. Empty when only one class is
// present.
std::optional<double> auc(std::span<const double> scores, std::span<const int> outcomes);

// Fraud rate in the ceil(0.1 n) highest scores divided by the overall rate.
// Ties are broken by the stable ordering of the input. Empty when only one
// class is present or n < 10.
std::optional<double> top_decile_lift(std::span<const double> scores, std::span<const int> outcomes);

struct PerformanceReport {
    std::string model_id;
    std::optional<double> auc_in;
    std::optional<double> auc_out;
    std::optional<double> tdl_in;
    std::optional<double> tdl_out;
    std::size_t n_in = 0;
    std::size_t n_out = 0;
    LogisticFit fit;
};

// One detection-model experiment: fit on the in-sample rows, score both
// partitions, report AUC and top-decile lift.
PerformanceReport run_single_experiment(const std::string& model_id, const Matrix& x_in,
                                        std::span<const int> y_in, const Matrix& x_out,
                                        std::span<const int> y_out,
                                        const std::vector<std::string>& names);

} // namespace engine::evaluate
