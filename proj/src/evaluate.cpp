#include "engine/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "engine/errors.hpp"

namespace engine::evaluate {

namespace {

// Solves A x = b in place for a symmetric positive definite A (Cholesky).
std::vector<double> solve_spd(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (!(diag > 1e-12)) throw SingularSystemError("design matrix is singular (collinear columns)");
        const double l = std::sqrt(diag);
        a[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / l;
        }
    }
    // forward then backward substitution
    for (std::size_t i = 0; i < n; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * n + k] * b[k];
        b[i] = v / a[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= a[k * n + ii] * b[k];
        b[ii] = v / a[ii * n + ii];
    }
    return b;
}

// Inverse of an SPD matrix via Cholesky, for standard errors.
std::vector<double> invert_spd(const std::vector<double>& a, std::size_t n) {
    std::vector<double> inv(n * n, 0.0);
    for (std::size_t col = 0; col < n; ++col) {
        std::vector<double> e(n, 0.0);
        e[col] = 1.0;
        const std::vector<double> x = solve_spd(a, std::move(e), n);
        for (std::size_t r = 0; r < n; ++r) inv[r * n + col] = x[r];
    }
    return inv;
}

double eta_of(const Matrix& x, std::span<const double> beta, std::size_t r) {
    double eta = beta[0];
    for (std::size_t c = 0; c < x.cols; ++c) eta += beta[c + 1] * x.at(r, c);
    return eta;
}

} // namespace

double log_likelihood(const Matrix& x, std::span<const int> y, std::span<const double> beta) {
    double ll = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double eta = eta_of(x, beta, r);
        // log sigma(eta) = -log(1+e^-eta); stable in both tails
        const double log_p = -std::log1p(std::exp(-std::abs(eta))) + std::min(eta, 0.0);
        const double log_q = log_p - eta;
        ll += y[r] ? log_p : log_q;
    }
    return ll;
}

std::vector<double> predict_probabilities(const Matrix& x, std::span<const double> beta) {
    std::vector<double> p(x.rows);
    for (std::size_t r = 0; r < x.rows; ++r) {
        p[r] = 1.0 / (1.0 + std::exp(-eta_of(x, beta, r)));
    }
    return p;
}

LogisticFit fit_logistic(const Matrix& x, std::span<const int> y,
                         const std::vector<std::string>& names) {
    if (x.rows != y.size()) throw ParameterError("fit_logistic: outcome length must match row count");
    if (names.size() != x.cols) throw ParameterError("fit_logistic: one name per column expected");
    std::size_t positives = 0;
    for (const int v : y) positives += (v != 0);
    if (positives == 0 || positives == y.size()) {
        throw ParameterError("fit_logistic: both outcome classes must be present");
    }

    const std::size_t p = x.cols + 1;
    LogisticFit fit;
    fit.names.reserve(p);
    fit.names.push_back("(Intercept)");
    fit.names.insert(fit.names.end(), names.begin(), names.end());
    fit.beta.assign(p, 0.0);
    fit.log_likelihood = log_likelihood(x, y, fit.beta);

    constexpr double kBetaCap = 50.0;
    constexpr int kMaxIter = 100;
    constexpr double kRelTol = 1e-8;

    std::vector<double> xtwx(p * p);
    std::vector<double> xtwz(p);
    std::vector<double> row(p);

    for (int iter = 1; iter <= kMaxIter; ++iter) {
        std::fill(xtwx.begin(), xtwx.end(), 0.0);
        std::fill(xtwz.begin(), xtwz.end(), 0.0);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double eta = eta_of(x, fit.beta, r);
            const double mu = 1.0 / (1.0 + std::exp(-eta));
            const double w = std::max(mu * (1.0 - mu), 1e-10);
            const double z = eta + (y[r] - mu) / w;
            row[0] = 1.0;
            for (std::size_t c = 0; c < x.cols; ++c) row[c + 1] = x.at(r, c);
            for (std::size_t a = 0; a < p; ++a) {
                const double wa = w * row[a];
                xtwz[a] += wa * z;
                for (std::size_t b = 0; b <= a; ++b) xtwx[a * p + b] += wa * row[b];
            }
        }
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = a + 1; b < p; ++b) xtwx[a * p + b] = xtwx[b * p + a];
        }

        const std::vector<double> proposal = solve_spd(xtwx, xtwz, p);

        // step-halving toward the proposal if the likelihood would decrease
        std::vector<double> candidate(p);
        double step = 1.0;
        double new_ll = -std::numeric_limits<double>::infinity();
        for (int h = 0; h < 30; ++h) {
            for (std::size_t a = 0; a < p; ++a) {
                candidate[a] = fit.beta[a] + step * (proposal[a] - fit.beta[a]);
            }
            new_ll = log_likelihood(x, y, candidate);
            if (new_ll >= fit.log_likelihood - 1e-12) break;
            step *= 0.5;
        }

        const double old_ll = fit.log_likelihood;
        fit.beta = candidate;
        fit.log_likelihood = new_ll;
        fit.iterations = iter;

        bool escaped = false;
        for (double& b : fit.beta) {
            if (std::abs(b) > kBetaCap) {
                b = std::clamp(b, -kBetaCap, kBetaCap);
                escaped = true;
            }
        }
        if (escaped) {
            fit.separation_warning = true;
            fit.log_likelihood = log_likelihood(x, y, fit.beta);
            break;
        }
        // a near-perfect likelihood means the classes are separated and the
        // MLE diverges; stop before the coefficients wander further
        if (fit.log_likelihood > -1e-6 * static_cast<double>(x.rows)) {
            fit.separation_warning = true;
            break;
        }
        if (std::abs(new_ll - old_ll) <= kRelTol * (std::abs(old_ll) + 1.0)) {
            fit.converged = true;
            break;
        }
    }

    // Fisher information at the solution, for standard errors.
    std::fill(xtwx.begin(), xtwx.end(), 0.0);
    for (std::size_t r = 0; r < x.rows; ++r) {
        const double eta = eta_of(x, fit.beta, r);
        const double mu = 1.0 / (1.0 + std::exp(-eta));
        const double w = std::max(mu * (1.0 - mu), 1e-10);
        row[0] = 1.0;
        for (std::size_t c = 0; c < x.cols; ++c) row[c + 1] = x.at(r, c);
        for (std::size_t a = 0; a < p; ++a) {
            for (std::size_t b = 0; b <= a; ++b) xtwx[a * p + b] += w * row[a] * row[b];
        }
    }
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a + 1; b < p; ++b) xtwx[a * p + b] = xtwx[b * p + a];
    }
    try {
        const std::vector<double> cov = invert_spd(xtwx, p);
        fit.std_errors.resize(p);
        for (std::size_t a = 0; a < p; ++a) fit.std_errors[a] = std::sqrt(std::max(cov[a * p + a], 0.0));
    } catch (const SingularSystemError&) {
        fit.std_errors.assign(p, std::numeric_limits<double>::quiet_NaN());
    }
    return fit;
}

std::optional<double> auc(std::span<const double> scores, std::span<const int> outcomes) {
    if (scores.size() != outcomes.size()) throw ParameterError("auc: column lengths differ");
    std::size_t n_pos = 0;
    for (const int y : outcomes) n_pos += (y != 0);
    const std::size_t n_neg = outcomes.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) return std::nullopt;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // midranks over tied scores
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) {
            if (outcomes[order[k]]) rank_sum_pos += midrank;
        }
        i = j + 1;
    }
    const double np = static_cast<double>(n_pos);
    const double nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::optional<double> top_decile_lift(std::span<const double> scores, std::span<const int> outcomes) {
    if (scores.size() != outcomes.size()) throw ParameterError("top_decile_lift: column lengths differ");
    const std::size_t n = scores.size();
    if (n < 10) return std::nullopt;
    std::size_t n_pos = 0;
    for (const int y : outcomes) n_pos += (y != 0);
    if (n_pos == 0 || n_pos == n) return std::nullopt;

    const std::size_t k = (n + 9) / 10; // ceil(0.1 n)
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::size_t pos_top = 0;
    for (std::size_t i2 = 0; i2 < k; ++i2) pos_top += (outcomes[order[i2]] != 0);
    const double top_rate = static_cast<double>(pos_top) / static_cast<double>(k);
    const double overall = static_cast<double>(n_pos) / static_cast<double>(n);
    return top_rate / overall;
}

PerformanceReport run_single_experiment(const std::string& model_id, const Matrix& x_in,
                                        std::span<const int> y_in, const Matrix& x_out,
                                        std::span<const int> y_out,
                                        const std::vector<std::string>& names) {
    PerformanceReport report;
    report.model_id = model_id;
    report.n_in = x_in.rows;
    report.n_out = x_out.rows;
    report.fit = fit_logistic(x_in, y_in, names);
    const std::vector<double> p_in = predict_probabilities(x_in, report.fit.beta);
    const std::vector<double> p_out = predict_probabilities(x_out, report.fit.beta);
    report.auc_in = auc(p_in, y_in);
    report.tdl_in = top_decile_lift(p_in, y_in);
    report.auc_out = auc(p_out, y_out);
    report.tdl_out = top_decile_lift(p_out, y_out);
    return report;
}

} // namespace engine::evaluate
