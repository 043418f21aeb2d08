#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace oracles {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_uniform_statistic(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::abs(sample[i] - lo), std::abs(sample[i] - hi)));
    }
    return d;
}

double ks_critical(double alpha, std::size_t n) {
    // c(alpha) = sqrt(-ln(alpha/2)/2)
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(static_cast<double>(n));
}

double chi_square_quantile(double p, double df) {
    // Wilson-Hilferty: X ~ df * (1 - 2/(9 df) + z sqrt(2/(9 df)))^3
    // inverse normal via bisection on normal_cdf to avoid relying on the
    // engine's quantile implementation
    double lo = -10.0, hi = 10.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (normal_cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double z = 0.5 * (lo + hi);
    const double t = 1.0 - 2.0 / (9.0 * df) + z * std::sqrt(2.0 / (9.0 * df));
    return df * t * t * t;
}

namespace {

// counts inversions in v, merge sort
long long count_inversions(std::vector<double>& v, std::vector<double>& tmp, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = (lo + hi) / 2;
    long long count = count_inversions(v, tmp, lo, mid) + count_inversions(v, tmp, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            count += static_cast<long long>(mid - i);
            tmp[k++] = v[j++];
        } else {
            tmp[k++] = v[i++];
        }
    }
    while (i < mid) tmp[k++] = v[i++];
    while (j < hi) tmp[k++] = v[j++];
    std::copy(tmp.begin() + static_cast<long>(lo), tmp.begin() + static_cast<long>(hi),
              v.begin() + static_cast<long>(lo));
    return count;
}

std::vector<double> ranks_of(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double midrank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[order[k]] = midrank;
        i = j + 1;
    }
    return r;
}

template <typename T>
long long tie_pairs(std::vector<T> v) {
    std::sort(v.begin(), v.end());
    long long t = 0;
    std::size_t i = 0;
    while (i < v.size()) {
        std::size_t j = i;
        while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
        const long long m = static_cast<long long>(j - i + 1);
        t += m * (m - 1) / 2;
        i = j + 1;
    }
    return t;
}

} // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("kendall_tau: bad input");
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (x[a] != x[b]) return x[a] < x[b];
        return y[a] < y[b];
    });
    std::vector<double> ysorted(n);
    for (std::size_t i = 0; i < n; ++i) ysorted[i] = y[order[i]];
    std::vector<double> tmp(n);
    const long long swaps = count_inversions(ysorted, tmp, 0, n);

    const long long n0 = static_cast<long long>(n) * (static_cast<long long>(n) - 1) / 2;
    const long long n1 = tie_pairs(std::vector<double>(x.begin(), x.end()));
    const long long n2 = tie_pairs(std::vector<double>(y.begin(), y.end()));
    // joint ties
    std::vector<std::pair<double, double>> xy(n);
    for (std::size_t i = 0; i < n; ++i) xy[i] = {x[i], y[i]};
    const long long n3 = tie_pairs(std::move(xy));

    const long long discordant = swaps;
    const long long concordant = n0 - n1 - n2 + n3 - discordant;
    const double denom = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
    return (static_cast<double>(concordant) - static_cast<double>(discordant)) / denom;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    const std::vector<double> rx = ranks_of(x);
    const std::vector<double> ry = ranks_of(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        const double a = rx[i] - mx, b = ry[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    return sxy / std::sqrt(sxx * syy);
}

namespace {

double debye_integrand(double t) {
    if (std::abs(t) < 1e-12) return 1.0 - t / 2.0; // limit of t/(e^t - 1)
    return t / std::expm1(t);
}

double simpson(double a, double b) {
    const double m = 0.5 * (a + b);
    return (b - a) / 6.0 * (debye_integrand(a) + 4.0 * debye_integrand(m) + debye_integrand(b));
}

double adaptive(double a, double b, double whole, double eps, int depth) {
    const double m = 0.5 * (a + b);
    const double left = simpson(a, m);
    const double right = simpson(m, b);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive(a, m, left, eps / 2.0, depth - 1) + adaptive(m, b, right, eps / 2.0, depth - 1);
}

} // namespace

double debye1(double x) {
    if (x == 0.0) return 1.0;
    if (x < 0.0) return debye1(-x) - x / 2.0; // D1(-x) = D1(x) + x/2
    const double integral = adaptive(0.0, x, simpson(0.0, x), 1e-13, 60);
    return integral / x;
}

double frank_tau(double theta) {
    if (theta == 0.0) return 0.0;
    return 1.0 - 4.0 / theta * (1.0 - debye1(theta));
}

double amh_tau(double theta) {
    if (theta == 0.0) return 0.0;
    const double one_minus = 1.0 - theta;
    return 1.0 - 2.0 * (theta + one_minus * one_minus * std::log(one_minus)) / (3.0 * theta * theta);
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
        }
        if (std::abs(a[pivot * n + col]) < 1e-14) throw std::runtime_error("solve_dense: singular matrix");
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[pivot * n + c], a[col * n + c]);
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double v = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) v -= a[ri * n + c] * x[c];
        x[ri] = v / a[ri * n + ri];
    }
    return x;
}

double mean(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace oracles
