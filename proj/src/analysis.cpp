#include "gridlang/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace gridlang {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Matrices here
// are at most 64x64, so plain sweeps converge in a handful of passes.
void jacobi_eigen(std::vector<std::vector<double>> a, std::vector<double>& eigenvalues,
                  std::vector<std::vector<double>>& eigenvectors) {
    const int d = static_cast<int>(a.size());
    eigenvectors.assign(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i) eigenvectors[i][i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-26) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < d; ++k) {
                    double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < d; ++k) {
                    double vkp = eigenvectors[k][p], vkq = eigenvectors[k][q];
                    eigenvectors[k][p] = c * vkp - s * vkq;
                    eigenvectors[k][q] = s * vkp + c * vkq;
                }
            }
    }
    eigenvalues.resize(d);
    for (int i = 0; i < d; ++i) eigenvalues[i] = a[i][i];
}

}  // namespace

PcaResult pca(const std::vector<std::vector<double>>& rows) {
    const int m = static_cast<int>(rows.size());
    if (m < 2) throw std::invalid_argument("pca: need at least two points");
    const int d = static_cast<int>(rows.front().size());
    if (d == 0) throw std::invalid_argument("pca: zero-dimensional data");
    for (const auto& r : rows)
        if (static_cast<int>(r.size()) != d) throw std::invalid_argument("pca: ragged rows");

    std::vector<double> mean(d, 0.0);
    for (const auto& r : rows)
        for (int j = 0; j < d; ++j) mean[j] += r[j];
    for (double& x : mean) x /= m;

    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& r : rows)
        for (int i = 0; i < d; ++i) {
            double ci = r[i] - mean[i];
            for (int j = i; j < d; ++j) cov[i][j] += ci * (r[j] - mean[j]);
        }
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            cov[i][j] /= (m - 1);
            cov[j][i] = cov[i][j];
        }

    std::vector<double> eigenvalues;
    std::vector<std::vector<double>> vectors;  // columns are eigenvectors
    jacobi_eigen(cov, eigenvalues, vectors);

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return eigenvalues[a] > eigenvalues[b]; });

    PcaResult res;
    double total = 0;
    for (double ev : eigenvalues) total += std::max(ev, 0.0);
    if (total <= 0) throw std::invalid_argument("pca: degenerate data (zero variance)");

    res.eigenvalues.reserve(d);
    res.components.assign(d, std::vector<double>(d, 0.0));
    for (int r = 0; r < d; ++r) {
        int src = order[r];
        res.eigenvalues.push_back(std::max(eigenvalues[src], 0.0));
        for (int j = 0; j < d; ++j) res.components[r][j] = vectors[j][src];
        // deterministic sign: largest-|entry| coordinate positive
        int arg = 0;
        for (int j = 1; j < d; ++j)
            if (std::abs(res.components[r][j]) > std::abs(res.components[r][arg])) arg = j;
        if (res.components[r][arg] < 0)
            for (double& x : res.components[r]) x = -x;
    }
    for (double ev : res.eigenvalues) res.explained_variance_ratio.push_back(ev / total);

    res.projections.assign(m, std::vector<double>(d, 0.0));
    for (int i = 0; i < m; ++i)
        for (int r = 0; r < d; ++r) {
            double s = 0;
            for (int j = 0; j < d; ++j) s += (rows[i][j] - mean[j]) * res.components[r][j];
            res.projections[i][r] = s;
        }
    return res;
}

AnovaResult anova(const GroupedData& data) {
    const size_t m = data.points.size();
    if (m == 0 || data.labels.size() != m)
        throw std::invalid_argument("anova: points/labels mismatch");
    const size_t d = data.points.front().size();

    std::map<int, std::vector<const std::vector<double>*>> groups;
    for (size_t i = 0; i < m; ++i) {
        if (data.points[i].size() != d) throw std::invalid_argument("anova: ragged points");
        groups[data.labels[i]].push_back(&data.points[i]);
    }
    const size_t n_groups = groups.size();
    if (n_groups < 2) throw std::invalid_argument("anova: need at least two groups");
    if (m <= n_groups) throw std::invalid_argument("anova: F undefined, no within-group freedom");

    std::vector<double> grand(d, 0.0);
    for (const auto& p : data.points)
        for (size_t j = 0; j < d; ++j) grand[j] += p[j];
    for (double& x : grand) x /= static_cast<double>(m);

    AnovaResult res;
    for (const auto& [label, members] : groups) {
        std::vector<double> gmean(d, 0.0);
        for (const auto* p : members)
            for (size_t j = 0; j < d; ++j) gmean[j] += (*p)[j];
        for (double& x : gmean) x /= static_cast<double>(members.size());

        for (const auto* p : members)
            for (size_t j = 0; j < d; ++j) {
                double diff = (*p)[j] - gmean[j];
                res.var_within += diff * diff;
            }
        for (size_t j = 0; j < d; ++j) {
            double diff = gmean[j] - grand[j];
            res.var_between += static_cast<double>(members.size()) * diff * diff;
        }
    }
    res.beta = res.var_between / (res.var_within + res.var_between);
    res.df_between = static_cast<int>(n_groups) - 1;
    res.df_within = static_cast<int>(m - n_groups);
    res.f_value = (res.var_between / res.df_between) / (res.var_within / res.df_within);
    return res;
}

double f_critical(double p, int df_between, int df_within) {
    if (df_between != 14 || df_within != 195)
        throw std::invalid_argument("f_critical: only df = (14, 195) is supported");
    if (p == 0.1) return 1.54;
    if (p == 0.05) return 1.74;
    if (p == 0.01) return 2.17;
    if (p == 0.005) return 2.35;
    if (p == 0.001) return 2.74;
    throw std::invalid_argument("f_critical: unsupported significance threshold");
}

namespace {

// Regularized incomplete beta function via Lentz's continued fraction.
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16, kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::abs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

double ibeta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double t_p_two_sided(double t, double df) {
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    return ibeta(df / 2.0, 0.5, x);
}

TTestResult t_test_one_sample(std::span<const double> sample, double reference) {
    const size_t n = sample.size();
    if (n < 2) throw std::invalid_argument("t_test: sample size must be >= 2");
    double mean = 0;
    for (double x : sample) mean += x;
    mean /= static_cast<double>(n);
    double var = 0;
    for (double x : sample) var += (x - mean) * (x - mean);
    var /= static_cast<double>(n - 1);

    TTestResult res;
    res.df = static_cast<double>(n - 1);
    if (var == 0.0) {
        if (mean == reference) return {0.0, res.df, 1.0};
        return {mean > reference ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity(),
                res.df, 0.0};
    }
    res.t = (mean - reference) / std::sqrt(var / static_cast<double>(n));
    res.p_two_sided = t_p_two_sided(res.t, res.df);
    return res;
}

TTestResult t_test_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("t_test: both samples must have size >= 2");
    auto stats = [](std::span<const double> xs) {
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        var /= static_cast<double>(xs.size() - 1);
        return std::pair{mean, var};
    };
    auto [ma, va] = stats(a);
    auto [mb, vb] = stats(b);
    double sa = va / static_cast<double>(a.size());
    double sb = vb / static_cast<double>(b.size());

    TTestResult res;
    if (sa + sb == 0.0) {
        res.df = static_cast<double>(a.size() + b.size() - 2);
        if (ma == mb) return {0.0, res.df, 1.0};
        return {ma > mb ? std::numeric_limits<double>::infinity()
                        : -std::numeric_limits<double>::infinity(),
                res.df, 0.0};
    }
    res.t = (ma - mb) / std::sqrt(sa + sb);
    res.df = (sa + sb) * (sa + sb) /
             (sa * sa / static_cast<double>(a.size() - 1) + sb * sb / static_cast<double>(b.size() - 1));
    res.p_two_sided = t_p_two_sided(res.t, res.df);
    return res;
}

}  // namespace gridlang
