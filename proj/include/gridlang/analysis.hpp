#pragma once

#include <span>
#include <vector>

namespace gridlang {

struct PcaResult {
    std::vector<double> eigenvalues;                  // descending
    std::vector<double> explained_variance_ratio;     // sums to 1
    std::vector<std::vector<double>> components;      // rows, orthonormal
    std::vector<std::vector<double>> projections;     // M x d scores
};

// Mean-centered covariance eigendecomposition (cyclic Jacobi). Sign
// convention: the largest-magnitude coordinate of each component is
// positive. Throws on fewer than two points, zero dimension, or an
// all-identical degenerate cloud.
PcaResult pca(const std::vector<std::vector<double>>& rows);

struct GroupedData {
    std::vector<std::vector<double>> points;
    std::vector<int> labels;  // parallel to points
};

struct AnovaResult {
    double var_within = 0;
    double var_between = 0;
    double beta = 0;     // between / (within + between)
    double f_value = 0;  // (between/(N-1)) / (within/(M-N))
    int df_between = 0;  // N - 1
    int df_within = 0;   // M - N
};

// Within/between-group variances over squared Euclidean distances, the
// beta ratio, and the F statistic. Requires at least two groups and more
// points than groups.
AnovaResult anova(const GroupedData& data);

// Critical F-values for df = (14, 195); p in {0.1, 0.05, 0.01, 0.005,
// 0.001}. Anything else is out of scope and rejected.
double f_critical(double p, int df_between = 14, int df_within = 195);

struct TTestResult {
    double t = 0;
    double df = 0;
    double p_two_sided = 1;
};

// One-sample t-test of the sample mean against a reference value.
// Zero variance: equal means give t = 0 / p = 1, unequal means give
// t = +-inf / p = 0.
TTestResult t_test_one_sample(std::span<const double> sample, double reference);

// Welch two-sample t-test.
TTestResult t_test_two_sample(std::span<const double> a, std::span<const double> b);

// Two-sided p-value of Student's t with `df` degrees of freedom,
// evaluated through the regularized incomplete beta function.
double t_p_two_sided(double t, double df);

}  // namespace gridlang
