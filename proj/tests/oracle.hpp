// Test-only dense oracles, deliberately built on Eigen so they share no
// code with the incremental implementation they check.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace oracle {

struct Observation {
    std::vector<double> phi;
    double loss = 0.0;
    double weight = 1.0;  // 1/propensity
};

// theta = (Phi^T W Phi + lambda I)^{-1} Phi^T W c
inline std::vector<double> weighted_ridge(const std::vector<Observation>& obs, int d,
                                          double lambda) {
    Eigen::MatrixXd gram = lambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (const auto& o : obs) {
        Eigen::Map<const Eigen::VectorXd> phi(o.phi.data(), d);
        gram += o.weight * phi * phi.transpose();
        rhs += o.weight * o.loss * phi;
    }
    const Eigen::VectorXd theta = gram.ldlt().solve(rhs);
    return std::vector<double>(theta.data(), theta.data() + d);
}

// Unweighted ridge over full-feedback targets, one solve per target column.
inline std::vector<std::vector<double>> full_feedback_ridge(
    const std::vector<std::vector<double>>& rows, const std::vector<std::vector<double>>& targets,
    double lambda) {
    const int n = static_cast<int>(rows.size());
    const int d = static_cast<int>(rows.front().size());
    const int k = static_cast<int>(targets.front().size());
    Eigen::MatrixXd phi(n, d);
    Eigen::MatrixXd losses(n, k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) phi(i, j) = rows[i][j];
        for (int a = 0; a < k; ++a) losses(i, a) = targets[i][a];
    }
    const Eigen::MatrixXd gram =
        phi.transpose() * phi + lambda * Eigen::MatrixXd::Identity(d, d);
    const Eigen::MatrixXd theta = gram.ldlt().solve(phi.transpose() * losses);
    std::vector<std::vector<double>> out(k, std::vector<double>(d));
    for (int a = 0; a < k; ++a) {
        for (int j = 0; j < d; ++j) out[a][j] = theta(j, a);
    }
    return out;
}

// A^{-1} b for symmetric positive definite A (row-major).
inline std::vector<double> spd_solve(const std::vector<double>& a, const std::vector<double>& b) {
    const int d = static_cast<int>(b.size());
    Eigen::MatrixXd mat(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) mat(i, j) = a[i * d + j];
    }
    Eigen::Map<const Eigen::VectorXd> rhs(b.data(), d);
    const Eigen::VectorXd x = mat.ldlt().solve(rhs);
    return std::vector<double>(x.data(), x.data() + d);
}

}  // namespace oracle
