#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "joininfer/ind_inference.hpp"

namespace joininfer {

struct LogisticConfig {
    double l2 = 1e-3;  ///< penalty on the feature weights; the intercept is not penalized
    size_t max_iterations = 2000;
    double tolerance = 1e-10;  ///< stop when the objective gains less than this
    double initial_step = 1.0;
};

struct LogisticFit {
    Eigen::VectorXd weights;  ///< [intercept, w_1 .. w_d]
    std::vector<double> objective;  ///< penalized log-likelihood per iteration, non-decreasing
    size_t iterations = 0;
    bool converged = false;

    double probability(std::span<const double> features) const;
};

/// Design matrix with a leading column of ones.
Eigen::MatrixXd design_matrix(std::span<const FeatureVector> features);

double penalized_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w, double l2);
Eigen::VectorXd log_likelihood_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                        double l2);

/// Gradient ascent with backtracking, so every accepted step raises the
/// objective. Throws Error(InvalidInput) unless both classes are present.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LogisticConfig& config = {});
LogisticFit fit_learned_score(std::span<const FeatureVector> features, std::span<const int> labels,
                              const LogisticConfig& config = {});

/// Area under the ROC curve; tied scores count half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace joininfer
