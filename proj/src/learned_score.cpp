#include "joininfer/learned_score.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace joininfer {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

double LogisticFit::probability(std::span<const double> features) const {
    double z = weights(0);
    for (size_t i = 0; i < features.size() && i + 1 < static_cast<size_t>(weights.size()); ++i) {
        z += weights(static_cast<Eigen::Index>(i + 1)) * features[i];
    }
    return sigmoid(z);
}

Eigen::MatrixXd design_matrix(std::span<const FeatureVector> features) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(features.size()), 6);
    for (size_t r = 0; r < features.size(); ++r) {
        const auto row = features[r].as_array();
        x(static_cast<Eigen::Index>(r), 0) = 1.0;
        for (size_t c = 0; c < row.size(); ++c) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c + 1)) = row[c];
    }
    return x;
}

double penalized_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                double l2) {
    const Eigen::VectorXd z = x * w;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i) ll += y(i) * z(i) - softplus(z(i));
    const double penalty = w.tail(w.size() - 1).squaredNorm();
    return ll - 0.5 * l2 * penalty;
}

Eigen::VectorXd log_likelihood_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                                        double l2) {
    const Eigen::VectorXd z = x * w;
    Eigen::VectorXd residual(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) residual(i) = y(i) - sigmoid(z(i));
    Eigen::VectorXd g = x.transpose() * residual;
    g.tail(g.size() - 1) -= l2 * w.tail(w.size() - 1);
    return g;
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const LogisticConfig& config) {
    if (x.rows() != y.size() || x.rows() == 0) throw Error(ErrorKind::InvalidInput, "logistic fit needs matching, non-empty inputs");
    const double positives = y.sum();
    if (positives < 1.0 || positives > static_cast<double>(y.size()) - 1.0) {
        throw Error(ErrorKind::InvalidInput, "logistic fit needs at least one positive and one negative label");
    }
    LogisticFit fit;
    fit.weights = Eigen::VectorXd::Zero(x.cols());
    double current = penalized_log_likelihood(x, y, fit.weights, config.l2);
    fit.objective.push_back(current);
    double step = config.initial_step;
    for (size_t it = 0; it < config.max_iterations; ++it) {
        const Eigen::VectorXd g = log_likelihood_gradient(x, y, fit.weights, config.l2);
        const double gnorm2 = g.squaredNorm();
        if (gnorm2 < 1e-20) {
            fit.converged = true;
            break;
        }
        // Armijo backtracking on the ascent direction.
        double trial_step = step;
        Eigen::VectorXd candidate;
        double value = current;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            candidate = fit.weights + trial_step * g;
            value = penalized_log_likelihood(x, y, candidate, config.l2);
            if (value >= current + 1e-4 * trial_step * gnorm2) {
                accepted = true;
                break;
            }
            trial_step *= 0.5;
        }
        if (!accepted) {
            fit.converged = true;
            break;
        }
        fit.weights = candidate;
        const double gain = value - current;
        current = value;
        fit.objective.push_back(current);
        fit.iterations = it + 1;
        step = std::min(trial_step * 2.0, 1e3);
        if (gain < config.tolerance) {
            fit.converged = true;
            break;
        }
    }
    return fit;
}

LogisticFit fit_learned_score(std::span<const FeatureVector> features, std::span<const int> labels,
                              const LogisticConfig& config) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(labels.size()));
    for (size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i] != 0 ? 1.0 : 0.0;
    return fit_logistic(design_matrix(features), y, config);
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw Error(ErrorKind::InvalidInput, "scores and labels differ in length");
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
    // Mann-Whitney U with average ranks for ties.
    std::vector<double> rank(scores.size());
    for (size_t i = 0; i < order.size();) {
        size_t j = i;
        while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
        i = j + 1;
    }
    double pos = 0, neg = 0, rank_sum = 0;
    for (size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0) {
            ++pos;
            rank_sum += rank[i];
        } else {
            ++neg;
        }
    }
    if (pos == 0 || neg == 0) throw Error(ErrorKind::InvalidInput, "AUC needs both classes");
    return (rank_sum - pos * (pos + 1) / 2.0) / (pos * neg);
}

}  // namespace joininfer
