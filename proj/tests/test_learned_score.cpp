#include <random>

#include "doctest.h"
#include "joininfer/learned_score.hpp"

using namespace joininfer;

namespace {

Eigen::MatrixXd random_design(std::mt19937_64& rng, int n, int d) {
    Eigen::MatrixXd x(n, d + 1);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < n; ++i) {
        x(i, 0) = 1;
        for (int j = 1; j <= d; ++j) x(i, j) = u(rng);
    }
    return x;
}

}  // namespace

TEST_SUITE("learned_score") {

TEST_CASE("analytic gradient matches central differences") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::MatrixXd x = random_design(rng, 40, 5);
        Eigen::VectorXd y(40);
        for (int i = 0; i < 40; ++i) y(i) = rng() % 2;
        Eigen::VectorXd w(6);
        for (int j = 0; j < 6; ++j) w(j) = std::normal_distribution<double>(0, 1)(rng);
        const Eigen::VectorXd g = log_likelihood_gradient(x, y, w, 1e-2);
        for (int j = 0; j < 6; ++j) {
            const double h = 1e-5;
            Eigen::VectorXd up = w, down = w;
            up(j) += h;
            down(j) -= h;
            const double fd = (penalized_log_likelihood(x, y, up, 1e-2) - penalized_log_likelihood(x, y, down, 1e-2)) / (2 * h);
            const double rel = std::abs(fd - g(j)) / std::max(1.0, std::abs(g(j)));
            CHECK(rel <= 1e-6);
        }
    }
}

TEST_CASE("separable data is fit perfectly") {
    std::vector<FeatureVector> f;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const double v = i < 20 ? 0.1 + 0.01 * i : 0.7 + 0.01 * i / 2;
        f.push_back({v, 0.5, 0.5, 0.5, 0.5});
        labels.push_back(i < 20 ? 0 : 1);
    }
    LogisticConfig cfg;
    cfg.l2 = 0.0;
    const auto fit = fit_learned_score(f, labels, cfg);
    int correct = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        const auto a = f[i].as_array();
        correct += (fit.probability(a) >= 0.5) == (labels[i] == 1) ? 1 : 0;
    }
    CHECK(correct == 40);
}

TEST_CASE("objective never decreases") {
    std::mt19937_64 rng(2);
    const Eigen::MatrixXd x = random_design(rng, 100, 5);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) y(i) = x(i, 1) + x(i, 2) > 1.0 ? 1 : 0;
    const auto fit = fit_logistic(x, y);
    REQUIRE(fit.objective.size() >= 2);
    for (size_t i = 1; i < fit.objective.size(); ++i) CHECK(fit.objective[i] >= fit.objective[i - 1]);
}

TEST_CASE("labels independent of features give the base rate") {
    std::mt19937_64 rng(3);
    std::vector<FeatureVector> f;
    std::vector<int> labels;
    std::uniform_real_distribution<double> u(0, 1);
    int positives = 0;
    for (int i = 0; i < 4000; ++i) {
        f.push_back({u(rng), u(rng), u(rng), u(rng), u(rng)});
        labels.push_back(u(rng) < 0.3 ? 1 : 0);
        positives += labels.back();
    }
    const double base = positives / 4000.0;
    const auto fit = fit_learned_score(f, labels);
    for (const auto& v : f) CHECK(std::abs(fit.probability(v.as_array()) - base) <= 0.05);
}

TEST_CASE("one class only is rejected") {
    std::vector<FeatureVector> f(5);
    std::vector<int> labels(5, 1);
    CHECK_THROWS_AS(fit_learned_score(f, labels), Error);
}

TEST_CASE("roc_auc against pair counting") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> s;
        std::vector<int> l;
        for (int i = 0; i < 30; ++i) {
            s.push_back(static_cast<double>(rng() % 10));
            l.push_back(rng() % 2);
        }
        double wins = 0, pairs = 0;
        for (size_t i = 0; i < s.size(); ++i) {
            for (size_t j = 0; j < s.size(); ++j) {
                if (l[i] != 1 || l[j] != 0) continue;
                pairs += 1;
                wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
            }
        }
        if (pairs == 0) continue;
        CHECK(roc_auc(s, l) == doctest::Approx(wins / pairs).epsilon(1e-12));
    }
    std::vector<double> perfect{0.1, 0.2, 0.8, 0.9};
    std::vector<int> pl{0, 0, 1, 1};
    CHECK(roc_auc(perfect, pl) == 1.0);
}

}  // TEST_SUITE
