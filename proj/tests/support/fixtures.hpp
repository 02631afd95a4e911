#pragma once

#include <optional>
#include <string>
#include <vector>

#include "xaistudy/evaluation/metrics.hpp"
#include "xaistudy/evaluation/records.hpp"

namespace xstest {

// One published row: accuracy, over-reliance and under-reliance as printed,
// with the number of printed decimals of each.
struct PublishedTriple {
  std::string label;
  double accuracy, over, under;
  int acc_decimals, over_decimals, under_decimals;
};

const std::vector<PublishedTriple>& published_triples();

// Smallest response set whose three rates round to the printed values.
// Correct decisions, followed-wrong-AI decisions and rejected-right-AI
// decisions are laid out in that order.
std::vector<xaistudy::evaluation::DecisionRecord> reconstruct_triple(const PublishedTriple& t);

// Per-group rates and gaps computed by filtering each group separately.
struct OracleFairness {
  std::optional<double> tpr_min, tpr_maj, fpr_min, fpr_maj, eod, aaod;
};

OracleFairness brute_force_fairness(const std::vector<int>& predicted, const std::vector<int>& truth,
                                    const std::vector<std::string>& groups, const std::string& minority,
                                    const std::string& majority);

bool rounds_to(double value, double printed, int decimals);

}  // namespace xstest

#include <Eigen/Dense>

#include "xaistudy/models/model.hpp"

namespace xstest {

// Central finite-difference gradient of a model output.
Eigen::VectorXd finite_difference_gradient(const xaistudy::models::TrainedModel& model, const Eigen::VectorXd& x,
                                           xaistudy::models::Target target, double h = 1e-6);

// max_i |g_i - fd_i| / max(max_i |fd_i|, 1e-12): error relative to the
// gradient's scale at the point.
double relative_gradient_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

}  // namespace xstest

namespace xstest {

// Shapley values of v(S) = mean_b f(x_S, b_rest) by the subset-sum
// definition, enumerating all 2^d coalitions.
Eigen::VectorXd shapley_by_subsets(const xaistudy::models::TrainedModel& model, const Eigen::VectorXd& x,
                                   const Eigen::MatrixXd& background, xaistudy::models::Target target);

}  // namespace xstest

namespace xstest {

// Rejection rate of the one-way ANOVA F-test on simulated normal groups,
// with its binomial standard error. The critical value is supplied by the
// caller so the oracle shares no code with the library.
struct OraclePower {
  double power, se;
};
OraclePower simulate_anova_power(const std::vector<double>& means, double sd, int n, double f_crit, long sims,
                                 std::uint64_t seed);

}  // namespace xstest

#include "xaistudy/card/card.hpp"

namespace xstest {

// A valid card with random texts, including newlines, backslashes,
// non-ASCII characters, and text that looks like field markers.
xaistudy::card::EvaluationCard random_valid_card(std::uint64_t seed);

}  // namespace xstest
