#pragma once
// OLS and logistic regression with inference, plus the BEARD / TED record
// types and loaders the regressions run on.

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace teamcomm {

inline const std::string kIntercept = "(Intercept)";

enum class ModelKind { ols, logistic };

std::string_view to_string(ModelKind kind) noexcept;

struct RegressionTerm {
    std::string name;
    double coef = 0.0;
    double se = 0.0;
    double p = 1.0;
};

struct RegressionResult {
    ModelKind model_kind = ModelKind::ols;
    std::size_t n = 0;
    std::vector<RegressionTerm> terms;
    bool converged = true;
    bool separation = false;
    std::size_t iterations = 0;
    double rss = 0.0;        // ols only
    double r_squared = 0.0;  // ols only
    std::optional<double> f_statistic;
    std::optional<double> f_p_value;
    std::vector<std::string> warnings;

    const RegressionTerm* find(std::string_view name) const;
    const RegressionTerm& at(std::string_view name) const;  // throws Error if absent
};

// Two-sided p-value of a t statistic with `df` degrees of freedom.
double t_test_p_value(double t, double df);
// Upper-tail p-value of an F statistic.
double f_test_p_value(double f, double df1, double df2);

// Least squares via column-pivoted QR (rank tolerance 1e-10 relative).
// Standard errors from sigma^2 (X'X)^-1 with sigma^2 = RSS / (n - p);
// two-sided t-test p-values. When a column is named kIntercept the overall
// F-test against the intercept-only model is also reported.
RegressionResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);

// Maximum likelihood by IRLS. Converged when max |X'(y - mu)| < 1e-8 within
// 100 iterations; stops with separation = true when any |coef| exceeds 30
// before converging. Wald standard errors and normal p-values.
RegressionResult logistic_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names);

// Dummy-name used for cluster c in cluster regressions.
std::string cluster_term(int cluster);
std::optional<int> parse_cluster_term(std::string_view name);

// OLS of score on cluster dummies with `baseline` omitted. Without a baseline
// the highest-mean cluster is used. Clusters with fewer than two scored members
// are dropped with a warning.
RegressionResult cluster_score_regression(const std::map<std::string, int>& assignments,
                                          const std::map<std::string, double>& scores,
                                          std::optional<int> baseline = std::nullopt);

// ---------------------------------------------------------------------------
// Team records

inline constexpr std::size_t kBeardVariableCount = 8;

const std::vector<std::string>& required_beard_names();
// Required names followed by the two configurable extras.
std::vector<std::string> default_beard_names();

struct BeardProfile {
    std::string team_id;
    std::vector<std::pair<std::string, double>> variables;  // ordered, exactly 8

    void validate() const;
    std::optional<double> get(std::string_view name) const;
};

enum class Direction { higher_is_better, lower_is_better };

Direction parse_direction(std::string_view s);
std::string_view to_string(Direction d) noexcept;

struct TedVariableSpec {
    Direction direction = Direction::higher_is_better;
    std::optional<std::string> kind;  // aggregate, time_measure, communication, per_role, ...
};

using TedSchema = std::map<std::string, TedVariableSpec>;

struct TedSample {
    double t = 0.0;  // elapsed fraction of the trial
    std::map<std::string, double> values;
};

struct TedSeries {
    std::string trial_id;
    std::vector<TedSample> samples;
    TedSchema schema;

    void validate() const;
    // Value of `name` at the latest sample with sample.t <= t; nullopt if none.
    std::optional<double> value_at(std::string_view name, double t) const;
};

// Names whose kind tag is in whitelist_kinds (subset of aggregate,
// time_measure, communication). A name without a kind tag is an error.
std::set<std::string> filter_ted_variables(const TedSchema& schema, const std::set<std::string>& whitelist_kinds);

// beard.csv: team_id,<8 variables>
std::vector<BeardProfile> parse_beard_csv(std::string_view text);
std::string beard_to_csv(const std::vector<BeardProfile>& profiles);

// ted.csv: trial_id,t,<variables...> (long format, rows grouped per trial).
std::map<std::string, TedSeries> parse_ted_csv(std::string_view text, const TedSchema& schema);
std::string ted_to_csv(const std::vector<TedSeries>& series);

// scores.csv: trial_id,score
std::map<std::string, double> parse_scores_csv(std::string_view text);
std::string scores_to_csv(const std::map<std::string, double>& scores);

// OLS of trial score on the team's BEARD variables (one row per scored trial).
RegressionResult beard_score_regression(const std::vector<BeardProfile>& profiles,
                                        const std::map<std::string, std::string>& trial_team,
                                        const std::map<std::string, double>& scores);

// OLS of trial score on the final sampled value of each selected TED variable.
RegressionResult ted_score_regression(const std::map<std::string, TedSeries>& series,
                                      const std::set<std::string>& selected,
                                      const std::map<std::string, double>& scores);

std::string regression_to_json(const RegressionResult& r);
RegressionResult regression_from_json(std::string_view json);
std::string regression_to_csv(const RegressionResult& r);

}  // namespace teamcomm
