#include "teamcomm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "teamcomm/error.hpp"
#include "teamcomm/io.hpp"

namespace teamcomm {

namespace {

using Index = Eigen::Index;

constexpr double kRankTolerance = 1e-10;
constexpr double kGradientTolerance = 1e-8;
constexpr std::size_t kMaxLogisticIter = 100;
constexpr double kSeparationBound = 30.0;

double p_from_se(double coef, double se, double df) {
    if (se > 0.0) return t_test_p_value(coef / se, df);
    return coef == 0.0 ? 1.0 : 0.0;
}

double normal_p_value(double z) {
    return std::erfc(std::fabs(z) / std::sqrt(2.0));
}

void check_design(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
    if (x.rows() != y.size()) throw Error("design matrix and response lengths differ");
    if (static_cast<std::size_t>(x.cols()) != names.size()) throw Error("design matrix and term names differ");
    if (x.rows() <= x.cols()) {
        throw Error("regression needs n > p (n=" + std::to_string(x.rows()) + ", p=" + std::to_string(x.cols()) + ")");
    }
    if (!x.allFinite() || !y.allFinite()) throw Error("regression input contains non-finite values");
}

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0.0;
    for (Index i = 0; i < eta.size(); ++i) {
        // log(1 + e^eta) computed stably.
        const double e = eta(i);
        const double softplus = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        ll += y(i) * e - softplus;
    }
    return ll;
}

Eigen::VectorXd sigmoid(const Eigen::VectorXd& eta) {
    return eta.unaryExpr([](double e) { return 1.0 / (1.0 + std::exp(-e)); });
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::ols ? "ols" : "logistic";
}

const RegressionTerm* RegressionResult::find(std::string_view name) const {
    for (const auto& t : terms) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

const RegressionTerm& RegressionResult::at(std::string_view name) const {
    if (const auto* t = find(name)) return *t;
    throw Error("regression has no term '" + std::string(name) + "'");
}

double t_test_p_value(double t, double df) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    const boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))));
}

double f_test_p_value(double f, double df1, double df2) {
    if (std::isnan(f)) return 1.0;
    if (std::isinf(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    const boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

RegressionResult ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::vector<std::string>& names) {
    check_design(x, y, names);
    const Index n = x.rows();
    const Index p = x.cols();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < p) {
        // Every column in a linear dependency: the leftover pivots plus the
        // independent columns they are combinations of.
        const Index r = qr.rank();
        const auto& perm = qr.colsPermutation().indices();
        const Eigen::MatrixXd rmat = qr.matrixR().topLeftCorner(r, p).template triangularView<Eigen::Upper>();
        std::set<Index> involved;
        for (Index i = r; i < p; ++i) {
            involved.insert(perm(i));
            if (r == 0) continue;
            const Eigen::VectorXd z =
                rmat.topLeftCorner(r, r).triangularView<Eigen::Upper>().solve(rmat.block(0, i, r, 1));
            for (Index j = 0; j < r; ++j) {
                if (std::abs(z(j)) > 1e-8) involved.insert(perm(j));
            }
        }
        std::string msg = "design matrix is rank deficient; dependent columns:";
        for (Index c : involved) msg += " " + names[static_cast<std::size_t>(c)];
        throw Error(msg);
    }

    const Eigen::VectorXd beta = qr.solve(y);
    const Eigen::VectorXd resid = y - x * beta;
    const double rss = resid.squaredNorm();
    const double df = static_cast<double>(n - p);
    const double sigma2 = rss / df;

    const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
    const auto& perm = qr.colsPermutation();
    const Eigen::MatrixXd xtx_inv = perm * cov_perm * perm.transpose();

    RegressionResult out;
    out.model_kind = ModelKind::ols;
    out.n = static_cast<std::size_t>(n);
    out.rss = rss;
    for (Index j = 0; j < p; ++j) {
        RegressionTerm term;
        term.name = names[static_cast<std::size_t>(j)];
        term.coef = beta(j);
        term.se = std::sqrt(std::max(0.0, sigma2 * xtx_inv(j, j)));
        term.p = p_from_se(term.coef, term.se, df);
        out.terms.push_back(term);
    }

    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    out.r_squared = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    const bool has_intercept = std::find(names.begin(), names.end(), kIntercept) != names.end();
    if (has_intercept && p > 1) {
        const double df1 = static_cast<double>(p - 1);
        if (tss <= 0.0) {
            out.f_statistic = 0.0;
            out.f_p_value = 1.0;
        } else if (rss <= 0.0) {
            out.f_statistic = std::numeric_limits<double>::infinity();
            out.f_p_value = 0.0;
        } else {
            const double f = ((tss - rss) / df1) / (rss / df);
            out.f_statistic = f;
            out.f_p_value = f_test_p_value(f, df1, df);
        }
    }
    return out;
}

RegressionResult logistic_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                              const std::vector<std::string>& names) {
    check_design(x, y, names);
    std::size_t ones = 0;
    for (Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) throw Error("logistic response must be 0/1");
        if (y(i) == 1.0) ++ones;
    }
    if (ones == 0 || ones == static_cast<std::size_t>(y.size())) {
        throw Error("logistic regression needs both classes in the response");
    }

    const Index p = x.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    RegressionResult out;
    out.model_kind = ModelKind::logistic;
    out.n = static_cast<std::size_t>(x.rows());
    out.converged = false;

    Eigen::VectorXd eta = x * beta;
    double ll = log_likelihood(eta, y);
    for (std::size_t iter = 0; iter <= kMaxLogisticIter; ++iter) {
        const Eigen::VectorXd mu = sigmoid(eta);
        const Eigen::VectorXd grad = x.transpose() * (y - mu);
        out.iterations = iter;
        if (grad.cwiseAbs().maxCoeff() < kGradientTolerance) {
            // A gradient that vanishes only because every probability has
            // saturated at its label means the MLE is at infinity.
            if ((y - mu).cwiseAbs().maxCoeff() < 1e-6) {
                out.separation = true;
                out.warnings.push_back("complete separation detected");
            } else {
                out.converged = true;
            }
            break;
        }
        if (beta.cwiseAbs().maxCoeff() > kSeparationBound) {
            out.separation = true;
            out.warnings.push_back("complete or quasi-complete separation detected");
            break;
        }
        if (iter == kMaxLogisticIter) {
            out.warnings.push_back("IRLS did not converge within iteration limit");
            break;
        }
        const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
        const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
        Eigen::VectorXd step = info.colPivHouseholderQr().solve(grad);
        // Step halving keeps the likelihood from decreasing.
        for (int h = 0; h < 30; ++h) {
            const Eigen::VectorXd trial = beta + step;
            const Eigen::VectorXd trial_eta = x * trial;
            const double trial_ll = log_likelihood(trial_eta, y);
            if (trial_ll >= ll - 1e-12 || h == 29) {
                beta = trial;
                eta = trial_eta;
                ll = trial_ll;
                break;
            }
            step *= 0.5;
        }
    }

    const Eigen::VectorXd mu = sigmoid(eta);
    const Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
    const Eigen::MatrixXd info = x.transpose() * w.asDiagonal() * x;
    const Eigen::MatrixXd cov = info.completeOrthogonalDecomposition().pseudoInverse();
    for (Index j = 0; j < p; ++j) {
        RegressionTerm term;
        term.name = names[static_cast<std::size_t>(j)];
        term.coef = beta(j);
        term.se = std::sqrt(std::max(0.0, cov(j, j)));
        term.p = term.se > 0.0 ? normal_p_value(term.coef / term.se) : (term.coef == 0.0 ? 1.0 : 0.0);
        if (!std::isfinite(term.p)) term.p = 1.0;
        out.terms.push_back(term);
    }
    return out;
}

std::string cluster_term(int cluster) {
    return "cluster_" + std::to_string(cluster);
}

std::optional<int> parse_cluster_term(std::string_view name) {
    constexpr std::string_view prefix = "cluster_";
    if (name.substr(0, prefix.size()) != prefix || name.size() == prefix.size()) return std::nullopt;
    int value = 0;
    for (char c : name.substr(prefix.size())) {
        if (c < '0' || c > '9') return std::nullopt;
        value = value * 10 + (c - '0');
    }
    return value;
}

RegressionResult cluster_score_regression(const std::map<std::string, int>& assignments,
                                          const std::map<std::string, double>& scores,
                                          std::optional<int> baseline) {
    std::vector<std::string> missing;
    std::map<int, std::vector<double>> by_cluster;
    for (const auto& [id, c] : assignments) {
        const auto it = scores.find(id);
        if (it == scores.end()) {
            missing.push_back(id);
            continue;
        }
        by_cluster[c].push_back(it->second);
    }
    if (!missing.empty()) {
        std::string msg = "no score for trials:";
        for (const auto& id : missing) msg += " " + id;
        throw Error(msg);
    }

    std::vector<std::string> warnings;
    for (auto it = by_cluster.begin(); it != by_cluster.end();) {
        if (it->second.size() < 2) {
            warnings.push_back(cluster_term(it->first) + " dropped: fewer than 2 members");
            it = by_cluster.erase(it);
        } else {
            ++it;
        }
    }
    if (by_cluster.size() < 2) throw Error("cluster-score regression needs at least 2 clusters with 2+ members");

    int base = 0;
    if (baseline) {
        if (!by_cluster.count(*baseline)) throw Error("baseline " + cluster_term(*baseline) + " has no retained members");
        base = *baseline;
    } else {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& [c, s] : by_cluster) {
            const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
            if (mean > best) {
                best = mean;
                base = c;
            }
        }
    }

    std::vector<int> dummies;
    for (const auto& [c, s] : by_cluster) {
        if (c != base) dummies.push_back(c);
    }
    std::vector<std::string> names{kIntercept};
    for (int c : dummies) names.push_back(cluster_term(c));

    std::size_t n = 0;
    for (const auto& [c, s] : by_cluster) n += s.size();
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(static_cast<Index>(n), static_cast<Index>(names.size()));
    Eigen::VectorXd y(static_cast<Index>(n));
    Index row = 0;
    for (const auto& [c, s] : by_cluster) {
        const auto pos = std::find(dummies.begin(), dummies.end(), c);
        for (double v : s) {
            x(row, 0) = 1.0;
            if (pos != dummies.end()) x(row, 1 + (pos - dummies.begin())) = 1.0;
            y(row) = v;
            ++row;
        }
    }
    RegressionResult out = ols_fit(x, y, names);
    out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
    out.warnings.push_back("baseline " + cluster_term(base));
    return out;
}

const std::vector<std::string>& required_beard_names() {
    static const std::vector<std::string> names{"anger",           "anxiety",            "social_perceptiveness",
                                                "spatial_ability", "transporting_skill", "gaming_skill"};
    return names;
}

std::vector<std::string> default_beard_names() {
    auto names = required_beard_names();
    names.push_back("trait_7");
    names.push_back("trait_8");
    return names;
}

void BeardProfile::validate() const {
    if (variables.size() != kBeardVariableCount) {
        throw Error("BEARD profile '" + team_id + "' has " + std::to_string(variables.size()) + " variables, expected 8");
    }
    std::set<std::string> seen;
    for (const auto& [name, v] : variables) {
        if (!seen.insert(name).second) throw Error("duplicate BEARD variable '" + name + "'");
        if (!std::isfinite(v)) throw Error("BEARD variable '" + name + "' is not finite");
    }
    for (const auto& req : required_beard_names()) {
        if (!seen.count(req)) throw Error("BEARD profile '" + team_id + "' lacks required variable '" + req + "'");
    }
}

std::optional<double> BeardProfile::get(std::string_view name) const {
    for (const auto& [n, v] : variables) {
        if (n == name) return v;
    }
    return std::nullopt;
}

Direction parse_direction(std::string_view s) {
    if (s == "higher_is_better") return Direction::higher_is_better;
    if (s == "lower_is_better") return Direction::lower_is_better;
    throw Error("invalid TED direction '" + std::string(s) + "'");
}

std::string_view to_string(Direction d) noexcept {
    return d == Direction::higher_is_better ? "higher_is_better" : "lower_is_better";
}

void TedSeries::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
            throw Error("TED series '" + trial_id + "' sample times are not strictly increasing");
        }
        if (i > 0 && samples[i].values.size() != samples[0].values.size()) {
            throw Error("TED series '" + trial_id + "' samples have differing variables");
        }
        if (i > 0) {
            for (const auto& [name, v] : samples[0].values) {
                if (!samples[i].values.count(name)) {
                    throw Error("TED series '" + trial_id + "' samples have differing variables");
                }
            }
        }
    }
}

std::optional<double> TedSeries::value_at(std::string_view name, double t) const {
    const TedSample* found = nullptr;
    for (const auto& s : samples) {
        if (s.t <= t + 1e-12) found = &s;
        else break;
    }
    if (!found) return std::nullopt;
    const auto it = found->values.find(std::string(name));
    if (it == found->values.end()) throw Error("TED series '" + trial_id + "' has no variable '" + std::string(name) + "'");
    return it->second;
}

std::set<std::string> filter_ted_variables(const TedSchema& schema, const std::set<std::string>& whitelist_kinds) {
    static const std::set<std::string> allowed{"aggregate", "time_measure", "communication"};
    for (const auto& k : whitelist_kinds) {
        if (!allowed.count(k)) throw Error("unsupported TED kind '" + k + "' in whitelist");
    }
    std::set<std::string> out;
    for (const auto& [name, spec] : schema) {
        if (!spec.kind) throw Error("TED variable '" + name + "' has no kind tag");
        if (whitelist_kinds.count(*spec.kind)) out.insert(name);
    }
    return out;
}

std::vector<BeardProfile> parse_beard_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    const std::size_t id_col = table.column("team_id");
    std::vector<BeardProfile> out;
    for (const auto& row : table.rows) {
        BeardProfile p;
        p.team_id = row[id_col];
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c != id_col) p.variables.emplace_back(table.header[c], parse_double(row[c]));
        }
        p.validate();
        out.push_back(std::move(p));
    }
    return out;
}

std::string beard_to_csv(const std::vector<BeardProfile>& profiles) {
    if (profiles.empty()) return "team_id\n";
    std::string out = "team_id";
    for (const auto& [name, v] : profiles.front().variables) out += "," + name;
    out += "\n";
    for (const auto& p : profiles) {
        out += p.team_id;
        for (const auto& [name, v] : p.variables) out += "," + format_number(v);
        out += "\n";
    }
    return out;
}

std::map<std::string, TedSeries> parse_ted_csv(std::string_view text, const TedSchema& schema) {
    const CsvTable table = parse_csv(text);
    const std::size_t id_col = table.column("trial_id");
    const std::size_t t_col = table.column("t");
    std::map<std::string, TedSeries> out;
    for (const auto& row : table.rows) {
        auto& series = out[row[id_col]];
        series.trial_id = row[id_col];
        TedSample s;
        s.t = parse_double(row[t_col]);
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == id_col || c == t_col) continue;
            s.values[table.header[c]] = parse_double(row[c]);
        }
        series.samples.push_back(std::move(s));
    }
    for (auto& [id, series] : out) {
        series.schema = schema;
        series.validate();
    }
    return out;
}

std::string ted_to_csv(const std::vector<TedSeries>& series) {
    std::vector<std::string> names;
    for (const auto& s : series) {
        if (!s.samples.empty()) {
            for (const auto& [name, v] : s.samples.front().values) names.push_back(name);
            break;
        }
    }
    std::string out = "trial_id,t";
    for (const auto& n : names) out += "," + n;
    out += "\n";
    for (const auto& s : series) {
        for (const auto& sample : s.samples) {
            out += s.trial_id + "," + format_number(sample.t);
            for (const auto& n : names) out += "," + format_number(sample.values.at(n));
            out += "\n";
        }
    }
    return out;
}

std::map<std::string, double> parse_scores_csv(std::string_view text) {
    const CsvTable table = parse_csv(text);
    const std::size_t id_col = table.column("trial_id");
    const std::size_t score_col = table.column("score");
    std::map<std::string, double> out;
    for (const auto& row : table.rows) out[row[id_col]] = parse_double(row[score_col]);
    return out;
}

std::string scores_to_csv(const std::map<std::string, double>& scores) {
    std::string out = "trial_id,score\n";
    for (const auto& [id, s] : scores) out += id + "," + format_number(s) + "\n";
    return out;
}

RegressionResult beard_score_regression(const std::vector<BeardProfile>& profiles,
                                        const std::map<std::string, std::string>& trial_team,
                                        const std::map<std::string, double>& scores) {
    if (profiles.empty()) throw Error("no BEARD profiles");
    std::map<std::string, const BeardProfile*> by_team;
    for (const auto& p : profiles) by_team[p.team_id] = &p;

    std::vector<std::string> names{kIntercept};
    for (const auto& [name, v] : profiles.front().variables) names.push_back(name);

    std::vector<std::pair<const BeardProfile*, double>> rows;
    for (const auto& [trial, score] : scores) {
        const auto team = trial_team.find(trial);
        if (team == trial_team.end()) continue;
        const auto prof = by_team.find(team->second);
        if (prof == by_team.end()) continue;
        rows.emplace_back(prof->second, score);
    }
    Eigen::MatrixXd x(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
    Eigen::VectorXd y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        x(static_cast<Index>(i), 0) = 1.0;
        for (std::size_t j = 1; j < names.size(); ++j) {
            const auto v = rows[i].first->get(names[j]);
            if (!v) throw Error("BEARD profile '" + rows[i].first->team_id + "' lacks '" + names[j] + "'");
            x(static_cast<Index>(i), static_cast<Index>(j)) = *v;
        }
        y(static_cast<Index>(i)) = rows[i].second;
    }
    return ols_fit(x, y, names);
}

RegressionResult ted_score_regression(const std::map<std::string, TedSeries>& series,
                                      const std::set<std::string>& selected,
                                      const std::map<std::string, double>& scores) {
    if (selected.empty()) throw Error("no TED variables selected");
    std::vector<std::string> names{kIntercept};
    names.insert(names.end(), selected.begin(), selected.end());

    std::vector<std::pair<const TedSeries*, double>> rows;
    for (const auto& [trial, score] : scores) {
        const auto it = series.find(trial);
        if (it == series.end() || it->second.samples.empty()) continue;
        rows.emplace_back(&it->second, score);
    }
    Eigen::MatrixXd x(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
    Eigen::VectorXd y(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& last = rows[i].first->samples.back();
        x(static_cast<Index>(i), 0) = 1.0;
        for (std::size_t j = 1; j < names.size(); ++j) {
            const auto v = last.values.find(names[j]);
            if (v == last.values.end()) throw Error("TED series '" + rows[i].first->trial_id + "' lacks '" + names[j] + "'");
            x(static_cast<Index>(i), static_cast<Index>(j)) = v->second;
        }
        y(static_cast<Index>(i)) = rows[i].second;
    }
    return ols_fit(x, y, names);
}

std::string regression_to_json(const RegressionResult& r) {
    auto num = [](double v) { return nlohmann::json::parse(format_number(v)); };
    nlohmann::ordered_json j;
    j["model_kind"] = std::string(to_string(r.model_kind));
    j["n"] = r.n;
    auto terms = nlohmann::ordered_json::array();
    for (const auto& t : r.terms) {
        nlohmann::ordered_json term;
        term["name"] = t.name;
        term["coef"] = num(t.coef);
        term["se"] = num(t.se);
        term["p"] = num(t.p);
        terms.push_back(std::move(term));
    }
    j["terms"] = std::move(terms);
    if (r.f_p_value) {
        j["f_statistic"] = num(*r.f_statistic);
        j["f_p_value"] = num(*r.f_p_value);
    }
    if (r.model_kind == ModelKind::ols) {
        j["rss"] = num(r.rss);
        j["r_squared"] = num(r.r_squared);
    } else {
        j["converged"] = r.converged;
        j["separation"] = r.separation;
        j["iterations"] = r.iterations;
    }
    j["warnings"] = r.warnings;
    return j.dump() + "\n";
}

RegressionResult regression_from_json(std::string_view json) {
    RegressionResult r;
    try {
        const auto j = nlohmann::json::parse(json);
        const auto kind = j.at("model_kind").get<std::string>();
        if (kind == "ols") r.model_kind = ModelKind::ols;
        else if (kind == "logistic") r.model_kind = ModelKind::logistic;
        else throw Error("unknown model_kind '" + kind + "'");
        r.n = j.at("n").get<std::size_t>();
        auto num = [](const nlohmann::json& v) {
            return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
        };
        for (const auto& t : j.at("terms")) {
            r.terms.push_back({t.at("name").get<std::string>(), num(t.at("coef")), num(t.at("se")), num(t.at("p"))});
        }
        if (j.contains("f_p_value")) {
            r.f_statistic = num(j.at("f_statistic"));
            r.f_p_value = num(j.at("f_p_value"));
        }
        r.rss = j.contains("rss") ? num(j.at("rss")) : 0.0;
        r.r_squared = j.contains("r_squared") ? num(j.at("r_squared")) : 0.0;
        r.converged = j.value("converged", true);
        r.separation = j.value("separation", false);
        r.iterations = j.value("iterations", std::size_t{0});
        r.warnings = j.value("warnings", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed regression JSON: ") + e.what());
    }
    return r;
}

std::string regression_to_csv(const RegressionResult& r) {
    std::string out = "name,coef,se,p\n";
    for (const auto& t : r.terms) {
        out += t.name + "," + format_number(t.coef) + "," + format_number(t.se) + "," + format_number(t.p) + "\n";
    }
    return out;
}

}  // namespace teamcomm
