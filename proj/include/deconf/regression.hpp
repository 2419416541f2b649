#pragma once

// Ordinary least squares with an intercept, and the nested-model attenuation
// check: does the focal coefficient lose significance once a covariate enters?

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "common.hpp"
#include "special.hpp"

namespace deconf {

struct OlsFit {
    std::vector<std::string> names;  // "intercept" first
    std::vector<double> coefficients;
    std::vector<double> std_errors;
    std::vector<double> t_stats;
    std::vector<double> p_values;
    double r_squared = 0.0;
    size_t n = 0;
    size_t df = 0;
    Eigen::VectorXd residuals;

    size_t index_of(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return i;
        throw ValidationError("no coefficient named '" + name + "'");
    }
};

/// Fits y ~ 1 + X by the normal equations. `x` holds one column per predictor.
inline OlsFit ols_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names = {}) {
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (y.size() != n) throw ValidationError("ols: outcome length does not match predictors");
    if (names.empty())
        for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    if (static_cast<Eigen::Index>(names.size()) != p) throw ValidationError("ols: one name per predictor required");
    if (n <= p + 1)
        throw ValidationError("ols: need more than " + std::to_string(p + 1) + " observations, got " + std::to_string(n));

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = x;

    // Locate the first column that adds no rank.
    for (Eigen::Index j = 1; j <= p; ++j) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.leftCols(j + 1));
        qr.setThreshold(1e-10);
        if (qr.rank() < j + 1)
            throw ValidationError("ols: rank-deficient design; column '" + names[static_cast<size_t>(j - 1)] +
                                  "' is collinear with earlier columns");
    }

    const Eigen::MatrixXd gram = design.transpose() * design;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw ValidationError("ols: Gram matrix not positive definite");
    const Eigen::VectorXd beta = llt.solve(design.transpose() * y);
    const Eigen::MatrixXd gram_inv = llt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));

    OlsFit fit;
    fit.n = static_cast<size_t>(n);
    fit.df = static_cast<size_t>(n - p - 1);
    fit.names.push_back("intercept");
    fit.names.insert(fit.names.end(), names.begin(), names.end());
    fit.residuals = y - design * beta;
    const double rss = fit.residuals.squaredNorm();
    const double mean = y.mean();
    const double tss = (y.array() - mean).square().sum();
    fit.r_squared = tss > 0.0 ? 1.0 - rss / tss : 1.0;
    const double sigma2 = rss / static_cast<double>(fit.df);
    for (Eigen::Index j = 0; j <= p; ++j) {
        const double b = beta(j);
        const double se = std::sqrt(std::max(0.0, sigma2 * gram_inv(j, j)));
        fit.coefficients.push_back(b);
        fit.std_errors.push_back(se);
        if (se == 0.0) {
            // Perfect fit: the coefficient is exact.
            fit.t_stats.push_back(b == 0.0 ? 0.0 : std::copysign(INFINITY, b));
            fit.p_values.push_back(b == 0.0 ? 1.0 : 0.0);
        } else {
            const double t = b / se;
            fit.t_stats.push_back(t);
            fit.p_values.push_back(student_t_two_sided_p(t, static_cast<double>(fit.df)));
        }
    }
    return fit;
}

inline nlohmann::json to_json(const OlsFit& f) {
    nlohmann::json coefs = nlohmann::json::array();
    for (size_t i = 0; i < f.names.size(); ++i)
        coefs.push_back({{"name", f.names[i]},
                         {"coef", f.coefficients[i]},
                         {"std_error", f.std_errors[i]},
                         {"t", std::isfinite(f.t_stats[i]) ? nlohmann::json(f.t_stats[i]) : nlohmann::json(nullptr)},
                         {"p", f.p_values[i]}});
    return {{"coefficients", coefs}, {"r_squared", f.r_squared}, {"n", f.n}, {"df", f.df}};
}

/// Named numeric columns read from a survey extract. Empty cells and "NA" are missing.
class SurveyData {
public:
    static SurveyData parse(CsvReader reader) {
        SurveyData d;
        std::vector<std::string> f;
        if (!reader.next(f)) reader.fail("missing header");
        for (auto& name : f) d.names_.push_back(trim(name));
        d.columns_.resize(d.names_.size());
        while (reader.next(f)) {
            if (f.size() != d.names_.size())
                reader.fail("expected " + std::to_string(d.names_.size()) + " fields, got " + std::to_string(f.size()));
            for (size_t c = 0; c < f.size(); ++c) {
                auto cell = trim(f[c]);
                if (cell.empty() || cell == "NA")
                    d.columns_[c].push_back(std::nullopt);
                else
                    d.columns_[c].push_back(parse_double(cell, reader, d.names_[c].c_str()));
            }
        }
        return d;
    }

    static SurveyData from_file(const std::string& path) { return parse(CsvReader::from_file(path)); }

    void add_column(const std::string& name, const std::vector<double>& values) {
        names_.push_back(name);
        columns_.emplace_back(values.begin(), values.end());
    }

    const std::vector<std::optional<double>>& column(const std::string& name) const {
        for (size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return columns_[i];
        throw ValidationError("survey data has no column '" + name + "'");
    }

    size_t rows() const { return columns_.empty() ? 0 : columns_[0].size(); }

private:
    std::vector<std::string> names_;
    std::vector<std::vector<std::optional<double>>> columns_;
};

struct AttenuationReport {
    std::string outcome, focal, covariate;
    double base_coef = 0.0, base_p = 1.0;
    double adjusted_coef = 0.0, adjusted_p = 1.0;
    double covariate_coef = 0.0, covariate_p = 1.0;
    double threshold = 0.05;
    size_t n = 0;
    bool attenuated = false;
    OlsFit base, adjusted;
};

/// Fits outcome ~ focal and outcome ~ focal + covariate on the rows complete
/// for all three columns and reports how the focal coefficient changes.
inline AttenuationReport attenuation_report(const SurveyData& data, const std::string& outcome,
                                            const std::string& focal, const std::string& covariate,
                                            double threshold = 0.05) {
    const auto& yc = data.column(outcome);
    const auto& fc = data.column(focal);
    const auto& cc = data.column(covariate);
    std::vector<size_t> rows;
    for (size_t i = 0; i < yc.size(); ++i)
        if (yc[i] && fc[i] && cc[i]) rows.push_back(i);
    const auto n = static_cast<Eigen::Index>(rows.size());
    Eigen::VectorXd y(n);
    Eigen::MatrixXd x1(n, 1), x2(n, 2);
    for (Eigen::Index r = 0; r < n; ++r) {
        size_t i = rows[static_cast<size_t>(r)];
        y(r) = *yc[i];
        x1(r, 0) = *fc[i];
        x2(r, 0) = *fc[i];
        x2(r, 1) = *cc[i];
    }
    AttenuationReport rep;
    rep.outcome = outcome;
    rep.focal = focal;
    rep.covariate = covariate;
    rep.threshold = threshold;
    rep.n = rows.size();
    rep.base = ols_fit(x1, y, {focal});
    rep.adjusted = ols_fit(x2, y, {focal, covariate});
    rep.base_coef = rep.base.coefficients[1];
    rep.base_p = rep.base.p_values[1];
    rep.adjusted_coef = rep.adjusted.coefficients[1];
    rep.adjusted_p = rep.adjusted.p_values[1];
    rep.covariate_coef = rep.adjusted.coefficients[2];
    rep.covariate_p = rep.adjusted.p_values[2];
    rep.attenuated = std::fabs(rep.adjusted_coef) < std::fabs(rep.base_coef) && rep.adjusted_p > threshold &&
                     rep.covariate_p < threshold;
    return rep;
}

inline nlohmann::json to_json(const AttenuationReport& r) {
    return {{"outcome", r.outcome},
            {"focal", r.focal},
            {"covariate", r.covariate},
            {"n", r.n},
            {"threshold", r.threshold},
            {"base_coef", r.base_coef},
            {"base_p", r.base_p},
            {"adjusted_coef", r.adjusted_coef},
            {"adjusted_p", r.adjusted_p},
            {"covariate_coef", r.covariate_coef},
            {"covariate_p", r.covariate_p},
            {"attenuated", r.attenuated},
            {"base_model", to_json(r.base)},
            {"adjusted_model", to_json(r.adjusted)}};
}

}  // namespace deconf
