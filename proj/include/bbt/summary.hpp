#pragma once

// Posterior summaries: per-parameter moments, central intervals, split-Rhat
// and effective sample size, plus the posterior-mean ranking table.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "bbt/diagnostics.hpp"
#include "bbt/sampler.hpp"
#include "bbt/team_index.hpp"

namespace bbt {

struct ParameterSummary {
    double mean = 0.0;
    double sd = 0.0;
    double q05 = 0.0, q25 = 0.0, q75 = 0.0, q95 = 0.0;  // central 50% and 90%
    double rhat = std::numeric_limits<double>::quiet_NaN();
    double ess = std::numeric_limits<double>::quiet_NaN();
    double mcse = std::numeric_limits<double>::quiet_NaN();
    bool rhat_defined = false;
};

struct PosteriorSummary {
    int n_teams = 0;
    std::vector<ParameterSummary> params;  // teams first, sigma last
    std::vector<std::string> flags;

    const ParameterSummary& team(int i) const {
        return params[static_cast<std::size_t>(i)];
    }
    const ParameterSummary& sigma() const {
        return params[static_cast<std::size_t>(n_teams)];
    }
};

// Moments and quantiles over the pooled post-warmup draws; split-Rhat and
// ESS from the per-chain series. Requires at least 2 chains and 100 draws
// per chain.
inline PosteriorSummary summarize(const PosteriorDraws& draws) {
    if (draws.chains < 2)
        throw std::invalid_argument("summarize: split-Rhat needs at least 2 chains");
    if (draws.draws_per_chain < 100)
        throw std::invalid_argument("summarize: needs at least 100 draws per chain");

    PosteriorSummary out;
    out.n_teams = draws.n_teams;
    const std::size_t total =
        static_cast<std::size_t>(draws.chains) * static_cast<std::size_t>(draws.draws_per_chain);

    for (int param = 0; param < draws.n_params(); ++param) {
        ParameterSummary ps;
        std::vector<double> pooled;
        pooled.reserve(total);
        for (int c = 0; c < draws.chains; ++c)
            for (int d = 0; d < draws.draws_per_chain; ++d)
                pooled.push_back(draws.value(c, d, param));

        double mean = 0.0;
        for (double x : pooled)
            mean += x;
        mean /= static_cast<double>(pooled.size());
        double var = 0.0;
        for (double x : pooled)
            var += (x - mean) * (x - mean);
        var /= static_cast<double>(pooled.size() - 1);
        ps.mean = mean;
        ps.sd = std::sqrt(var);
        ps.q05 = quantile(pooled, 0.05);
        ps.q25 = quantile(pooled, 0.25);
        ps.q75 = quantile(pooled, 0.75);
        ps.q95 = quantile(pooled, 0.95);

        const auto series = draws.series(param);
        ps.rhat = split_rhat(series);
        ps.rhat_defined = std::isfinite(ps.rhat);
        ps.ess = effective_sample_size(series);
        ps.mcse = std::isfinite(ps.ess) && ps.ess > 0.0
                      ? ps.sd / std::sqrt(ps.ess)
                      : std::numeric_limits<double>::quiet_NaN();
        if (!ps.rhat_defined)
            out.flags.push_back("Rhat undefined on parameter " + std::to_string(param) +
                                " (constant draws?)");
        out.params.push_back(ps);
    }
    return out;
}

struct RankRow {
    std::string team;
    double posterior_mean = 0.0;
    std::int64_t wins = 0;
};

// Teams sorted by descending posterior mean log-strength, ties broken
// lexicographically by code.
inline std::vector<RankRow> rank_table(const PosteriorSummary& summary, const TeamIndex& index,
                                       const std::vector<std::int64_t>& wins) {
    if (summary.n_teams != index.size() ||
        static_cast<int>(wins.size()) != index.size())
        throw std::invalid_argument("rank_table: dimension mismatch");
    std::vector<RankRow> rows;
    rows.reserve(static_cast<std::size_t>(index.size()));
    for (int i = 0; i < index.size(); ++i)
        rows.push_back(RankRow{index.code(i), summary.team(i).mean,
                               wins[static_cast<std::size_t>(i)]});
    std::sort(rows.begin(), rows.end(), [](const RankRow& a, const RankRow& b) {
        if (a.posterior_mean != b.posterior_mean)
            return a.posterior_mean > b.posterior_mean;
        return a.team < b.team;
    });
    return rows;
}

}  // namespace bbt
