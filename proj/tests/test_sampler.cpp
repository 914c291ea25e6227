#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bbt/diagnostics.hpp"
#include "bbt/rng.hpp"
#include "bbt/sampler.hpp"
#include "bbt/summary.hpp"
#include "bbt/team_index.hpp"
#include "support/oracles.hpp"

using Catch::Matchers::WithinAbs;

namespace {

bbt::SamplerConfig quick_config(std::uint64_t seed, int warmup = 500, int draws = 750) {
    bbt::SamplerConfig cfg;
    cfg.chains = 4;
    cfg.warmup = warmup;
    cfg.draws_per_chain = draws;
    cfg.seed = seed;
    return cfg;
}

// Monte-Carlo standard error of the mean of an arbitrary scalar function of
// the draws, via the autocorrelation-aware effective sample size.
template <typename Fn>
std::pair<double, double> mean_and_mcse(const bbt::PosteriorDraws& draws, Fn&& f) {
    std::vector<std::vector<double>> series(static_cast<std::size_t>(draws.chains));
    std::vector<double> pooled;
    for (int c = 0; c < draws.chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d) {
            const double x = f(draws.row(c, d));
            series[static_cast<std::size_t>(c)].push_back(x);
            pooled.push_back(x);
        }
    }
    const double mean = oracles::mean_of(pooled);
    const double sd = std::sqrt(oracles::variance_of(pooled));
    const double ess = bbt::effective_sample_size(series);
    return {mean, sd / std::sqrt(ess)};
}

}  // namespace

TEST_CASE("sample_posterior validates its inputs", "[sampler]") {
    bbt::WinMatrix v(2);
    v.at(0, 1) = 1;
    v.at(1, 0) = 1;
    const bbt::HyperPrior hp{20.0, 40.0};

    auto cfg = quick_config(1, 10, 10);
    cfg.chains = 1;
    CHECK_THROWS_AS(bbt::sample_posterior(v, hp, cfg), std::invalid_argument);

    cfg = quick_config(1, 10, 10);
    CHECK_THROWS_AS(bbt::sample_posterior(v, bbt::HyperPrior{-1.0, 1.0}, cfg),
                    std::domain_error);

    cfg.stream_labels = {1, 2, 3};
    CHECK_THROWS_AS(bbt::sample_posterior(v, hp, cfg), std::invalid_argument);

    cfg = quick_config(1, 10, 10);
    cfg.init = std::vector<double>{0.0, 0.0, -1.0};
    CHECK_THROWS_AS(bbt::sample_posterior(v, hp, cfg), std::invalid_argument);
}

TEST_CASE("identical config gives bit-identical draws", "[sampler]") {
    bbt::WinMatrix v(3);
    v.at(0, 1) = 5;
    v.at(1, 0) = 2;
    v.at(1, 2) = 4;
    v.at(2, 1) = 3;
    v.at(0, 2) = 1;
    v.at(2, 0) = 2;
    const bbt::HyperPrior hp{60.0, 200.0};
    const auto cfg = quick_config(777, 200, 200);

    const auto a = bbt::sample_posterior(v, hp, cfg);
    const auto b = bbt::sample_posterior(v, hp, cfg);
    CHECK(a.data == b.data);

    auto cfg2 = cfg;
    cfg2.seed = 778;
    const auto c = bbt::sample_posterior(v, hp, cfg2);
    CHECK(a.data != c.data);
}

TEST_CASE("prior recovery: empty record reproduces the hyperprior", "[sampler][slow]") {
    // With no games the sigma marginal is exactly the hyperprior; this
    // exercises the log-sigma Jacobian end to end.
    const bbt::WinMatrix v(5);
    const bbt::HyperPrior hp{20.0, 40.0};  // mean 0.5, sd ~0.112
    const auto draws = bbt::sample_posterior(v, hp, quick_config(31, 600, 1200));

    const int n = v.n_teams;
    auto [sigma_mean, sigma_mcse] =
        mean_and_mcse(draws, [&](auto row) { return row[static_cast<std::size_t>(n)]; });
    CHECK_THAT(sigma_mean, WithinAbs(hp.mean(), 3.0 * sigma_mcse));

    auto [sigma2_mean, sigma2_mcse] = mean_and_mcse(draws, [&](auto row) {
        const double s = row[static_cast<std::size_t>(n)];
        return s * s;
    });
    const double second_moment = hp.variance() + hp.mean() * hp.mean();
    CHECK_THAT(sigma2_mean, WithinAbs(second_moment, 3.0 * sigma2_mcse));

    // Every sigma draw positive and finite.
    for (int c = 0; c < draws.chains; ++c)
        for (int d = 0; d < draws.draws_per_chain; ++d)
            REQUIRE(draws.value(c, d, n) > 0.0);
}

TEST_CASE("symmetric records center every strength at zero", "[sampler]") {
    bbt::WinMatrix v(4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            if (i != j)
                v.at(i, j) = 3;
    const bbt::HyperPrior hp{60.0, 200.0};
    const auto draws = bbt::sample_posterior(v, hp, quick_config(55, 500, 1000));
    for (int i = 0; i < 4; ++i) {
        auto [mean, mcse] =
            mean_and_mcse(draws, [&](auto row) { return row[static_cast<std::size_t>(i)]; });
        CAPTURE(i);
        CHECK_THAT(mean, WithinAbs(0.0, 3.0 * mcse));
    }
}

TEST_CASE("two-team posterior matches the grid oracle", "[sampler][slow]") {
    bbt::WinMatrix v(2);
    v.at(0, 1) = 3;
    v.at(1, 0) = 1;
    const bbt::HyperPrior hp{400.0, 400.0};  // tight around sigma = 1

    oracles::GridSpec spec;
    spec.lambda_lo = -5.0;
    spec.lambda_hi = 5.0;
    spec.lambda_points = 161;
    const auto grid = oracles::grid_posterior_means(v, hp, spec);

    const auto draws = bbt::sample_posterior(v, hp, quick_config(99, 750, 1500));
    auto [diff_mean, diff_mcse] =
        mean_and_mcse(draws, [](auto row) { return row[0] - row[1]; });
    auto [sigma_mean, sigma_mcse] =
        mean_and_mcse(draws, [](auto row) { return row[2]; });

    CAPTURE(grid.lambda[0], grid.lambda[1], grid.sigma, diff_mean, sigma_mean);
    CHECK_THAT(diff_mean, WithinAbs(grid.lambda[0] - grid.lambda[1], 3.0 * diff_mcse));
    CHECK_THAT(sigma_mean, WithinAbs(grid.sigma, 3.0 * sigma_mcse));
}

TEST_CASE("random-walk fallback agrees with hmc", "[sampler][slow]") {
    bbt::WinMatrix v(2);
    v.at(0, 1) = 6;
    v.at(1, 0) = 2;
    const bbt::HyperPrior hp{60.0, 120.0};

    const auto hmc = bbt::sample_posterior(v, hp, quick_config(7, 600, 1200));
    auto rw_cfg = quick_config(8, 2000, 4000);
    rw_cfg.algorithm = bbt::SamplerConfig::Algorithm::RandomWalk;
    const auto rw = bbt::sample_posterior(v, hp, rw_cfg);

    auto [h_diff, h_mcse] = mean_and_mcse(hmc, [](auto r) { return r[0] - r[1]; });
    auto [r_diff, r_mcse] = mean_and_mcse(rw, [](auto r) { return r[0] - r[1]; });
    CHECK_THAT(h_diff, WithinAbs(r_diff, 4.0 * std::hypot(h_mcse, r_mcse)));
}

TEST_CASE("permuting the team order permutes the draws exactly", "[sampler]") {
    // Same three teams in two different index orders. Stream labels follow
    // the codes and the explicit init is permutation-adjusted, so the draw
    // matrices must match bit for bit after un-permuting.
    const auto idx_a = bbt::TeamIndex::from_codes({"ANA", "BOS", "CHI"});
    const auto idx_b = bbt::TeamIndex::from_codes({"CHI", "ANA", "BOS"});
    // wins[x][y] by code: ANA beat BOS 4-2, BOS beat CHI 3-1, CHI beat ANA 2-2
    auto fill = [&](const bbt::TeamIndex& idx) {
        bbt::WinMatrix v(3);
        auto set = [&](const char* a, const char* b, int w) {
            v.at(idx.index_of(a), idx.index_of(b)) = w;
        };
        set("ANA", "BOS", 4);
        set("BOS", "ANA", 2);
        set("BOS", "CHI", 3);
        set("CHI", "BOS", 1);
        set("CHI", "ANA", 2);
        set("ANA", "CHI", 2);
        return v;
    };
    const bbt::HyperPrior hp{60.0, 200.0};

    auto run = [&](const bbt::TeamIndex& idx) {
        auto cfg = quick_config(4242, 150, 250);
        cfg.stream_labels = idx.stream_labels();
        std::vector<double> init;
        for (int i = 0; i < 3; ++i) {
            const std::string& c = idx.code(i);
            init.push_back(c == "ANA" ? 0.25 : (c == "BOS" ? -0.05 : -0.2));
        }
        init.push_back(hp.mean());
        cfg.init = init;
        return bbt::sample_posterior(fill(idx), hp, cfg);
    };

    const auto da = run(idx_a);
    const auto db = run(idx_b);
    for (int c = 0; c < da.chains; ++c) {
        for (int d = 0; d < da.draws_per_chain; ++d) {
            for (const char* code : {"ANA", "BOS", "CHI"})
                REQUIRE(da.value(c, d, idx_a.index_of(code)) ==
                        db.value(c, d, idx_b.index_of(code)));
            REQUIRE(da.value(c, d, 3) == db.value(c, d, 3));
        }
    }
}

TEST_CASE("summarize moments, intervals and diagnostics", "[sampler]") {
    // Inject synthetic draws: a standard normal column and a constant one.
    bbt::PosteriorDraws draws;
    draws.n_teams = 1;
    draws.chains = 4;
    draws.draws_per_chain = 500;
    for (int c = 0; c < 4; ++c) {
        for (int d = 0; d < 500; ++d) {
            draws.data.push_back(
                bbt::rng::normal(bbt::rng::key(5150, static_cast<std::uint64_t>(c), d)));
            draws.data.push_back(1.0);  // "sigma" held constant
        }
    }
    const auto sum = bbt::summarize(draws);

    const auto& normal = sum.team(0);
    CHECK(normal.rhat_defined);
    CHECK(normal.rhat < 1.01);
    CHECK(normal.ess > 800.0);  // independent draws: close to 2000
    CHECK_THAT(normal.mean, WithinAbs(0.0, 4.0 / std::sqrt(normal.ess)));
    CHECK_THAT(normal.sd, WithinAbs(1.0, 0.1));
    CHECK_THAT(normal.q05, WithinAbs(-1.6449, 0.15));
    CHECK_THAT(normal.q95, WithinAbs(1.6449, 0.15));
    CHECK(normal.q25 > normal.q05);
    CHECK(normal.q75 < normal.q95);

    const auto& constant = sum.sigma();
    CHECK(constant.sd == 0.0);
    CHECK_FALSE(constant.rhat_defined);
    CHECK_FALSE(sum.flags.empty());

    SECTION("fewer than two chains is an error") {
        bbt::PosteriorDraws one = draws;
        one.chains = 1;
        one.data.resize(static_cast<std::size_t>(500) * 2);
        CHECK_THROWS_AS(bbt::summarize(one), std::invalid_argument);
    }
}

namespace {

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = oracles::mean_of(a), mb = oracles::mean_of(b);
    double num = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    return num / std::sqrt(va * vb);
}

}  // namespace

TEST_CASE("posterior means track win totals at least as well as the MLE",
          "[sampler][slow]") {
    // Unbalanced schedule: teams with few games get noisy MLE strengths but
    // strong shrinkage, which is what keeps the posterior mean aligned with
    // the win column.
    const int n = 10;
    bbt::ScheduleMatrix sched(n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            sched.at(i, j) = sched.at(j, i) =
                (i < n / 2 && j < n / 2) ? 14 : 2;  // a heavy half, a light half
    bbt::Strengths truth{std::vector<double>(n), bbt::Normalization::Raw};
    for (int i = 0; i < n; ++i)
        truth[i] = 0.45 * bbt::rng::normal(bbt::rng::key(314, i));
    const auto v = bbt::simulate_season(truth, sched, 2718);

    const auto mle = bbt::fit_mle(v);
    const bbt::HyperPrior hp{60.0, 150.0};
    auto cfg = quick_config(61, 400, 800);
    const auto summary = bbt::summarize(bbt::sample_posterior(v, hp, cfg));

    std::vector<double> wins, post, point;
    for (int i = 0; i < n; ++i) {
        wins.push_back(static_cast<double>(v.wins_of(i)));
        post.push_back(summary.team(i).mean);
        point.push_back(mle[i]);
    }
    CHECK(pearson(post, wins) >= pearson(point, wins));
}

TEST_CASE("rank_table orders by posterior mean with lexicographic ties", "[sampler]") {
    bbt::PosteriorSummary sum;
    sum.n_teams = 3;
    sum.params.resize(4);
    sum.params[0].mean = 0.10;  // AAA
    sum.params[1].mean = 0.35;  // BBB
    sum.params[2].mean = 0.10;  // CCC (tied with AAA)
    const auto idx = bbt::TeamIndex::from_codes({"CCC", "BBB", "AAA"});
    // index order: CCC=0, BBB=1, AAA=2 -> means by index
    sum.params[0].mean = 0.10;  // CCC
    sum.params[1].mean = 0.35;  // BBB
    sum.params[2].mean = 0.10;  // AAA

    const auto rows = bbt::rank_table(sum, idx, {70, 90, 70});
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].team == "BBB");
    CHECK(rows[0].wins == 90);
    CHECK(rows[1].team == "AAA");  // tie broken lexicographically
    CHECK(rows[2].team == "CCC");

    CHECK_THROWS_AS(bbt::rank_table(sum, idx, {1, 2}), std::invalid_argument);
}
