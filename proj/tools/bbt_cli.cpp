// Command-line front door: ingestion, hyperprior construction, fitting,
// posterior sampling, ranking, prediction sweeps, and synthetic seasons.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bbt/bbt.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    std::vector<std::string> inputs;
    std::string prev;
    double hp_shape = 0.0;
    double hp_rate = 0.0;
    std::uint64_t seed = 1;
    int chains = 4;
    int warmup = 1000;
    int draws = 1000;
    double target_accept = 0.8;
    std::string algorithm = "hmc";
    std::string partition;
    std::vector<std::string> partitions;
    std::string out_dir;
    std::string format = "delimited";
    std::string ties = "reject";
    std::string rate_convention = "mean";
    std::string sd_convention = "own";

    // simulate
    int teams = 30;
    int games_per_team = 162;
    double sigma_star = 0.27;
    std::string strengths_file;
    int year = 2017;
};

bbt::TiePolicy tie_policy(const Options& o) {
    return o.ties == "skip" ? bbt::TiePolicy::Skip : bbt::TiePolicy::Reject;
}

bbt::SamplerConfig sampler_config(const Options& o) {
    bbt::SamplerConfig cfg;
    cfg.chains = o.chains;
    cfg.warmup = o.warmup;
    cfg.draws_per_chain = o.draws;
    cfg.seed = o.seed;
    cfg.target_accept = o.target_accept;
    cfg.algorithm = o.algorithm == "rw" ? bbt::SamplerConfig::Algorithm::RandomWalk
                                        : bbt::SamplerConfig::Algorithm::Hmc;
    return cfg;
}

// Everything that shapes the outputs, hashed into the metadata line.
bbt::OutputMeta make_meta(const std::string& cmd, const Options& o) {
    std::ostringstream canon;
    canon << "cmd=" << cmd << ";seed=" << o.seed << ";chains=" << o.chains
          << ";warmup=" << o.warmup << ";draws=" << o.draws << ";accept=" << o.target_accept
          << ";algorithm=" << o.algorithm << ";ties=" << o.ties
          << ";rate=" << o.rate_convention << ";sd=" << o.sd_convention
          << ";partition=" << o.partition << ";year=" << o.year << ";teams=" << o.teams
          << ";games=" << o.games_per_team << ";sigma_star=" << o.sigma_star;
    for (const auto& p : o.partitions)
        canon << ";p=" << p;
    for (const auto& i : o.inputs)
        canon << ";in=" << fs::path(i).filename().string();
    if (!o.prev.empty())
        canon << ";prev=" << fs::path(o.prev).filename().string();
    return bbt::OutputMeta{o.seed, bbt::hex64(bbt::fnv1a64(canon.str()))};
}

struct SeasonData {
    bbt::TeamIndex index;
    bbt::WinMatrix wins;
    std::vector<bbt::Game> games;  // empty when loaded from a win-matrix file
    bool has_games = false;
};

bool looks_like_game_log(const fs::path& path) {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        const auto sv = bbt::detail::trim(line);
        if (sv.empty() || sv.front() == '#')
            continue;
        return sv.find(',') != std::string_view::npos;
    }
    return true;
}

SeasonData load_season(const std::string& path, const Options& o) {
    if (!fs::exists(path))
        throw bbt::data_error("input file not found: " + path);
    SeasonData out;
    if (looks_like_game_log(path)) {
        auto in = bbt::open_input(path);
        auto parsed = bbt::parse_game_log(in);
        for (const auto& issue : parsed.issues)
            std::cerr << path << ":" << issue.line << ": warning: " << issue.message << '\n';
        if (parsed.games.empty())
            throw bbt::data_error("no games parsed from " + path);
        out.index = bbt::TeamIndex::from_games(parsed.games);
        int ties_skipped = 0;
        out.wins = bbt::build_win_matrix(parsed.games, out.index, tie_policy(o), &ties_skipped);
        if (ties_skipped > 0)
            std::cerr << path << ": warning: skipped " << ties_skipped << " tied games\n";
        out.games = std::move(parsed.games);
        out.has_games = true;
    } else {
        auto in = bbt::open_input(path);
        auto labeled = bbt::read_win_matrix(in);
        out.index = std::move(labeled.index);
        out.wins = std::move(labeled.wins);
    }
    return out;
}

struct HyperPriorReport {
    bbt::HyperPrior prior;
    double sigma_hat = 0.0;
    double sqrt_varsigma = 0.0;
    bool derived = false;  // computed from a previous season rather than given
};

HyperPriorReport hyperprior_from_options(const Options& o) {
    if (o.hp_shape > 0.0 && o.hp_rate > 0.0)
        return HyperPriorReport{bbt::HyperPrior{o.hp_shape, o.hp_rate}, 0.0, 0.0, false};
    if (o.prev.empty())
        throw CLI::ValidationError(
            "hyperprior", "supply --prev or both --hyperprior-shape and --hyperprior-rate");
    const SeasonData prev = load_season(o.prev, o);
    bbt::Strengths mle;
    try {
        mle = bbt::fit_mle(prev.wins);
    } catch (const bbt::ford_error& e) {
        std::string msg = "previous season fails the Ford condition";
        if (!e.teams.empty()) {
            msg += " (teams:";
            for (int t : e.teams)
                msg += ' ' + prev.index.code(t);
            msg += ')';
        }
        throw bbt::ford_error(msg, e.teams);
    }
    const double sigma_hat = bbt::sigma_hat_of(mle);
    const double varsigma = bbt::varsigma_hat_of(sigma_hat, prev.index.size());
    bbt::HyperPrior prior = bbt::hyperprior_from(sigma_hat, varsigma);
    if (o.rate_convention == "squared")
        prior.rate = prior.shape / (sigma_hat * sigma_hat);
    return HyperPriorReport{prior, sigma_hat, std::sqrt(varsigma), true};
}

void write_table_file(const fs::path& path, const bbt::Table& table,
                      const bbt::OutputMeta& meta, const std::string& format) {
    if (format == "structured") {
        json doc;
        doc["meta"] = {{"tool", std::string(bbt::kToolName) + " " + bbt::kVersion},
                       {"seed", meta.seed},
                       {"config", meta.config_hash}};
        doc["columns"] = table.columns;
        doc["rows"] = json::array();
        for (const auto& row : table.rows)
            doc["rows"].push_back(row);
        auto out = bbt::open_output(fs::path(path).replace_extension(".json"));
        out << doc.dump(2) << '\n';
    } else {
        auto out = bbt::open_output(path);
        table.write_csv(out, meta);
    }
}

std::string fmt(double v) { return bbt::format_double(v); }

// ---------------------------------------------------------------------------

int cmd_hyperprior(const Options& o) {
    Options local = o;
    if (local.prev.empty() && !local.inputs.empty())
        local.prev = local.inputs.front();
    const auto report = hyperprior_from_options(local);

    std::cout << "sigma_hat = " << fmt(report.sigma_hat) << '\n'
              << "sqrt_varsigma = " << fmt(report.sqrt_varsigma) << '\n'
              << "shape = " << fmt(report.prior.shape) << '\n'
              << "rate = " << fmt(report.prior.rate) << '\n'
              << "mean = " << fmt(report.prior.mean()) << '\n';

    if (!o.out_dir.empty()) {
        bbt::Table t;
        t.columns = {"sigma_hat", "sqrt_varsigma", "shape", "rate"};
        t.add_row({fmt(report.sigma_hat), fmt(report.sqrt_varsigma), fmt(report.prior.shape),
                   fmt(report.prior.rate)});
        write_table_file(fs::path(o.out_dir) / "hyperprior.csv", t,
                         make_meta("hyperprior", local), o.format);
    }
    return 0;
}

int cmd_fit(const Options& o) {
    if (o.inputs.empty())
        throw CLI::ValidationError("fit", "--input is required");
    const SeasonData season = load_season(o.inputs.front(), o);
    const auto hyper = hyperprior_from_options(o);
    const auto meta = make_meta("fit", o);
    const fs::path out(o.out_dir.empty() ? "out" : o.out_dir);

    int mle_sweeps = 0;
    const bbt::Strengths mle = bbt::fit_mle(season.wins, {}, &mle_sweeps);
    const bbt::MapEstimate map = bbt::fit_map(season.wins, bbt::MapMode::MLEPlugin);

    auto cfg = sampler_config(o);
    cfg.stream_labels = season.index.stream_labels();
    const auto draws = bbt::sample_posterior(season.wins, hyper.prior, cfg);
    const auto summary = bbt::summarize(draws);

    std::vector<std::int64_t> wins;
    for (int i = 0; i < season.index.size(); ++i)
        wins.push_back(season.wins.wins_of(i));
    const auto ranking = bbt::rank_table(summary, season.index, wins);

    bbt::Table mle_t;
    mle_t.columns = {"team", "lambda_hat", "normalization"};
    for (int i = 0; i < season.index.size(); ++i)
        mle_t.add_row({season.index.code(i), fmt(mle[i]), "sum_zero"});
    write_table_file(out / "mle.csv", mle_t, meta, o.format);

    bbt::Table map_t;
    map_t.columns = {"team", "lambda_hat", "normalization"};
    for (int i = 0; i < season.index.size(); ++i)
        map_t.add_row({season.index.code(i), fmt(map.lambda_hat[i]), "raw"});
    write_table_file(out / "map.csv", map_t, meta, o.format);

    bbt::Table sum_t;
    sum_t.columns = {"param", "mean", "sd", "q05", "q25", "q75", "q95", "rhat", "ess"};
    for (int i = 0; i <= season.index.size(); ++i) {
        const auto& p = summary.params[static_cast<std::size_t>(i)];
        sum_t.add_row({i < season.index.size() ? season.index.code(i) : "sigma", fmt(p.mean),
                       fmt(p.sd), fmt(p.q05), fmt(p.q25), fmt(p.q75), fmt(p.q95), fmt(p.rhat),
                       fmt(p.ess)});
    }
    write_table_file(out / "summary.csv", sum_t, meta, o.format);

    bbt::Table rank_t;
    rank_t.columns = {"rank", "team", "posterior_mean", "wins"};
    for (std::size_t r = 0; r < ranking.size(); ++r)
        rank_t.add_row({std::to_string(r + 1), ranking[r].team, fmt(ranking[r].posterior_mean),
                        std::to_string(ranking[r].wins)});
    write_table_file(out / "ranking.csv", rank_t, meta, o.format);

    bbt::Table draws_t;
    draws_t.columns = {"chain", "iteration"};
    for (int i = 0; i < season.index.size(); ++i)
        draws_t.columns.push_back(season.index.code(i));
    draws_t.columns.push_back("sigma");
    for (int c = 0; c < draws.chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d) {
            std::vector<std::string> row{std::to_string(c), std::to_string(d)};
            for (int p = 0; p < draws.n_params(); ++p)
                row.push_back(fmt(draws.value(c, d, p)));
            draws_t.add_row(std::move(row));
        }
    }
    write_table_file(out / "draws.csv", draws_t, meta, o.format);

    bbt::Table rep_t;
    rep_t.columns = {"key", "value"};
    rep_t.add_row({"sigma_hat_map", fmt(map.sigma_hat)});
    rep_t.add_row({"varsigma_hat_map", fmt(map.varsigma_hat)});
    rep_t.add_row({"mle_iterations", std::to_string(mle_sweeps)});
    rep_t.add_row({"map_iterations", std::to_string(map.iterations)});
    rep_t.add_row({"map_degenerate", map.degenerate ? "1" : "0"});
    rep_t.add_row({"hyperprior_shape", fmt(hyper.prior.shape)});
    rep_t.add_row({"hyperprior_rate", fmt(hyper.prior.rate)});
    for (int c = 0; c < draws.chains; ++c) {
        rep_t.add_row({"chain" + std::to_string(c) + "_accept",
                       fmt(draws.chain_accept[static_cast<std::size_t>(c)])});
        rep_t.add_row({"chain" + std::to_string(c) + "_step",
                       fmt(draws.chain_step[static_cast<std::size_t>(c)])});
        rep_t.add_row({"chain" + std::to_string(c) + "_divergences",
                       std::to_string(draws.chain_divergences[static_cast<std::size_t>(c)])});
    }
    for (const auto& w : draws.warnings)
        rep_t.add_row({"warning", w});
    write_table_file(out / "report.csv", rep_t, meta, o.format);

    for (const auto& w : draws.warnings)
        std::cerr << "warning: " << w << '\n';
    std::cout << "rank,team,posterior_mean,wins\n";
    for (std::size_t r = 0; r < ranking.size(); ++r)
        std::cout << r + 1 << ',' << ranking[r].team << ','
                  << fmt(ranking[r].posterior_mean) << ',' << ranking[r].wins << '\n';
    return 0;
}

int cmd_predict(const Options& o) {
    if (o.inputs.empty())
        throw CLI::ValidationError("predict", "--input is required");
    if (o.partition.empty())
        throw CLI::ValidationError("predict", "--partition is required");
    const SeasonData season = load_season(o.inputs.front(), o);
    if (!season.has_games)
        throw bbt::data_error("predict needs a dated game log, not a win-matrix file");
    const auto hyper = hyperprior_from_options(o);
    const auto year = bbt::season_year(season.games);
    const auto cut = bbt::parse_partition(o.partition, *year);

    bbt::PredictOptions popt;
    popt.ties = tie_policy(o);
    popt.cross_sd_convention = o.sd_convention == "cross";
    const auto outcome = bbt::evaluate_partition(season.games, season.index, cut, hyper.prior,
                                                 sampler_config(o), popt);
    if (outcome.skipped) {
        if (outcome.test_games == 0)
            throw bbt::data_error("partition " + o.partition +
                                  " leaves the test set empty (after season end?)");
        throw bbt::data_error("partition " + o.partition + " leaves the train set empty");
    }

    const auto meta = make_meta("predict", o);
    const fs::path out(o.out_dir.empty() ? "out" : o.out_dir);

    bbt::Table teams_t;
    teams_t.columns = {"team", "predicted_bayes", "predicted_mle", "actual", "error_bayes",
                       "error_mle"};
    for (int i = 0; i < season.index.size(); ++i) {
        const auto si = static_cast<std::size_t>(i);
        teams_t.add_row({season.index.code(i), fmt(outcome.predicted_bayes[si]),
                         fmt(outcome.predicted_mle[si]), fmt(outcome.actual[si]),
                         fmt(std::abs(outcome.predicted_bayes[si] - outcome.actual[si])),
                         fmt(std::abs(outcome.predicted_mle[si] - outcome.actual[si]))});
    }
    write_table_file(out / "predict_teams.csv", teams_t, meta, o.format);

    bbt::Table agg_t;
    agg_t.columns = {"partition", "error_bayes", "error_mle", "sd_bayes", "sd_mle",
                     "mle_fallback", "train_games", "test_games"};
    agg_t.add_row({outcome.label, fmt(outcome.error_bayes), fmt(outcome.error_mle),
                   fmt(outcome.sd_bayes), fmt(outcome.sd_mle),
                   outcome.mle_fallback ? "1" : "0", std::to_string(outcome.train_games),
                   std::to_string(outcome.test_games)});
    write_table_file(out / "predict_summary.csv", agg_t, meta, o.format);

    if (outcome.mle_fallback)
        std::cerr << "warning: train fails the Ford condition; "
                     "MLE branch used the ridge-stabilized fallback\n";
    std::cout << "partition " << outcome.label << ": error_bayes=" << fmt(outcome.error_bayes)
              << " error_mle=" << fmt(outcome.error_mle) << " sd_bayes="
              << fmt(outcome.sd_bayes) << " sd_mle=" << fmt(outcome.sd_mle) << '\n';
    return 0;
}

int cmd_sweep(const Options& o) {
    if (o.inputs.empty())
        throw CLI::ValidationError("sweep", "at least one --input season log is required");
    const auto meta = make_meta("sweep", o);
    const fs::path out(o.out_dir.empty() ? "out" : o.out_dir);

    bbt::PredictOptions popt;
    popt.ties = tie_policy(o);
    popt.cross_sd_convention = o.sd_convention == "cross";

    // label -> running sums across seasons
    std::vector<std::string> labels =
        o.partitions.empty() ? std::vector<std::string>{"Apr15", "May1", "May15", "Jun1",
                                                        "Jun15", "Jul1", "Jul15", "Aug1",
                                                        "Aug15", "Sep1", "Sep15"}
                             : o.partitions;
    struct Avg {
        double eb = 0, em = 0, sb = 0, sm = 0;
        int count = 0;
    };
    std::vector<Avg> averages(labels.size());

    bbt::Table long_t;
    long_t.columns = {"season", "partition", "method", "metric", "value"};

    for (std::size_t snum = 0; snum < o.inputs.size(); ++snum) {
        const SeasonData season = load_season(o.inputs[snum], o);
        if (!season.has_games)
            throw bbt::data_error("sweep needs dated game logs");
        const int year = *bbt::season_year(season.games);

        Options local = o;
        local.inputs = {o.inputs[snum]};
        const auto hyper = hyperprior_from_options(local);

        std::vector<bbt::PartitionLabel> parts;
        for (const auto& l : labels)
            parts.push_back(bbt::parse_partition(l, year));

        auto cfg = sampler_config(o);
        cfg.seed = bbt::rng::key(o.seed, 0x5ea50ull, snum);
        cfg.stream_labels = season.index.stream_labels();
        const auto report =
            bbt::partition_sweep(season.games, season.index, parts, hyper.prior, cfg, popt);

        bbt::Table t;
        t.columns = {"partition", "error_bayes", "error_mle", "sd_bayes", "sd_mle",
                     "mle_fallback", "skipped"};
        for (std::size_t k = 0; k < report.partitions.size(); ++k) {
            const auto& p = report.partitions[k];
            if (p.skipped) {
                std::cerr << "warning: season " << year << " partition " << p.label
                          << " skipped (empty train or test)\n";
                t.add_row({p.label, "", "", "", "", "0", "1"});
                continue;
            }
            t.add_row({p.label, fmt(p.error_bayes), fmt(p.error_mle), fmt(p.sd_bayes),
                       fmt(p.sd_mle), p.mle_fallback ? "1" : "0", "0"});
            auto& a = averages[k];
            a.eb += p.error_bayes;
            a.em += p.error_mle;
            a.sb += p.sd_bayes;
            a.sm += p.sd_mle;
            ++a.count;
            const std::string ys = std::to_string(year);
            long_t.add_row({ys, p.label, "bayes", "error", fmt(p.error_bayes)});
            long_t.add_row({ys, p.label, "mle", "error", fmt(p.error_mle)});
            long_t.add_row({ys, p.label, "bayes", "sd", fmt(p.sd_bayes)});
            long_t.add_row({ys, p.label, "mle", "sd", fmt(p.sd_mle)});
        }
        write_table_file(out / ("sweep_" + std::to_string(year) + ".csv"), t, meta, o.format);
    }

    if (o.inputs.size() > 1) {
        bbt::Table avg_t;
        avg_t.columns = {"partition", "error_bayes", "error_mle", "sd_bayes", "sd_mle",
                         "seasons"};
        for (std::size_t k = 0; k < labels.size(); ++k) {
            const auto& a = averages[k];
            if (a.count == 0)
                continue;
            avg_t.add_row({labels[k], fmt(a.eb / a.count), fmt(a.em / a.count),
                           fmt(a.sb / a.count), fmt(a.sm / a.count),
                           std::to_string(a.count)});
        }
        write_table_file(out / "sweep_avg.csv", avg_t, meta, o.format);
    }
    write_table_file(out / "sweep_long.csv", long_t, meta, o.format);

    std::cout << "sweep complete: " << o.inputs.size() << " season(s), " << labels.size()
              << " partition(s)\n";
    return 0;
}

int cmd_simulate(const Options& o) {
    const auto meta = make_meta("simulate", o);
    const fs::path out(o.out_dir.empty() ? "out" : o.out_dir);

    bbt::Strengths truth;
    std::vector<std::string> codes;
    if (!o.strengths_file.empty()) {
        auto in = bbt::open_input(o.strengths_file);
        std::string line;
        std::vector<std::pair<std::string, double>> entries;
        while (std::getline(in, line)) {
            const auto sv = bbt::detail::trim(line);
            if (sv.empty() || sv.front() == '#')
                continue;
            const auto fields = bbt::detail::split_csv(sv);
            if (fields.size() != 2)
                throw bbt::data_error("strengths file: expected 'team,lambda' rows");
            if (fields[0] == "team")
                continue;  // header
            try {
                entries.emplace_back(std::string(fields[0]), std::stod(std::string(fields[1])));
            } catch (const std::exception&) {
                throw bbt::data_error("strengths file: bad lambda for team '" +
                                      std::string(fields[0]) + "'");
            }
        }
        if (entries.size() < 2 || entries.size() % 2 != 0)
            throw CLI::ValidationError("simulate", "need an even team count of at least 2");
        std::sort(entries.begin(), entries.end());
        for (auto& [code, lam] : entries) {
            codes.push_back(code);
            truth.lambda.push_back(lam);
        }
    } else {
        if (o.teams < 2 || o.teams % 2 != 0)
            throw CLI::ValidationError("simulate", "--teams must be even and at least 2");
        truth = bbt::draw_strengths(o.teams, o.sigma_star, o.seed);
        codes = bbt::synthetic_team_codes(o.teams);
    }

    const auto index = bbt::TeamIndex::from_codes(codes);
    bbt::SyntheticSeason season{index, truth, {}};
    {
        // reuse the synthetic generator with explicit codes
        bbt::SyntheticSeason tmp =
            bbt::simulate_game_log(truth, o.games_per_team, o.year, o.seed);
        season.games = std::move(tmp.games);
        for (auto& g : season.games) {
            g.home = index.code(tmp.index.index_of(g.home));
            g.away = index.code(tmp.index.index_of(g.away));
        }
    }

    {
        auto gout = bbt::open_output(out / "games.csv");
        meta.write(gout);
        gout << "date,home,away,home_score,away_score\n";
        for (const auto& g : season.games)
            gout << bbt::date_to_int(g.date) << ',' << g.home << ',' << g.away << ','
                 << g.home_score << ',' << g.away_score << '\n';
    }
    bbt::Table truth_t;
    truth_t.columns = {"team", "lambda"};
    for (int i = 0; i < index.size(); ++i)
        truth_t.add_row({index.code(i), fmt(truth[i])});
    write_table_file(out / "truth.csv", truth_t, meta, o.format);

    std::cout << "wrote " << season.games.size() << " games for " << index.size()
              << " teams to " << (out / "games.csv").string() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options o;
    CLI::App app{"hierarchical Bayesian Bradley-Terry season toolkit"};
    app.set_version_flag("--version", std::string(bbt::kToolName) + " " + bbt::kVersion);
    // Flags may live in a key=value config file under a [subcommand]
    // section; command-line flags take precedence.
    app.set_config("--config", "", "key=value file mirroring the flags");
    app.fallthrough();
    app.require_subcommand(1);

    auto add_common = [&](CLI::App* sub, bool sampler_opts) {
        sub->add_option("--input,-i", o.inputs, "input file (game log or win matrix)");
        sub->add_option("--prev", o.prev, "previous-season log for the hyperprior");
        sub->add_option("--hyperprior-shape", o.hp_shape, "explicit Gamma shape");
        sub->add_option("--hyperprior-rate", o.hp_rate, "explicit Gamma rate");
        sub->add_option("--seed", o.seed, "random seed");
        sub->add_option("--out,-o", o.out_dir, "output directory");
        sub->add_option("--format", o.format, "output format")
            ->check(CLI::IsMember({"delimited", "structured"}));
        sub->add_option("--ties", o.ties, "tied-game policy")
            ->check(CLI::IsMember({"reject", "skip"}));
        sub->add_option("--rate-convention", o.rate_convention,
                        "hyperprior rate convention: mean-matched or squared-scale")
            ->check(CLI::IsMember({"mean", "squared"}));
        if (sampler_opts) {
            sub->add_option("--chains", o.chains, "MCMC chains")->check(CLI::Range(2, 64));
            sub->add_option("--warmup", o.warmup, "warmup iterations per chain");
            sub->add_option("--draws", o.draws, "posterior draws per chain");
            sub->add_option("--target-accept", o.target_accept, "HMC target acceptance");
            sub->add_option("--algorithm", o.algorithm, "sampler algorithm")
                ->check(CLI::IsMember({"hmc", "rw"}));
        }
    };

    auto* hyper = app.add_subcommand("hyperprior",
                                     "estimate the scale hyperprior from a season log");
    add_common(hyper, false);

    auto* fit = app.add_subcommand("fit", "fit a season: MLE, MAP, posterior, rankings");
    add_common(fit, true);

    auto* predict = app.add_subcommand("predict", "train/test forecast at one partition");
    add_common(predict, true);
    predict->add_option("--partition", o.partition, "cutoff date (YYYYMMDD or Apr15..Sep15)");

    auto* sweep = app.add_subcommand("sweep", "partition sweep over one or more seasons");
    add_common(sweep, true);
    sweep->add_option("--partitions", o.partitions, "cutoff list (default Apr15..Sep15)");
    sweep->add_option("--sd-convention", o.sd_convention,
                      "spread convention: each method's own errors, or the cross form")
        ->check(CLI::IsMember({"own", "cross"}));

    auto* simulate = app.add_subcommand("simulate", "generate a synthetic season log");
    add_common(simulate, false);
    simulate->add_option("--teams", o.teams, "team count (even)");
    simulate->add_option("--games-per-team", o.games_per_team, "games per team");
    simulate->add_option("--sigma-star", o.sigma_star, "true strength spread");
    simulate->add_option("--strengths-file", o.strengths_file, "team,lambda file");
    simulate->add_option("--year", o.year, "season year for the synthetic dates");

    predict->add_option("--sd-convention", o.sd_convention, "spread convention")
        ->check(CLI::IsMember({"own", "cross"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(hyper))
            return cmd_hyperprior(o);
        if (app.got_subcommand(fit))
            return cmd_fit(o);
        if (app.got_subcommand(predict))
            return cmd_predict(o);
        if (app.got_subcommand(sweep))
            return cmd_sweep(o);
        if (app.got_subcommand(simulate))
            return cmd_simulate(o);
        return 1;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const bbt::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const bbt::data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
}
