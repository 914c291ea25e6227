#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
    std::string stderr_text;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out_file = dir / "stdout.txt";
    const fs::path err_file = dir / "stderr.txt";
    const std::string cmd = std::string(BBT_CLI_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.stdout_text = slurp(out_file);
    r.stderr_text = slurp(err_file);
    return r;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("bbt_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("missing input file exits with a data error naming the path", "[cli]") {
    const auto dir = fresh_dir("missing");
    const auto r = run_cli("fit --input " + (dir / "nope.csv").string() +
                               " --hyperprior-shape 60 --hyperprior-rate 200",
                           dir);
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("nope.csv") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1", "[cli]") {
    const auto dir = fresh_dir("usage");
    CHECK(run_cli("", dir).exit_code == 1);
    CHECK(run_cli("sweep", dir).exit_code == 1);  // zero seasons
    CHECK(run_cli("frobnicate", dir).exit_code == 1);
    CHECK(run_cli("simulate --teams 7 --out " + (dir / "o").string(), dir).exit_code == 1);
    CHECK(run_cli("--version", dir).exit_code == 0);
    CHECK(run_cli("--help", dir).exit_code == 0);
}

TEST_CASE("hyperprior on the two-team toy log", "[cli]") {
    const auto dir = fresh_dir("hyper");
    // 3-1 head-to-head record: sigma_hat = log(3)/2, shape = 2N = 4.
    write_file(dir / "prev.csv",
               "date,home,away,home_score,away_score\n"
               "20160401,AAA,BBB,2,1\n"
               "20160402,AAA,BBB,5,0\n"
               "20160403,BBB,AAA,1,4\n"
               "20160404,BBB,AAA,7,2\n");
    const auto r = run_cli("hyperprior --input " + (dir / "prev.csv").string() + " --out " +
                               (dir / "out").string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    CHECK(r.stdout_text.find("shape = 4") != std::string::npos);
    CHECK(r.stdout_text.find("sigma_hat = 0.5493061443") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "hyperprior.csv"));
    const auto table = slurp(dir / "out" / "hyperprior.csv");
    CHECK(table.find("# bbt ") != std::string::npos);
    CHECK(table.find("# seed = ") != std::string::npos);
    CHECK(table.find("# config = ") != std::string::npos);
}

TEST_CASE("hyperprior failure names the offending team", "[cli]") {
    const auto dir = fresh_dir("ford");
    write_file(dir / "prev.csv",
               "20160401,AAA,BBB,2,1\n"
               "20160402,AAA,CCC,2,1\n"
               "20160403,BBB,CCC,2,1\n");  // CCC winless
    const auto r =
        run_cli("hyperprior --input " + (dir / "prev.csv").string(), dir);
    CHECK(r.exit_code == 3);
    CHECK(r.stderr_text.find("CCC") != std::string::npos);
    CHECK(r.stderr_text.find("Ford") != std::string::npos);
}

TEST_CASE("simulate writes a parseable, seed-stable log", "[cli]") {
    const auto dir = fresh_dir("simulate");
    const std::string base = "simulate --teams 30 --games-per-team 162 --sigma-star 0.27 "
                             "--year 2017 ";
    REQUIRE(run_cli(base + "--seed 9 --out " + (dir / "a").string(), dir).exit_code == 0);
    REQUIRE(run_cli(base + "--seed 9 --out " + (dir / "b").string(), dir).exit_code == 0);
    const auto a = slurp(dir / "a" / "games.csv");
    CHECK(a == slurp(dir / "b" / "games.csv"));
    CHECK(slurp(dir / "a" / "truth.csv") == slurp(dir / "b" / "truth.csv"));

    // 30 teams x 162 games = 2430 rows plus meta and header
    std::istringstream in(a);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#' && line[0] != 'd')
            ++rows;
    CHECK(rows == 2430);

    const auto c = run_cli(base + "--seed 10 --out " + (dir / "c").string(), dir);
    REQUIRE(c.exit_code == 0);
    CHECK(slurp(dir / "c" / "games.csv") != a);
}

TEST_CASE("fit emits the full table set and is byte-stable under a fixed seed",
          "[cli][slow]") {
    const auto dir = fresh_dir("fit");
    REQUIRE(run_cli("simulate --teams 8 --games-per-team 40 --year 2015 --seed 33 --out " +
                        (dir / "season").string(),
                    dir)
                .exit_code == 0);
    const std::string fit_args = "fit --input " + (dir / "season" / "games.csv").string() +
                                 " --hyperprior-shape 60 --hyperprior-rate 200 "
                                 "--chains 2 --warmup 200 --draws 200 ";
    REQUIRE(run_cli(fit_args + "--seed 5 --out " + (dir / "x").string(), dir).exit_code == 0);
    REQUIRE(run_cli(fit_args + "--seed 5 --out " + (dir / "y").string(), dir).exit_code == 0);

    for (const char* name :
         {"mle.csv", "map.csv", "summary.csv", "ranking.csv", "draws.csv", "report.csv"}) {
        CAPTURE(name);
        REQUIRE(fs::exists(dir / "x" / name));
        CHECK(slurp(dir / "x" / name) == slurp(dir / "y" / name));
    }

    // A different seed must change the draws.
    REQUIRE(run_cli(fit_args + "--seed 6 --out " + (dir / "z").string(), dir).exit_code == 0);
    CHECK(slurp(dir / "x" / "draws.csv") != slurp(dir / "z" / "draws.csv"));

    // Structured output variant.
    REQUIRE(run_cli(fit_args + "--seed 5 --format structured --out " + (dir / "j").string(),
                    dir)
                .exit_code == 0);
    CHECK(fs::exists(dir / "j" / "ranking.json"));
}

TEST_CASE("predict rejects an out-of-season partition", "[cli]") {
    const auto dir = fresh_dir("predict");
    REQUIRE(run_cli("simulate --teams 6 --games-per-team 20 --year 2018 --seed 2 --out " +
                        (dir / "season").string(),
                    dir)
                .exit_code == 0);
    const std::string common = "predict --input " +
                               (dir / "season" / "games.csv").string() +
                               " --hyperprior-shape 60 --hyperprior-rate 200 "
                               "--chains 2 --warmup 150 --draws 200 --seed 3";
    const auto bad = run_cli(common + " --partition 20181201", dir);
    CHECK(bad.exit_code == 2);

    const auto good =
        run_cli(common + " --partition May1 --out " + (dir / "out").string(), dir);
    REQUIRE(good.exit_code == 0);
    CHECK(good.stdout_text.find("error_bayes=") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "predict_teams.csv"));
    CHECK(fs::exists(dir / "out" / "predict_summary.csv"));
}

TEST_CASE("sweep writes per-season and long-format tables", "[cli][slow]") {
    const auto dir = fresh_dir("sweep");
    REQUIRE(run_cli("simulate --teams 6 --games-per-team 30 --year 2016 --seed 21 --out " +
                        (dir / "s2016").string(),
                    dir)
                .exit_code == 0);
    const auto r = run_cli("sweep --input " + (dir / "s2016" / "games.csv").string() +
                               " --hyperprior-shape 60 --hyperprior-rate 200"
                               " --partitions May15 --partitions Jul1 --partitions Aug15"
                               " --chains 2 --warmup 150 --draws 200 --seed 8 --out " +
                               (dir / "out").string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    CHECK(fs::exists(dir / "out" / "sweep_2016.csv"));
    CHECK(fs::exists(dir / "out" / "sweep_long.csv"));
    const auto table = slurp(dir / "out" / "sweep_2016.csv");
    CHECK(table.find("May15") != std::string::npos);
    CHECK(table.find("Jul1") != std::string::npos);
}

TEST_CASE("config file mirrors flags and flags win", "[cli]") {
    const auto dir = fresh_dir("config");
    write_file(dir / "prev.csv",
               "20160401,AAA,BBB,2,1\n"
               "20160402,AAA,BBB,5,0\n"
               "20160403,BBB,AAA,1,4\n"
               "20160404,BBB,AAA,7,2\n");
    write_file(dir / "run.conf", "[fit]\nchains=2\nwarmup=120\ndraws=150\nseed=99\n");
    const std::string base = "fit --input " + (dir / "prev.csv").string() +
                             " --hyperprior-shape 20 --hyperprior-rate 40 --config " +
                             (dir / "run.conf").string();
    REQUIRE(run_cli(base + " --out " + (dir / "a").string(), dir).exit_code == 0);
    const auto a = slurp(dir / "a" / "ranking.csv");
    CHECK(a.find("# seed = 99") != std::string::npos);

    // command line overrides the file
    REQUIRE(run_cli(base + " --seed 7 --out " + (dir / "b").string(), dir).exit_code == 0);
    CHECK(slurp(dir / "b" / "ranking.csv").find("# seed = 7") != std::string::npos);
}

TEST_CASE("fit accepts a precomputed win-matrix file", "[cli]") {
    const auto dir = fresh_dir("matrix");
    write_file(dir / "season.wm",
               "4 AAA BBB CCC DDD\n"
               "0 5 4 6\n"
               "3 0 5 4\n"
               "4 3 0 5\n"
               "2 4 3 0\n");
    const auto r = run_cli("fit --input " + (dir / "season.wm").string() +
                               " --hyperprior-shape 60 --hyperprior-rate 200 "
                               "--chains 2 --warmup 150 --draws 200 --out " +
                               (dir / "out").string(),
                           dir);
    REQUIRE(r.exit_code == 0);
    const auto ranking = slurp(dir / "out" / "ranking.csv");
    CHECK(ranking.find("AAA") != std::string::npos);
    CHECK(ranking.find("wins") != std::string::npos);
}
