// End-to-end CLI tests: JSON fit reports, QQ CSV output, replicate
// subcommands, stdin streaming, exit codes, and the raw/freq round trip.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dex/dist.hpp"
#include "dex/io.hpp"
#include "dex/rng.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    std::string out;
    int code = -1;
};

RunResult run(const std::string& args) {
    const std::string cmd = std::string(DEX_CLI_PATH) + " " + args + " 2>&1";
    RunResult r;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

fs::path tmpdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "dex-cli-test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = tmpdir() / name;
    std::ofstream(p) << text;
    return p;
}

fs::path sample_raw_file() {
    static const fs::path p = [] {
        dex::RngStream rng(19);
        std::ostringstream body;
        for (double v : dex::sample(dex::Family::poisson(), {2.0}, 3000, rng))
            body << static_cast<long long>(v) << "\n";
        return write_file("sample.txt", body.str());
    }();
    return p;
}

}  // namespace

TEST_CASE("fit emits a versioned JSON report") {
    const RunResult r = run("fit --family dgpd --threshold-quantile 0.95 --input " +
                            sample_raw_file().string() + " --tail-at 12 --gof 99 --seed 5");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep.at("schema") == "1");
    CHECK(rep.at("family") == "dgpd");
    CHECK(rep.at("delta") == 0.0);
    CHECK(rep.at("n_total") == 3000);
    CHECK(rep.at("n_exceed").get<long long>() > 0);
    CHECK(rep.at("converged") == true);
    CHECK(rep.at("estimates").contains("sigma"));
    CHECK(rep.at("estimates").contains("xi"));
    CHECK(rep.at("se").contains("sigma"));
    CHECK(rep.at("ci90").at("xi").size() == 2);
    CHECK(rep.at("nll").get<double>() > 0.0);
    CHECK(rep.at("bic").get<double>() > rep.at("aic").get<double>());
    CHECK(rep.at("tail").at("m") == 12);
    CHECK(rep.at("tail").at("p_e").get<double>() > 0.0);
    CHECK(rep.at("gof").at("B") == 99);
    CHECK(rep.at("gof").at("p_value").get<double>() > 0.0);
    CHECK(rep.at("gof").at("refit") == true);
}

TEST_CASE("freq file emitted from raw data yields the identical report") {
    // group the raw sample and write it in freq format
    std::ifstream in(sample_raw_file());
    const dex::Dataset ds = dex::load_dataset(in, dex::DataFormat::Raw, "sample");
    std::ostringstream freq;
    dex::write_freq(freq, ds.counts);
    const fs::path fp = write_file("sample.csv", freq.str());

    const std::string tail = " --family gzd --threshold 4 --tail-at 10";
    const RunResult a = run("fit --input " + sample_raw_file().string() + " --format raw" + tail);
    const RunResult b = run("fit --input " + fp.string() + " --format freq" + tail);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
}

TEST_CASE("gpd with continuity correction and censored frequency input") {
    const fs::path p = write_file(
        "cens.csv", "value,count\n0,700\n1,150\n2,60\n3,25\n>=4,12\n");
    const RunResult r = run("fit --family dgpd --threshold 0 --input " + p.string() +
                            " --format freq_censored");
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep.at("n_exceed") == 947);

    const RunResult g = run("fit --family gpd --delta 0.5 --threshold 0 --input " +
                            sample_raw_file().string());
    REQUIRE(g.code == 0);
    CHECK(json::parse(g.out).at("delta") == 0.5);

    // delta is rejected for discrete families
    const RunResult bad = run("fit --family dgpd --delta 0.5 --threshold 0 --input " +
                              sample_raw_file().string());
    CHECK(bad.code == 2);
}

TEST_CASE("qq output: column counts and determinism") {
    const std::string base = "qq --family dgpd --threshold 4 --input " +
                             sample_raw_file().string() + " --seed 7";
    const RunResult a = run(base + " --sims 50");
    const RunResult b = run(base + " --sims 50");
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);

    std::istringstream lines(a.out);
    std::string header;
    std::getline(lines, header);
    CHECK(header == "position,empirical_q,model_q,lo,hi");
    std::string row;
    std::getline(lines, row);
    CHECK(std::count(row.begin(), row.end(), ',') == 4);

    const RunResult plain = run(base + " --sims 0");
    std::istringstream lines0(plain.out);
    std::getline(lines0, header);
    CHECK(header == "position,empirical_q,model_q");
}

TEST_CASE("covariate fit reports a trend coefficient") {
    dex::RngStream rng(23);
    std::ostringstream vals, times;
    const std::size_t n = 400;
    for (std::size_t i = 0; i < n; ++i) {
        const double c = static_cast<double>(i) / (n - 1);
        const double sigma = 2.0 + 3.0 * c;
        vals << dex::dgpd_quantile(rng.uniform(), dex::TailParams(sigma, 0.2)) << "\n";
        times << 1995.0 + 20.0 * c << "\n";
    }
    const fs::path vp = write_file("trend.txt", vals.str());
    const fs::path tp = write_file("time.txt", times.str());
    const RunResult r = run("fit --family dgpd --threshold 0 --input " + vp.string() +
                            " --covariate " + tp.string());
    REQUIRE(r.code == 0);
    const json rep = json::parse(r.out);
    CHECK(rep.at("estimates").contains("sigma_t"));
    CHECK(rep.at("estimates").at("sigma_t").get<double>() > 0.5);

    // misaligned covariate is an input error
    const fs::path short_tp = write_file("short.txt", "1\n2\n3\n");
    CHECK(run("fit --family dgpd --threshold 0 --input " + vp.string() +
              " --covariate " + short_tp.string())
              .code == 1);
}

TEST_CASE("stdin streaming") {
    const std::string cmd = "cat " + sample_raw_file().string() + " | " + DEX_CLI_PATH +
                            " fit --family dgpd --threshold 4 --input - 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    CHECK(WEXITSTATUS(pclose(pipe)) == 0);
    CHECK(json::parse(out).at("threshold") == 4);
}

TEST_CASE("exit codes: usage, input, and non-convergence") {
    // neither threshold flag
    CHECK(run("fit --input " + sample_raw_file().string()).code == 2);
    // both threshold flags
    CHECK(run("fit --threshold 3 --threshold-quantile 0.9 --input " +
              sample_raw_file().string())
              .code == 2);
    // unknown subcommand
    CHECK(run("frobnicate").code == 2);
    // malformed CSV: line-numbered message, nonzero exit, no partial report
    const fs::path bad = write_file("bad.csv", "value,count\n0,10\noops\n");
    const RunResult r = run("fit --threshold 0 --format freq --input " + bad.string());
    CHECK(r.code == 1);
    CHECK(r.out.find(":3:") != std::string::npos);
    CHECK(r.out.find("schema") == std::string::npos);
    // missing file
    CHECK(run("fit --threshold 0 --input /nonexistent/x.txt").code == 1);
    // degenerate data (a single distinct value) cannot converge
    const fs::path flat = write_file("flat.txt", "2\n2\n2\n2\n2\n");
    const RunResult d = run("fit --family dgpd --threshold 2 --input " + flat.string());
    CHECK(d.code == 3);
    CHECK(json::parse(d.out).at("converged") == false);  // report still emitted
    // --help is a success, not a usage error
    CHECK(run("--help").code == 0);
}

TEST_CASE("replicate subcommands") {
    const RunResult th = run("replicate theorem1 --s 3 --u 1000 --k-max 5");
    REQUIRE(th.code == 0);
    const json thr = json::parse(th.out);
    CHECK(thr.at("experiment") == "theorem1");
    CHECK(thr.at("max_deviation").get<double>() < 1e-2);

    const RunResult t1 = run("replicate table1 --reps 4 --n 2000 --seed 2");
    REQUIRE(t1.code == 0);
    const json t1r = json::parse(t1.out);
    CHECK(t1r.at("target_m") == 70);
    CHECK(t1r.at("methods").size() == 5);

    const RunResult csv = run("replicate table1 --reps 4 --n 2000 --seed 2 --csv");
    REQUIRE(csv.code == 0);
    CHECK(csv.out.rfind("method,", 0) == 0);
    CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 6);  // header + 5 methods

    const RunResult pi = run("replicate poisson-intro --n 2000 --seeds 2 --seed 3");
    REQUIRE(pi.code == 0);
    CHECK(json::parse(pi.out).at("methods").size() == 3);

    // deterministic given --seed
    const RunResult pi2 = run("replicate poisson-intro --n 2000 --seeds 2 --seed 3");
    CHECK(pi.out == pi2.out);

    CHECK(run("replicate nonsense").code == 2);
}
