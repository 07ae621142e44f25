// discrete-extremes: peaks-over-threshold modeling for integer-valued data.
//
// Subcommands:
//   fit        fit a tail family to exceedances, emit a JSON report
//   qq         emit QQ-plot data (positions, quantiles, MC envelope) as CSV
//   replicate  run the bundled simulation/analysis studies
//
// Exit codes: 0 ok, 1 input error, 2 usage error, 3 fit non-convergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dex/dist.hpp"
#include "dex/gof.hpp"
#include "dex/io.hpp"
#include "dex/mle.hpp"
#include "dex/pot.hpp"
#include "dex/replication.hpp"

namespace {

using nlohmann::json;
using namespace dex;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNoConverge = 3;

struct DataArgs {
    std::string input = "-";
    std::string format = "raw";
    std::string family = "dgpd";
    double delta = 0.0;
    std::optional<long long> threshold;
    std::optional<double> threshold_quantile;
    std::string covariate_path;
    std::uint64_t seed = 1;
};

void add_data_flags(CLI::App& cmd, DataArgs& a) {
    cmd.add_option("--input", a.input, "input path, or '-' for standard input");
    cmd.add_option("--format", a.format, "raw | freq | freq_censored")
        ->check(CLI::IsMember({"raw", "freq", "freq_censored"}));
    cmd.add_option("--family", a.family, "gpd | dgpd | gzd | geometric | poisson | negbinomial")
        ->check(CLI::IsMember({"gpd", "dgpd", "gzd", "geometric", "poisson", "negbinomial"}));
    cmd.add_option("--delta", a.delta, "continuity shift in [0,1), gpd only")
        ->check(CLI::Range(0.0, 0.999999));
    auto* t = cmd.add_option("--threshold", a.threshold, "integer threshold u");
    auto* q = cmd.add_option("--threshold-quantile", a.threshold_quantile,
                             "empirical percentile for u, in (0,1)")
                  ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    t->excludes(q);
    q->excludes(t);
    cmd.add_option("--covariate", a.covariate_path,
                   "file with one real per line, aligned with raw observations");
    cmd.add_option("--seed", a.seed, "random seed for all Monte Carlo work");
}

Family make_family(const DataArgs& a) {
    const auto tag = family_from_name(a.family);
    if (!tag) throw CLI::ValidationError("--family", "unknown family " + a.family);
    if (*tag == FamilyTag::Gpd) return Family::gpd(a.delta);
    if (a.delta != 0.0)
        throw CLI::ValidationError("--delta", "only meaningful with --family gpd");
    return Family{*tag, 0.0};
}

Dataset read_dataset(const DataArgs& a) {
    const DataFormat format = format_from_name(a.format);
    if (a.input == "-") return load_dataset(std::cin, format, "<stdin>");
    return load_dataset_file(a.input, format);
}

// Everything a fitted model needs downstream: the exceedance sample, the
// fit itself, and the options it was fitted with.
struct Fitted {
    Family family;
    ExceedanceSample sample;
    FitResult fit;
    FitOptions options;
    FitData data;
};

Fitted run_fit(const DataArgs& a) {
    if (!a.threshold.has_value() && !a.threshold_quantile.has_value())
        throw CLI::RequiredError("one of --threshold or --threshold-quantile");

    const Dataset ds = read_dataset(a);
    const Family family = make_family(a);

    Fitted out;
    out.family = family;

    long long u = 0;
    if (a.threshold)
        u = *a.threshold;
    else
        u = select_threshold(ds.counts, *a.threshold_quantile);
    out.sample = exceedances(ds.counts, u);

    if (!a.covariate_path.empty()) {
        if (ds.ordered.empty())
            throw std::runtime_error("--covariate requires --format raw");
        const std::vector<double> cov = load_covariate_file(a.covariate_path);
        if (cov.size() != ds.ordered.size())
            throw std::runtime_error("covariate length " + std::to_string(cov.size()) +
                                     " does not match " + std::to_string(ds.ordered.size()) +
                                     " observations");
        std::vector<double> vals, kept;
        for (std::size_t i = 0; i < ds.ordered.size(); ++i) {
            if (ds.ordered[i] < u) continue;
            vals.push_back(static_cast<double>(ds.ordered[i] - u));
            kept.push_back(cov[i]);
        }
        if (vals.empty()) throw std::runtime_error("no observations reach the threshold");
        // rescale the covariate affinely to [0,1] over the fitted rows
        double lo = kept[0], hi = kept[0];
        for (double c : kept) { lo = std::min(lo, c); hi = std::max(hi, c); }
        if (hi > lo)
            for (double& c : kept) c = (c - lo) / (hi - lo);
        else
            for (double& c : kept) c = 0.0;
        out.options.covariate = std::move(kept);
        out.data = FitData::from_raw(std::move(vals));
    } else {
        out.data = FitData::from_grouped(out.sample.exceedances);
    }

    out.fit = fit(family, out.data, out.options);
    return out;
}

std::vector<std::string> param_names(const Family& family, bool covariate) {
    switch (family.tag) {
        case FamilyTag::Gpd:
        case FamilyTag::Dgpd:
        case FamilyTag::Gzd:
            if (covariate) return {"sigma", "sigma_t", "xi"};
            return {"sigma", "xi"};
        case FamilyTag::Geometric: return {"p"};
        case FamilyTag::Poisson: return {"lambda"};
        case FamilyTag::NegBinomial: return {"r", "p"};
        default: return {};
    }
}

json fit_block(const Fitted& f) {
    const bool covariate = !f.options.covariate.empty();
    const auto names = param_names(f.family, covariate);
    json est, se, ci;
    for (std::size_t j = 0; j < names.size(); ++j) {
        est[names[j]] = f.fit.estimates[j];
        if (f.fit.covariance_ok) {
            se[names[j]] = f.fit.se(j);
            const Interval iv = confint(f.fit, 0.90, j);
            ci[names[j]] = json::array({iv.lo, iv.hi});
        }
    }
    json out{
        {"schema", "1"},
        {"family", family_name(f.family.tag)},
        {"delta", f.family.delta},
        {"threshold", f.sample.threshold},
        {"n_total", f.sample.n_total},
        {"n_exceed", f.sample.exceedances.total()},
        {"estimates", est},
        {"nll", f.fit.nll},
        {"aic", f.fit.aic},
        {"bic", f.fit.bic},
        {"converged", f.fit.converged},
    };
    if (f.fit.covariance_ok) {
        out["se"] = se;
        out["ci90"] = ci;
    }
    return out;
}

int cmd_fit(const DataArgs& a, std::optional<long long> tail_at, std::uint64_t gof_b,
            bool refit, double level) {
    const Fitted f = run_fit(a);
    json report = fit_block(f);

    if (tail_at) {
        if (f.fit.covariance_ok) {
            const TailEstimate te = tail_probability(f.fit, f.sample, *tail_at, level);
            report["tail"] = json{{"m", te.target},
                                  {"p_e", te.p_e_hat},
                                  {"se", te.se},
                                  {"ci", json::array({te.ci.lo, te.ci.hi})},
                                  {"level", level}};
        } else {
            // no usable covariance: point estimate only
            const long long gap = *tail_at - f.sample.threshold;
            const double p_e =
                gap <= 0 ? f.sample.p_u_hat
                         : f.sample.p_u_hat * discrete_sf(f.family, f.fit.estimates, gap);
            report["tail"] = json{{"m", *tail_at}, {"p_e", p_e}, {"level", level}};
        }
    }
    if (gof_b > 0) {
        if (!f.options.covariate.empty())
            throw std::runtime_error("--gof is not supported for covariate models");
        const KsResult ks = ks_pvalue(f.sample.exceedances, f.family, f.fit, gof_b, refit,
                                      RngStream(a.seed));
        report["gof"] = json{{"ks_stat", ks.statistic},
                             {"p_value", ks.p_value},
                             {"B", ks.mc_replicates},
                             {"refit", ks.refit},
                             {"n_nonconverged", ks.n_nonconverged}};
    }

    std::cout << report.dump(2) << "\n";
    return f.fit.converged ? kExitOk : kExitNoConverge;
}

int cmd_qq(const DataArgs& a, std::uint64_t sims, double level) {
    const Fitted f = run_fit(a);
    if (!f.options.covariate.empty())
        throw std::runtime_error("qq is not supported for covariate models");
    const QqData qq = qq_points(f.sample.exceedances, f.family, f.fit.estimates, sims, level,
                                RngStream(a.seed));
    std::ostringstream out;
    out.precision(17);
    const bool envelope = sims > 0;
    out << (envelope ? "position,empirical_q,model_q,lo,hi\n"
                     : "position,empirical_q,model_q\n");
    for (std::size_t i = 0; i < qq.positions.size(); ++i) {
        out << qq.positions[i] << ',' << qq.empirical_q[i] << ',' << qq.model_q[i];
        if (envelope) out << ',' << qq.lo[i] << ',' << qq.hi[i];
        out << '\n';
    }
    std::cout << out.str();
    return f.fit.converged ? kExitOk : kExitNoConverge;
}

json method_json(const MethodSummary& ms) {
    return json{{"method", ms.method},
                {"mean_pe", ms.mean_pe},
                {"coverage_pe", ms.coverage_pe},
                {"mean_len_pe", ms.mean_len_pe},
                {"true_len_pe", ms.true_len_pe},
                {"mean_xi", ms.mean_xi},
                {"coverage_xi", ms.coverage_xi},
                {"mean_len_xi", ms.mean_len_xi},
                {"mean_sigma", ms.mean_sigma},
                {"mean_len_sigma", ms.mean_len_sigma},
                {"n_reps", ms.n_reps},
                {"n_failed", ms.n_failed}};
}

int cmd_replicate_table1(std::uint64_t reps, std::uint64_t n, double percentile,
                         std::uint64_t seed, bool csv) {
    const ExperimentSummary es = table_experiment(reps, n, percentile, RngStream(seed));
    if (csv) {
        std::ostringstream out;
        out.precision(17);
        out << "method,mean_pe,coverage_pe,mean_len_pe,true_len_pe,mean_xi,coverage_xi,"
               "mean_len_xi,mean_sigma,mean_len_sigma,n_reps,n_failed\n";
        for (const auto& ms : es.methods)
            out << ms.method << ',' << ms.mean_pe << ',' << ms.coverage_pe << ','
                << ms.mean_len_pe << ',' << ms.true_len_pe << ',' << ms.mean_xi << ','
                << ms.coverage_xi << ',' << ms.mean_len_xi << ',' << ms.mean_sigma << ','
                << ms.mean_len_sigma << ',' << ms.n_reps << ',' << ms.n_failed << '\n';
        std::cout << out.str();
        return kExitOk;
    }
    json out{{"schema", "1"},
             {"experiment", "table1"},
             {"truth_pe", es.truth_pe},
             {"target_m", es.target_m},
             {"true_xi", es.true_xi},
             {"reps", es.reps},
             {"n", es.n},
             {"seed", es.seed},
             {"methods", json::array()}};
    for (const auto& ms : es.methods) out["methods"].push_back(method_json(ms));
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_replicate_intro(std::uint64_t n, double lambda, long long u, std::uint64_t seeds,
                        std::uint64_t seed) {
    const PoissonIntroResult res = poisson_intro_experiment(n, lambda, u, seeds, RngStream(seed));
    json out{{"schema", "1"},
             {"experiment", "poisson-intro"},
             {"n", n},
             {"lambda", lambda},
             {"u", u},
             {"seeds", res.seeds},
             {"methods", json::array()}};
    for (const auto& row : res.rows)
        out["methods"].push_back(json{{"method", row.method},
                                      {"mean_sigma", row.mean_sigma},
                                      {"mean_xi", row.mean_xi},
                                      {"n_failed", row.n_failed}});
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_replicate_births() {
    json out{{"schema", "1"}, {"experiment", "births"}, {"methods", json::array()}};
    for (const auto& row : births_analysis()) {
        json r{{"method", row.method},
               {"nll", row.fit.nll},
               {"bic", row.fit.bic},
               {"converged", row.fit.converged}};
        const auto names = param_names(row.fit.family, false);
        json est, ci;
        for (std::size_t j = 0; j < names.size(); ++j) {
            est[names[j]] = row.fit.estimates[j];
            if (row.fit.covariance_ok) {
                const Interval iv = confint(row.fit, 0.90, j);
                ci[names[j]] = json::array({iv.lo, iv.hi});
            }
        }
        r["estimates"] = est;
        if (row.fit.covariance_ok) r["ci90"] = ci;
        out["methods"].push_back(r);
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_replicate_theorem1(double s, long long u, long long k_max) {
    const double dev = theorem1_ratio_check(s, u, k_max);
    json out{{"schema", "1"}, {"experiment", "theorem1"}, {"s", s},
             {"u", u},        {"k_max", k_max},           {"max_deviation", dev}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Peaks-over-threshold modeling of discrete upper tails"};
    app.require_subcommand(1);

    // fit
    DataArgs fit_args;
    std::optional<long long> tail_at;
    std::uint64_t gof_b = 0;
    bool refit = true;
    double level = 0.90;
    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a tail family to exceedances");
    add_data_flags(*fit_cmd, fit_args);
    fit_cmd->add_option("--tail-at", tail_at, "estimate P(X >= m) for this m");
    fit_cmd->add_option("--gof", gof_b, "KS bootstrap replicates (0 = skip)");
    fit_cmd->add_flag("--refit,!--no-refit", refit, "refit inside the KS bootstrap");
    fit_cmd->add_option("--level", level, "confidence level")->check(CLI::Range(0.5, 0.999));

    // qq
    DataArgs qq_args;
    std::uint64_t sims = 2000;
    double qq_level = 0.90;
    CLI::App* qq_cmd = app.add_subcommand("qq", "emit QQ-plot data as CSV");
    add_data_flags(*qq_cmd, qq_args);
    qq_cmd->add_option("--sims", sims, "envelope simulations (0 = no envelope)");
    qq_cmd->add_option("--level", qq_level, "envelope level")->check(CLI::Range(0.5, 0.999));

    // replicate
    CLI::App* rep_cmd = app.add_subcommand("replicate", "run a bundled study");
    rep_cmd->require_subcommand(1);

    std::uint64_t t_reps = 200, t_n = 8000, t_seed = 1;
    double t_pct = 0.95;
    bool t_csv = false;
    CLI::App* t1 = rep_cmd->add_subcommand("table1", "inverse-gamma rare-event experiment");
    t1->add_option("--reps", t_reps, "replications");
    t1->add_option("--n", t_n, "sample size per replication");
    t1->add_option("--percentile", t_pct, "threshold percentile")->check(CLI::Range(0.5, 0.999));
    t1->add_option("--seed", t_seed, "random seed");
    t1->add_flag("--csv", t_csv, "emit CSV instead of JSON");

    std::uint64_t p_n = 5000, p_seeds = 20, p_seed = 1;
    double p_lambda = 1.0;
    long long p_u = 3;
    CLI::App* pi = rep_cmd->add_subcommand("poisson-intro", "Poisson threshold example");
    pi->add_option("--n", p_n, "sample size");
    pi->add_option("--lambda", p_lambda, "Poisson rate")->check(CLI::PositiveNumber);
    pi->add_option("--u", p_u, "threshold");
    pi->add_option("--seeds", p_seeds, "independent datasets");
    pi->add_option("--seed", p_seed, "random seed");

    CLI::App* births = rep_cmd->add_subcommand("births", "multiple-births analysis");

    double th_s = 3.0;
    long long th_u = 10000, th_kmax = 10;
    CLI::App* th = rep_cmd->add_subcommand("theorem1", "Zipf-Mandelbrot tail-ratio check");
    th->add_option("--s", th_s, "Zipf exponent (> 1)");
    th->add_option("--u", th_u, "threshold");
    th->add_option("--k-max", th_kmax, "largest lag checked");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fit_cmd->parsed()) return cmd_fit(fit_args, tail_at, gof_b, refit, level);
        if (qq_cmd->parsed()) return cmd_qq(qq_args, sims, qq_level);
        if (t1->parsed()) return cmd_replicate_table1(t_reps, t_n, t_pct, t_seed, t_csv);
        if (pi->parsed()) return cmd_replicate_intro(p_n, p_lambda, p_u, p_seeds, p_seed);
        if (births->parsed()) return cmd_replicate_births();
        if (th->parsed()) return cmd_replicate_theorem1(th_s, th_u, th_kmax);
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
