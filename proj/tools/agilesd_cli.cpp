// agilesd: command-line front end for the throughput model, the flow
// simulator and lambda_max tuning.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "agilesd/agilesd.hpp"
#include "agilesd/harness/config_file.hpp"
#include "agilesd/harness/csv_io.hpp"
#include "agilesd/harness/json_io.hpp"
#include "agilesd/harness/sweep.hpp"

namespace fs = std::filesystem;
using namespace agilesd;
using namespace agilesd::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidationFailed = 1;
constexpr int kExitUsage = 2;

struct CommonOptions {
    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::string cca = "agile";
};

RunConfig load_config(const CommonOptions& o) {
    if (o.config_path.empty()) return parse_config("");
    std::ifstream in(o.config_path);
    if (!in) throw IoError("cannot read config '" + o.config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

CcaParams selected_params(const CommonOptions& o, const RunConfig& rc) {
    return o.cca == "newreno" ? CcaParams::newreno(rc.params.beta) : rc.params;
}

// Writes to --out when given, stdout otherwise.
template <class Fn>
void with_output(const CommonOptions& o, Fn&& fn) {
    if (o.out_path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream out(o.out_path);
    if (!out) throw IoError("cannot open '" + o.out_path + "' for writing");
    fn(out);
    if (!out) throw IoError("failed writing '" + o.out_path + "'");
}

int cmd_model(const CommonOptions& o) {
    const auto rc = load_config(o);
    const auto params = selected_params(o, rc);
    const auto r = average_throughput(rc.network, params, rc.model);
    with_output(o, [&](std::ostream& out) {
        if (o.format == "json") {
            out << json{{"config", to_json(rc.network)}, {"params", to_json(params)}, {"report", to_json(r)},
                        {"metadata", {{"normalization", kNormalization}}}}
                       .dump(2)
                << '\n';
        } else {
            const auto f = [](double v) { return format_real(v, kSweepDigits); };
            out << "cca,beta,lambda_max,buffer_packets,loss_rate,rtt_ms,ath_kbps,normalized,iterations,mean_window,"
                   "mean_lambda\n"
                << o.cca << ',' << f(params.beta) << ',' << f(params.lambda_max) << ',' << rc.network.buffer_packets
                << ',' << f(rc.network.loss_rate) << ',' << f(rc.network.rtt_s * 1000.0) << ',' << f(r.ath_kbps)
                << ',' << f(normalize(r.ath_kbps, rc.network.capacity_kbps)) << ',' << r.iterations << ','
                << f(r.mean_window) << ',' << f(r.mean_lambda) << '\n';
        }
    });
    return kExitOk;
}

int cmd_simulate(const CommonOptions& o) {
    const auto rc = load_config(o);
    const auto params = selected_params(o, rc);
    const auto seeds = o.seed ? std::vector<std::uint64_t>{*o.seed} : rc.sweep.seeds;
    std::vector<SimReport> reports;
    for (auto s : seeds) reports.push_back(run_flow(rc.network, params, rc.sweep.duration_s, s));

    with_output(o, [&](std::ostream& out) {
        if (o.format == "json") {
            json runs = json::array();
            for (const auto& r : reports) runs.push_back(to_json(r));
            out << json{{"config", to_json(rc.network)}, {"params", to_json(params)}, {"runs", runs},
                        {"metadata", {{"normalization", kNormalization}}}}
                       .dump(2)
                << '\n';
        } else {
            const auto f = [](double v) { return format_real(v, kSweepDigits); };
            out << "seed,tatr_kbps,normalized,duration_s,epochs,mean_epoch_s,random_losses,congestion_losses\n";
            for (const auto& r : reports)
                out << r.seed << ',' << f(r.tatr_kbps) << ',' << f(normalize(r.tatr_kbps, rc.network.capacity_kbps))
                    << ',' << f(r.duration_s) << ',' << r.epochs.size() << ',' << f(r.mean_epoch_duration_s) << ','
                    << r.loss_counts.random << ',' << r.loss_counts.congestion << '\n';
        }
    });
    return kExitOk;
}

int cmd_sweep(const CommonOptions& o) {
    const auto rc = load_config(o);
    if (!rc.sweep.variable) throw ConfigError("sweep_variable", "required for the sweep command");
    const auto rows = run_sweep(rc.sweep);
    with_output(o, [&](std::ostream& out) {
        if (o.format == "json")
            out << sweep_to_json(rows).dump(2) << '\n';
        else
            write_sweep_csv(out, rows);
    });
    return kExitOk;
}

int cmd_validate(const CommonOptions& o, double max_median, double max_error) {
    auto rc = load_config(o);
    if (!rc.sweep.variable) throw ConfigError("sweep_variable", "required for the validate command");
    rc.sweep.mode = SweepMode::both;
    rc.sweep.base_params = selected_params(o, rc);
    const auto rep = compare_model_vs_sim(rc.sweep);
    with_output(o, [&](std::ostream& out) {
        if (o.format == "json") {
            out << to_json(rep).dump(2) << '\n';
        } else {
            const auto f = [](double v) { return format_real(v, kSweepDigits); };
            out << "sweep_variable,sweep_value,cca,model_normalized,sim_mean,sim_stddev,relative_error\n";
            for (const auto& p : rep.points)
                out << rep.sweep_variable << ',' << f(p.sweep_value) << ',' << rep.cca << ','
                    << f(p.model_normalized) << ',' << f(p.sim_mean) << ',' << f(p.sim_stddev) << ','
                    << f(p.relative_error) << '\n';
        }
    });
    const bool ok = rep.median_relative_error <= max_median && rep.max_relative_error <= max_error;
    std::cerr << "median relative error " << rep.median_relative_error << " (limit " << max_median << "), max "
              << rep.max_relative_error << " (limit " << max_error << "): " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kExitOk : kExitValidationFailed;
}

int cmd_aacpt(const CommonOptions& o) {
    const auto rc = load_config(o);
    validate(rc.tuning);
    const fs::path dir = o.out_path.empty() ? fs::path("aacpt_out") : fs::path(o.out_path);

    const auto result = run_aacpt(rc.tuning);
    const auto fit = fit_optimal_line(result.betas, result.lambda_opt);

    fs::create_directories(dir);
    auto write = [&](const char* name, auto&& fn) {
        std::ofstream out(dir / name);
        if (!out) throw IoError("cannot open '" + (dir / name).string() + "' for writing");
        fn(out);
    };
    write("at_matrix.csv", [&](std::ostream& out) { write_at_matrix_csv(out, result); });
    write("lambda_opt.csv", [&](std::ostream& out) { write_lambda_opt_csv(out, result); });
    write("fit.json", [&](std::ostream& out) { out << fit_to_json(result, fit, rc.tuning).dump(2) << '\n'; });
    std::cerr << "wrote " << (dir / "at_matrix.csv").string() << ", lambda_opt.csv, fit.json\n";
    return kExitOk;
}

int cmd_trace(const CommonOptions& o) {
    const auto rc = load_config(o);
    const auto params = selected_params(o, rc);
    const std::uint64_t seed = o.seed ? *o.seed : rc.sweep.seeds.front();
    const auto report = run_flow(rc.network, params, rc.sweep.duration_s, seed);
    if (o.out_path.empty())
        write_trace_csv(std::cout, report);
    else
        emit_trace(report, o.out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Agile-SD / NewReno throughput model, flow simulator and lambda_max tuner"};
    app.require_subcommand(1);

    CommonOptions opts;
    double max_median = 0.15;
    double max_error = 0.30;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "key = value configuration file")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out_path, "output file (directory for aacpt)");
        sub->add_option("--format", opts.format, "output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--seed", opts.seed, "simulator seed (overrides config seeds)");
    };
    auto add_cca = [&](CLI::App* sub) {
        sub->add_option("--cca", opts.cca, "congestion control: agile uses the configured lambda range, "
                                           "newreno forces lambda_min = lambda_max = 1")
            ->check(CLI::IsMember({"agile", "newreno"}));
    };

    auto* model = app.add_subcommand("model", "Markov-model average throughput");
    auto* simulate = app.add_subcommand("simulate", "run the flow simulator");
    auto* sweep = app.add_subcommand("sweep", "sweep one parameter for Agile-SD and NewReno");
    auto* validate_cmd = app.add_subcommand("validate", "compare model against seed-averaged simulator");
    auto* aacpt = app.add_subcommand("aacpt", "grid-search lambda_max per beta");
    auto* trace = app.add_subcommand("trace", "dump a per-cycle simulator trace");
    for (auto* s : {model, simulate, sweep, validate_cmd, aacpt, trace}) add_common(s);
    for (auto* s : {model, simulate, validate_cmd, trace}) add_cca(s);
    validate_cmd->add_option("--max-median", max_median, "median relative error limit");
    validate_cmd->add_option("--max-error", max_error, "max relative error limit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*model) return cmd_model(opts);
        if (*simulate) return cmd_simulate(opts);
        if (*sweep) return cmd_sweep(opts);
        if (*validate_cmd) return cmd_validate(opts, max_median, max_error);
        if (*aacpt) return cmd_aacpt(opts);
        if (*trace) return cmd_trace(opts);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidParameter& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidationFailed;
    }
    return kExitUsage;
}
