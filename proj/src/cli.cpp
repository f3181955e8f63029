#include "mmc/cli.hpp"

#include "mmc/config.hpp"
#include "mmc/hvdc_sim.hpp"
#include "mmc/metrics.hpp"
#include "mmc/output.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace mmc {

namespace fs = std::filesystem;

namespace {

struct RunFlags {
    std::string config;
    std::string algorithm;
    std::string out_dir = "out";
    std::optional<double> duration;
    std::string profile = "paper";
    std::string dc_model;
};

ScenarioConfig resolve(const RunFlags& flags)
{
    ScenarioConfig config = flags.profile == "fast" ? fast_profile() : paper_profile();
    if (!flags.config.empty())
        config = parse_config(flags.config, config);
    if (!flags.algorithm.empty())
        config.algorithm = parse_algorithm(flags.algorithm);
    if (!flags.dc_model.empty())
        config.dc_model = parse_dc_model(flags.dc_model);
    if (flags.duration)
        config.duration = *flags.duration;
    validate_config(config);
    return config;
}

int do_run(const RunFlags& flags, std::ostream& out)
{
    const ScenarioConfig config = resolve(flags);
    const fs::path dir = flags.out_dir;
    fs::create_directories(dir);

    RunManifest manifest;
    manifest.version = MMC_VERSION;
    manifest.config = write_config(config);
    manifest.started = utc_timestamp();
    const auto wall_start = std::chrono::steady_clock::now();

    SimTrace trace = run_scenario(config);
    quantize(trace);
    const auto report = segment_report(trace, config.nsw_schedule, {0, config.settle});

    for (int phase = 0; phase < kPhases; ++phase)
        manifest.files.push_back(
            {phase_file_name(phase), write_phase_csv(trace, phase, dir / phase_file_name(phase))});
    manifest.files.push_back({"summary.csv", write_summary_csv(report, dir / "summary.csv")});
    {
        std::ofstream txt(dir / "summary.txt");
        txt << summary_table(report);
    }
    for (auto& f : write_figure_data(trace, report, dir))
        manifest.files.push_back(std::move(f));
    {
        std::ofstream cfg(dir / "config.ini");
        cfg << manifest.config;
    }

    manifest.finished = utc_timestamp();
    manifest.t_s = trace.t_s;
    manifest.n = trace.n;
    manifest.warmup = trace.warmup;
    manifest.i_m = trace.i_m;
    manifest.steps = trace.size();
    manifest.schedule = trace.schedule;
    write_manifest(manifest, dir / "manifest.json");

    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    out << "algorithm " << to_string(config.algorithm) << ", " << trace.size() << " steps, "
        << seconds << " s wall\n"
        << summary_table(report) << "outputs written to " << dir.string() << '\n';
    return kExitOk;
}

int do_report(const std::string& out_dir, std::ostream& out)
{
    const fs::path dir = out_dir;
    const auto problems = verify_manifest(dir);
    if (!problems.empty()) {
        for (const auto& p : problems)
            out << "manifest: " << p << '\n';
        return kExitIo;
    }
    const auto config = parse_config_text(read_manifest(dir / "manifest.json").config);
    const SimTrace trace = read_trace(dir);
    out << summary_table(segment_report(trace, trace.schedule, {0, config.settle}));
    return kExitOk;
}

} // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"MMC-HVDC modulation simulator", "mmcsim"};
    app.require_subcommand(1);

    RunFlags flags;
    auto* run = app.add_subcommand("run", "simulate a scenario and write outputs");
    run->add_option("--config", flags.config, "scenario config file");
    run->add_option("--algorithm", flags.algorithm, "modulation algorithm")
        ->check(CLI::IsMember({"v1f2", "v1fc"}));
    run->add_option("--out-dir", flags.out_dir, "output directory");
    run->add_option("--duration", flags.duration, "simulated time [s]");
    run->add_option("--profile", flags.profile, "base profile")
        ->check(CLI::IsMember({"paper", "fast"}));
    run->add_option("--dc-model", flags.dc_model, "DC side model")
        ->check(CLI::IsMember({"stiff", "piline"}));

    std::string report_dir;
    auto* report = app.add_subcommand("report", "recompute the summary from a run directory");
    report->add_option("--out-dir", report_dir, "run directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (run->parsed())
            return do_run(flags, out);
        return do_report(report_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ContractViolation& e) {
        err << "invalid scenario: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DivergenceError& e) {
        err << e.what() << '\n';
        return kExitDivergence;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
}

} // namespace mmc
