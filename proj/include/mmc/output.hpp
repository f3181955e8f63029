#pragma once

// Run outputs: per-phase time-series CSV, per-segment summary, plot-ready
// figure data and a manifest listing every file with its row count.

#include "mmc/hvdc_sim.hpp"
#include "mmc/metrics.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mmc {

/// Significant digits used for every floating-point value written to CSV.
constexpr int kCsvDigits = 9;

std::string format_number(double value);

/// Rounds every floating-point sample to what the CSV files will hold, so that
/// metrics computed before writing equal metrics recomputed from the files.
void quantize(SimTrace& trace);

/// Header: t,phase,i_ref,i,i_z,v_s,nsw_max,vC_1..vC_2n,u_1..u_2n
std::string phase_csv_header(int n);
char phase_name(int phase);
std::string phase_file_name(int phase);

/// Returns the number of data rows written.
long write_phase_csv(const SimTrace& trace, int phase, const std::filesystem::path& path);

std::string summary_table(const std::vector<SegmentMetrics>& report);
long write_summary_csv(const std::vector<SegmentMetrics>& report, const std::filesystem::path& path);

struct OutputFile {
    std::string name;
    long rows;
};

struct RunManifest {
    std::string config; // effective configuration, config-file syntax
    std::string version;
    std::string started; // ISO-8601 UTC
    std::string finished;
    double t_s = 0.0;
    int n = 0;
    double warmup = 0.0;
    double i_m = 0.0;
    long steps = 0;
    NswSchedule schedule;
    std::vector<OutputFile> files;
};

std::string utc_timestamp();

/// Figure data: fig4 per-SM switching frequency per segment, fig5 phase-A
/// capacitor voltages, fig6 phase-A current and reference, fig7 phase-A
/// circulating current. Time series keep every `stride`-th record.
std::vector<OutputFile> write_figure_data(const SimTrace& trace,
                                          const std::vector<SegmentMetrics>& report,
                                          const std::filesystem::path& dir, int stride = 4);

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// Checks that every listed file exists and holds the listed number of data rows.
/// Returns the problems found; empty when the run directory is complete.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

/// Rebuilds a trace from a run directory (manifest + per-phase CSV files).
SimTrace read_trace(const std::filesystem::path& dir);

} // namespace mmc
