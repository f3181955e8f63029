#include "mmc/output.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mmc {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*g", kCsvDigits, value);
    return buf;
}

namespace {

double round_trip(double value)
{
    return std::strtod(format_number(value).c_str(), nullptr);
}

template <typename Derived>
void quantize_all(Eigen::DenseBase<Derived>& values)
{
    values = values.derived().unaryExpr([](double v) { return round_trip(v); });
}

std::ofstream open_for_write(const fs::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

long count_data_rows(const fs::path& path)
{
    std::ifstream in(path);
    long lines = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            ++lines;
    return lines > 0 ? lines - 1 : 0;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        fields.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos)
            break;
        start = pos + 1;
    }
    return fields;
}

} // namespace

void quantize(SimTrace& trace)
{
    quantize_all(trace.time);
    quantize_all(trace.v_dc);
    for (auto& ph : trace.phases) {
        quantize_all(ph.i_ref);
        quantize_all(ph.i);
        quantize_all(ph.i_z);
        quantize_all(ph.v_s);
        quantize_all(ph.v_c);
    }
}

char phase_name(int phase)
{
    return static_cast<char>('a' + phase);
}

std::string phase_file_name(int phase)
{
    return std::string("phase_") + phase_name(phase) + ".csv";
}

std::string phase_csv_header(int n)
{
    std::string h = "t,phase,i_ref,i,i_z,v_s,nsw_max";
    for (int j = 1; j <= 2 * n; ++j)
        h += ",vC_" + std::to_string(j);
    for (int j = 1; j <= 2 * n; ++j)
        h += ",u_" + std::to_string(j);
    return h;
}

long write_phase_csv(const SimTrace& trace, int phase, const fs::path& path)
{
    auto out = open_for_write(path);
    const auto& ph = trace.phases[phase];
    const int sms = 2 * trace.n;
    out << phase_csv_header(trace.n) << '\n';
    std::string line;
    for (long k = 0; k < trace.size(); ++k) {
        line.clear();
        line += format_number(trace.time(k));
        line += ',';
        line += phase_name(phase);
        for (double v : {ph.i_ref(k), ph.i(k), ph.i_z(k), ph.v_s(k)}) {
            line += ',';
            line += format_number(v);
        }
        line += ',';
        line += std::to_string(trace.nsw_max(k));
        for (int j = 0; j < sms; ++j) {
            line += ',';
            line += format_number(ph.v_c(k, j));
        }
        for (int j = 0; j < sms; ++j) {
            line += ',';
            line += ph.u(k, j) ? '1' : '0';
        }
        line += '\n';
        out << line;
    }
    return trace.size();
}

std::string summary_table(const std::vector<SegmentMetrics>& report)
{
    std::ostringstream os;
    os << std::fixed;
    os << "segment  t_start   t_end  nsw_max   f_s_mean[Hz]  reduction[%]  ripple[%]  iz_ratio[%]  "
          "rmse[%]\n";
    for (const auto& m : report) {
        os << std::setw(7) << m.id << std::setprecision(3) << std::setw(9) << m.t_start
           << std::setw(8) << m.t_end << std::setw(9) << m.n_sw_max << std::setprecision(1)
           << std::setw(15) << m.f_s_mean << std::setprecision(2) << std::setw(14)
           << m.reduction_pct << std::setprecision(3) << std::setw(11) << m.ripple_pct.mean()
           << std::setprecision(2) << std::setw(13) << m.izm_ratio << std::setw(9)
           << m.tracking_rmse_pct << '\n';
    }
    return os.str();
}

long write_summary_csv(const std::vector<SegmentMetrics>& report, const fs::path& path)
{
    auto out = open_for_write(path);
    out << "segment,t_start,t_end,nsw_max,f_s_mean,reduction_pct,ripple_pct_mean,ripple_pct_min,"
           "ripple_pct_max,izm_ratio_pct,tracking_rmse_pct,mean_transitions\n";
    for (const auto& m : report) {
        out << m.id << ',' << format_number(m.t_start) << ',' << format_number(m.t_end) << ','
            << m.n_sw_max << ',' << format_number(m.f_s_mean) << ','
            << format_number(m.reduction_pct) << ',' << format_number(m.ripple_pct.mean()) << ','
            << format_number(m.ripple_pct.minCoeff()) << ','
            << format_number(m.ripple_pct.maxCoeff()) << ',' << format_number(m.izm_ratio) << ','
            << format_number(m.tracking_rmse_pct) << ',' << format_number(m.mean_transitions)
            << '\n';
    }
    return static_cast<long>(report.size());
}

std::string utc_timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<OutputFile> write_figure_data(const SimTrace& trace,
                                          const std::vector<SegmentMetrics>& report,
                                          const fs::path& dir, int stride)
{
    require(stride >= 1, "write_figure_data: stride must be >= 1");
    std::vector<OutputFile> files;
    const int sms = 2 * trace.n;
    const auto& a = trace.phases[0];

    {
        auto out = open_for_write(dir / "fig4_switching_frequency.csv");
        out << "segment,t_start,t_end,nsw_max";
        for (int j = 1; j <= sms; ++j)
            out << ",f_s_" << j;
        out << ",f_s_mean,reduction_pct\n";
        for (const auto& m : report) {
            out << m.id << ',' << format_number(m.t_start) << ',' << format_number(m.t_end) << ','
                << m.n_sw_max;
            for (int j = 0; j < sms; ++j)
                out << ',' << format_number(m.f_s_per_sm(j));
            out << ',' << format_number(m.f_s_mean) << ',' << format_number(m.reduction_pct)
                << '\n';
        }
        files.push_back({"fig4_switching_frequency.csv", static_cast<long>(report.size())});
    }

    long rows = 0;
    {
        auto out = open_for_write(dir / "fig5_capacitor_voltages.csv");
        out << "t,nsw_max";
        for (int j = 1; j <= sms; ++j)
            out << ",vC_" << j;
        out << '\n';
        for (long k = 0; k < trace.size(); k += stride, ++rows) {
            out << format_number(trace.time(k)) << ',' << trace.nsw_max(k);
            for (int j = 0; j < sms; ++j)
                out << ',' << format_number(a.v_c(k, j));
            out << '\n';
        }
        files.push_back({"fig5_capacitor_voltages.csv", rows});
    }
    {
        auto out = open_for_write(dir / "fig6_ac_current.csv");
        out << "t,nsw_max,i_ref,i\n";
        for (long k = 0; k < trace.size(); k += stride)
            out << format_number(trace.time(k)) << ',' << trace.nsw_max(k) << ','
                << format_number(a.i_ref(k)) << ',' << format_number(a.i(k)) << '\n';
        files.push_back({"fig6_ac_current.csv", rows});
    }
    {
        auto out = open_for_write(dir / "fig7_circulating_current.csv");
        out << "t,nsw_max,i_z\n";
        for (long k = 0; k < trace.size(); k += stride)
            out << format_number(trace.time(k)) << ',' << trace.nsw_max(k) << ','
                << format_number(a.i_z(k)) << '\n';
        files.push_back({"fig7_circulating_current.csv", rows});
    }
    return files;
}

void write_manifest(const RunManifest& m, const fs::path& path)
{
    json j;
    j["version"] = m.version;
    j["started"] = m.started;
    j["finished"] = m.finished;
    j["config"] = m.config;
    j["trace"] = {{"t_s", m.t_s}, {"n", m.n}, {"warmup", m.warmup}, {"i_m", m.i_m},
                  {"steps", m.steps}};
    json schedule = json::array();
    for (const auto& s : m.schedule.segments)
        schedule.push_back({{"t_start", s.t_start}, {"t_end", s.t_end}, {"n_sw_max", s.n_sw_max}});
    j["trace"]["schedule"] = schedule;
    json files = json::array();
    for (const auto& f : m.files)
        files.push_back({{"name", f.name}, {"rows", f.rows}});
    j["files"] = files;
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
}

RunManifest read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read manifest '" + path.string() + "'");
    const json j = json::parse(in);
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    m.config = j.at("config").get<std::string>();
    const auto& t = j.at("trace");
    m.t_s = t.at("t_s").get<double>();
    m.n = t.at("n").get<int>();
    m.warmup = t.at("warmup").get<double>();
    m.i_m = t.at("i_m").get<double>();
    m.steps = t.at("steps").get<long>();
    for (const auto& s : t.at("schedule"))
        m.schedule.segments.push_back(
            {s.at("t_start").get<double>(), s.at("t_end").get<double>(), s.at("n_sw_max").get<int>()});
    for (const auto& f : j.at("files"))
        m.files.push_back({f.at("name").get<std::string>(), f.at("rows").get<long>()});
    return m;
}

std::vector<std::string> verify_manifest(const fs::path& dir)
{
    std::vector<std::string> problems;
    const auto m = read_manifest(dir / "manifest.json");
    for (const auto& f : m.files) {
        const auto path = dir / f.name;
        if (!fs::exists(path)) {
            problems.push_back(f.name + ": missing");
            continue;
        }
        const long rows = count_data_rows(path);
        if (rows != f.rows)
            problems.push_back(f.name + ": " + std::to_string(rows) + " rows, manifest lists " +
                               std::to_string(f.rows));
    }
    return problems;
}

SimTrace read_trace(const fs::path& dir)
{
    const auto m = read_manifest(dir / "manifest.json");
    SimTrace trace;
    trace.t_s = m.t_s;
    trace.n = m.n;
    trace.warmup = m.warmup;
    trace.i_m = m.i_m;
    trace.schedule = m.schedule;
    trace.time.resize(m.steps);
    trace.nsw_max.resize(m.steps);
    trace.v_dc = Eigen::VectorXd::Constant(m.steps, std::numeric_limits<double>::quiet_NaN());

    const int sms = 2 * m.n;
    for (int phase = 0; phase < kPhases; ++phase) {
        auto& ph = trace.phases[phase];
        ph.resize(m.steps, m.n);
        std::ifstream in(dir / phase_file_name(phase));
        if (!in)
            throw std::runtime_error("cannot read '" + phase_file_name(phase) + "'");
        std::string line;
        std::getline(in, line);
        if (line != phase_csv_header(m.n))
            throw std::runtime_error(phase_file_name(phase) + ": unexpected header");
        for (long k = 0; k < m.steps; ++k) {
            if (!std::getline(in, line))
                throw std::runtime_error(phase_file_name(phase) + ": truncated");
            const auto f = split(line, ',');
            if (static_cast<int>(f.size()) != 7 + 2 * sms)
                throw std::runtime_error(phase_file_name(phase) + ": bad column count at row " +
                                         std::to_string(k + 1));
            const auto num = [&](std::size_t c) { return std::strtod(f[c].c_str(), nullptr); };
            trace.time(k) = num(0);
            ph.i_ref(k) = num(2);
            ph.i(k) = num(3);
            ph.i_z(k) = num(4);
            ph.v_s(k) = num(5);
            trace.nsw_max(k) = std::stoi(f[6]);
            for (int j = 0; j < sms; ++j) {
                ph.v_c(k, j) = num(7 + static_cast<std::size_t>(j));
                ph.u(k, j) = f[7 + static_cast<std::size_t>(sms + j)] == "1" ? 1 : 0;
            }
        }
        Eigen::RowVectorXi before = Eigen::RowVectorXi::Zero(sms);
        for (long k = 0; k < m.steps; ++k) {
            const Eigen::RowVectorXi now = ph.u.row(k).cast<int>();
            const Eigen::RowVectorXi diff = (now - before).cwiseAbs();
            ph.transitions_upper(k) = diff.head(m.n).sum();
            ph.transitions_lower(k) = diff.tail(m.n).sum();
            before = now;
        }
    }
    return trace;
}

} // namespace mmc
