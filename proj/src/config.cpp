#include "mmc/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace mmc {

namespace pt = boost::property_tree;

ConfigError::ConfigError(Kind kind, std::string key, const std::string& message)
    : std::runtime_error(key.empty() ? message : key + ": " + message), kind_(kind),
      key_(std::move(key))
{
}

std::string to_string(Algorithm algorithm)
{
    return algorithm == Algorithm::V1FC ? "v1fc" : "v1f2";
}

std::string to_string(DcModel model)
{
    return model == DcModel::PiLine ? "piline" : "stiff";
}

Algorithm parse_algorithm(std::string_view text)
{
    if (text == "v1fc")
        return Algorithm::V1FC;
    if (text == "v1f2")
        return Algorithm::V1F2;
    throw ConfigError(ConfigError::Kind::Invalid, "scenario.algorithm",
                      "expected v1f2 or v1fc, got '" + std::string(text) + "'");
}

DcModel parse_dc_model(std::string_view text)
{
    if (text == "stiff")
        return DcModel::StiffSource;
    if (text == "piline")
        return DcModel::PiLine;
    throw ConfigError(ConfigError::Kind::Invalid, "dc.model",
                      "expected stiff or piline, got '" + std::string(text) + "'");
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(const std::string& key, std::string_view text)
{
    text = trim(text);
    T value{};
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty())
        throw ConfigError(ConfigError::Kind::Syntax, key,
                          "not a valid number: '" + std::string(text) + "'");
    return value;
}

std::vector<int> parse_levels(const std::string& key, std::string_view text)
{
    std::vector<int> levels;
    while (true) {
        const auto comma = text.find(',');
        levels.push_back(parse_number<int>(key, text.substr(0, comma)));
        if (comma == std::string_view::npos)
            break;
        text.remove_prefix(comma + 1);
    }
    return levels;
}

using Setter = std::function<void(ScenarioConfig&, const std::string& key, const std::string&)>;

template <typename T>
Setter number(T ScenarioConfig::*field)
{
    return [field](ScenarioConfig& c, const std::string& key, const std::string& v) {
        c.*field = parse_number<T>(key, v);
    };
}

template <typename T>
Setter param(T SystemParams<double>::*field)
{
    return [field](ScenarioConfig& c, const std::string& key, const std::string& v) {
        c.params.*field = parse_number<T>(key, v);
    };
}

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"system.n", param(&SystemParams<double>::n)},
        {"system.v_dc", param(&SystemParams<double>::v_dc)},
        {"system.c", param(&SystemParams<double>::c)},
        {"system.l_arm", param(&SystemParams<double>::l_arm)},
        {"system.r", param(&SystemParams<double>::r)},
        {"system.l_grid", param(&SystemParams<double>::l_grid)},
        {"system.t_s", param(&SystemParams<double>::t_s)},
        {"system.f_grid", param(&SystemParams<double>::f_grid)},
        {"system.w", param(&SystemParams<double>::w)},
        {"system.w_z", param(&SystemParams<double>::w_z)},
        {"scenario.duration", number(&ScenarioConfig::duration)},
        {"scenario.warmup", number(&ScenarioConfig::warmup)},
        {"scenario.segment_length", number(&ScenarioConfig::segment_length)},
        {"scenario.p_ref", number(&ScenarioConfig::p_ref)},
        {"scenario.v_s_peak", number(&ScenarioConfig::v_s_peak)},
        {"scenario.energy_gain", number(&ScenarioConfig::energy_gain)},
        {"scenario.algorithm",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
             c.algorithm = parse_algorithm(trim(v));
         }},
        {"scenario.nsw_schedule",
         [](ScenarioConfig& c, const std::string& key, const std::string& v) {
             c.nsw_levels = parse_levels(key, v);
         }},
        {"dc.model",
         [](ScenarioConfig& c, const std::string&, const std::string& v) {
             c.dc_model = parse_dc_model(trim(v));
         }},
        {"dc.line_length", number(&ScenarioConfig::line_length)},
        {"dc.line_c", number(&ScenarioConfig::line_c)},
        {"dc.line_l", number(&ScenarioConfig::line_l)},
        {"metrics.settle", number(&ScenarioConfig::settle)},
    };
    return table;
}

void invalid_unless(bool ok, const char* key, const std::string& message)
{
    if (!ok)
        throw ConfigError(ConfigError::Kind::Invalid, key, message);
}

bool positive(double v)
{
    return std::isfinite(v) && v > 0;
}

bool non_negative(double v)
{
    return std::isfinite(v) && v >= 0;
}

} // namespace

void validate_config(ScenarioConfig& c)
{
    const auto& p = c.params;
    invalid_unless(p.n >= 1, "system.n", "must be >= 1");
    invalid_unless(positive(p.v_dc), "system.v_dc", "must be positive");
    invalid_unless(positive(p.c), "system.c", "must be positive");
    invalid_unless(positive(p.l_arm), "system.l_arm", "must be positive");
    invalid_unless(non_negative(p.r), "system.r", "must be non-negative");
    invalid_unless(positive(p.l_grid), "system.l_grid", "must be positive");
    invalid_unless(positive(p.t_s), "system.t_s", "must be positive");
    invalid_unless(positive(p.f_grid), "system.f_grid", "must be positive");
    invalid_unless(non_negative(p.w), "system.w", "must be non-negative");
    invalid_unless(non_negative(p.w_z), "system.w_z", "must be non-negative");

    invalid_unless(non_negative(c.warmup), "scenario.warmup", "must be non-negative");
    invalid_unless(std::isfinite(c.duration) && c.duration > c.warmup, "scenario.duration",
                   "must exceed scenario.warmup");
    const double ratio = c.duration / p.t_s;
    invalid_unless(std::abs(ratio - std::round(ratio)) <= 1e-9 * std::max(1.0, ratio),
                   "scenario.duration", "must be a multiple of system.t_s");
    invalid_unless(positive(c.segment_length), "scenario.segment_length", "must be positive");
    invalid_unless(std::isfinite(c.p_ref), "scenario.p_ref", "must be finite");
    invalid_unless(positive(c.v_s_peak), "scenario.v_s_peak", "must be positive");
    invalid_unless(non_negative(c.energy_gain), "scenario.energy_gain", "must be non-negative");
    invalid_unless(!c.nsw_levels.empty(), "scenario.nsw_schedule", "needs at least one level");
    for (int level : c.nsw_levels)
        invalid_unless(level >= 0 && level <= p.n, "scenario.nsw_schedule",
                       "level " + std::to_string(level) + " outside [0, " + std::to_string(p.n) + "]");
    invalid_unless(positive(c.line_length), "dc.line_length", "must be positive");
    invalid_unless(positive(c.line_c), "dc.line_c", "must be positive");
    invalid_unless(positive(c.line_l), "dc.line_l", "must be positive");
    invalid_unless(non_negative(c.settle), "metrics.settle", "must be non-negative");

    c.rebuild_schedule();
    c.validate();
}

ScenarioConfig parse_config_text(std::string_view text, const ScenarioConfig& base)
{
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(ConfigError::Kind::Syntax, "",
                          "line " + std::to_string(e.line()) + ": " + e.message());
    }

    ScenarioConfig config = base;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError(ConfigError::Kind::Invalid, section, "key outside any [section]");
        for (const auto& [name, value] : body) {
            const std::string key = section + "." + name;
            const auto it = setters().find(key);
            if (it == setters().end())
                throw ConfigError(ConfigError::Kind::Invalid, key, "unknown key");
            it->second(config, key, value.data());
        }
    }
    validate_config(config);
    return config;
}

ScenarioConfig parse_config(const std::filesystem::path& path, const ScenarioConfig& base)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError(ConfigError::Kind::MissingFile, "",
                          "cannot open config file '" + path.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), base);
}

std::string write_config(const ScenarioConfig& c)
{
    const auto num = [](double v) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    std::string levels;
    for (std::size_t k = 0; k < c.nsw_levels.size(); ++k)
        levels += (k ? "," : "") + std::to_string(c.nsw_levels[k]);

    const auto& p = c.params;
    std::ostringstream os;
    os << "[system]\n"
       << "n = " << p.n << "\n"
       << "v_dc = " << num(p.v_dc) << "\n"
       << "c = " << num(p.c) << "\n"
       << "l_arm = " << num(p.l_arm) << "\n"
       << "r = " << num(p.r) << "\n"
       << "l_grid = " << num(p.l_grid) << "\n"
       << "t_s = " << num(p.t_s) << "\n"
       << "f_grid = " << num(p.f_grid) << "\n"
       << "w = " << num(p.w) << "\n"
       << "w_z = " << num(p.w_z) << "\n\n"
       << "[scenario]\n"
       << "duration = " << num(c.duration) << "\n"
       << "warmup = " << num(c.warmup) << "\n"
       << "segment_length = " << num(c.segment_length) << "\n"
       << "p_ref = " << num(c.p_ref) << "\n"
       << "v_s_peak = " << num(c.v_s_peak) << "\n"
       << "algorithm = " << to_string(c.algorithm) << "\n"
       << "nsw_schedule = " << levels << "\n"
       << "energy_gain = " << num(c.energy_gain) << "\n\n"
       << "[dc]\n"
       << "model = " << to_string(c.dc_model) << "\n"
       << "line_length = " << num(c.line_length) << "\n"
       << "line_c = " << num(c.line_c) << "\n"
       << "line_l = " << num(c.line_l) << "\n\n"
       << "[metrics]\n"
       << "settle = " << num(c.settle) << "\n";
    return os.str();
}

} // namespace mmc
