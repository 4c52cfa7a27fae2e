#include "branchlab/io.hpp"

#include "branchlab/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace branchlab {

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size())
        throw Error(Errc::InvalidConfig, "key '" + key + "' expects a number, got '" + text + "'");
    return v;
}

}  // namespace

ConfigMap parse_config(std::istream& in)
{
    ConfigMap out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error(Errc::InvalidConfig, "line " + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigMap load_config_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::IoError, "cannot open config file " + path.string());
    return parse_config(in);
}

double config_double(const ConfigMap& cfg, const std::string& key, double fallback)
{
    const auto it = cfg.find(key);
    return it == cfg.end() ? fallback : to_double(key, it->second);
}

std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback)
{
    const auto it = cfg.find(key);
    if (it == cfg.end())
        return fallback;
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(it->second, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != it->second.size() || it->second.front() == '-')
        throw Error(Errc::InvalidConfig, "key '" + key + "' expects a nonnegative integer");
    return v;
}

std::vector<double> config_list(const ConfigMap& cfg, const std::string& key, std::vector<double> fallback)
{
    const auto it = cfg.find(key);
    if (it == cfg.end())
        return fallback;
    if (it->second.find(':') != std::string::npos)
        return parse_grid(it->second);
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(to_double(key, trim(item)));
    return out;
}

std::vector<double> parse_grid(const std::string& text)
{
    if (text.find(',') != std::string::npos) {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ','))
            out.push_back(to_double("grid", trim(item)));
        return out;
    }
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':'))
        parts.push_back(to_double("grid", trim(item)));
    if (parts.size() == 1)
        return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw Error(Errc::InvalidConfig, "grid must be lo:hi:step with step > 0 and hi >= lo");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((parts[1] - parts[0]) / parts[2] + 0.5));
    for (long i = 0; i <= n; ++i)
        out.push_back(parts[0] + parts[2] * static_cast<double>(i));
    return out;
}

std::string manifest_to_json(const Manifest& m)
{
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["seed"] = m.seed;
    j["version"] = m.version;
    j["wall_seconds"] = m.wall_seconds;
    j["config"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m.config)
        j["config"][k] = v;
    j["truncated_replicas"] = m.truncated_replicas;
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text)
{
    Manifest m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.command = j.at("command").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::string>();
        m.wall_seconds = j.at("wall_seconds").get<double>();
        for (const auto& [k, v] : j.at("config").items())
            m.config[k] = v.get<std::string>();
        m.truncated_replicas = j.at("truncated_replicas").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidConfig, std::string("malformed manifest: ") + e.what());
    }
    return m;
}

std::string format_cell(const Cell& c)
{
    struct Visitor {
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(double v) const
        {
            if (std::isinf(v))
                return v < 0 ? "-inf" : "inf";
            return format_double(v);
        }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(const ExtReal& v) const { return v.str(); }
    };
    return std::visit(Visitor{}, c);
}

void write_csv(std::ostream& out, const Table& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::string cell = format_cell(row[i]);
            if (cell.find_first_of(",\"\n") != std::string::npos) {
                std::string quoted = "\"";
                for (char ch : cell)
                    quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                cell = quoted + "\"";
            }
            out << (i ? "," : "") << cell;
        }
        out << '\n';
    }
}

std::string render_summary(const Table& table, const std::vector<std::string>& summary)
{
    std::ostringstream os;
    if (table.rows.empty()) {
        os << "no data\n";
        return os.str();
    }
    for (const auto& line : summary)
        os << line << '\n';
    return os.str();
}

void emit_report(const Table& table, const std::vector<std::string>& summary, const std::filesystem::path& csv_path,
                 const std::filesystem::path& summary_path)
{
    std::ofstream csv(csv_path);
    if (!csv)
        throw Error(Errc::IoError, "cannot write " + csv_path.string());
    write_csv(csv, table);
    std::ofstream txt(summary_path);
    if (!txt)
        throw Error(Errc::IoError, "cannot write " + summary_path.string());
    txt << render_summary(table, summary);
}

}  // namespace branchlab
