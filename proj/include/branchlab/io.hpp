#pragma once

#include "branchlab/extreal.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace branchlab {

// Flat key=value configuration with dotted namespaces (sim.h_max=0.05).
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config(std::istream& in);
ConfigMap load_config_file(const std::filesystem::path& path);

double config_double(const ConfigMap& cfg, const std::string& key, double fallback);
std::uint64_t config_u64(const ConfigMap& cfg, const std::string& key, std::uint64_t fallback);
std::vector<double> config_list(const ConfigMap& cfg, const std::string& key, std::vector<double> fallback);

// "lo:hi:step" -> lo, lo+step, ..., hi (inclusive within half a step)
std::vector<double> parse_grid(const std::string& text);

struct Manifest {
    std::string command;
    ConfigMap config;
    std::uint64_t seed = 0;
    std::string version;
    double wall_seconds = 0.0;
    std::vector<std::string> truncated_replicas;
};

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);

using Cell = std::variant<std::string, double, std::int64_t, ExtReal>;

std::string format_cell(const Cell& c);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

void write_csv(std::ostream& out, const Table& table);


// Writes the long-format CSV and a plain-text summary next to it.
void emit_report(const Table& table, const std::vector<std::string>& summary, const std::filesystem::path& csv_path,
                 const std::filesystem::path& summary_path);

std::string render_summary(const Table& table, const std::vector<std::string>& summary);

}  // namespace branchlab
