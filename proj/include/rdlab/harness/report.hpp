#pragma once

#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "rdlab/harness/config.hpp"

namespace rdlab::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "rdlab 1.0.0";
inline constexpr const char* kCsvHeader = "index_n,radius,statistic,value,stderr,samples";

class SchemaError : public Error {
public:
    using Error::Error;
};

/// One CSV line. index_n is the family index (inf for the limit) or, in
/// experiments without a family, the step size; radius is the ladder radius
/// or the datum scale where that is the swept quantity, else 0.
struct StatRow {
    double index_n = 0.0;
    double radius = 0.0;
    std::string statistic;
    double value = 0.0;
    double stderr_ = 0.0;
    long long samples = 0;

    bool operator==(const StatRow& other) const;
};

struct StatTable {
    std::string name;  // file stem
    std::vector<StatRow> rows;

    void add(double index_n, double radius, std::string statistic, double value, double stderr_, long long samples);
    bool operator==(const StatTable&) const = default;
};

struct Check {
    std::string name;
    bool hard = true;
    bool pass = false;
    std::string detail;

    bool operator==(const Check&) const = default;
};

struct ConvergenceReport {
    int schema_version = kSchemaVersion;
    std::string experiment;
    std::string config_hash;
    Json config;
    std::string code_version = kCodeVersion;
    double wall_clock_seconds = 0.0;
    std::deque<StatTable> tables;  // deque: table() references stay valid
    std::vector<Check> checks;
    Json verdicts = Json::object();

    StatTable& table(const std::string& name);
    const StatTable& table(const std::string& name) const;
    /// Value of the unique row matching (statistic, index_n, radius); throws otherwise.
    const StatRow& row(const std::string& table_name, const std::string& statistic, double index_n,
                       double radius = 0.0) const;
    void check(std::string name, bool pass, std::string detail, bool hard = true);
    bool passed() const;
    const Check* find_check(const std::string& name) const;

    bool operator==(const ConvergenceReport&) const = default;
};

/// Writes report.json, config.json (the resolved config) and one CSV per table.
void persist(const ConvergenceReport& report, const std::filesystem::path& directory);
/// Throws SchemaError on a version mismatch and Error on missing or malformed files.
ConvergenceReport load(const std::filesystem::path& directory);

/// True when the report's hash matches both its embedded config and the
/// config.json stored beside it (when a directory is given).
bool verify_config_hash(const ConvergenceReport& report);
bool verify_config_hash(const std::filesystem::path& directory);

std::string format_double(double v);

}  // namespace rdlab::harness
