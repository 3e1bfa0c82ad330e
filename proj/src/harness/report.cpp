#include "rdlab/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace rdlab::harness {

namespace {

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

double parse_double(const std::string& text, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size()) throw Error(where + ": malformed number '" + text + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("missing file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool StatRow::operator==(const StatRow& o) const {
    return same_number(index_n, o.index_n) && same_number(radius, o.radius) && statistic == o.statistic &&
           same_number(value, o.value) && same_number(stderr_, o.stderr_) && samples == o.samples;
}

void StatTable::add(double index_n, double radius, std::string statistic, double value, double stderr_,
                    long long samples) {
    if (statistic.find(',') != std::string::npos || statistic.find('\n') != std::string::npos) {
        throw Error("statistic names may not contain commas or newlines");
    }
    rows.push_back(StatRow{index_n, radius, std::move(statistic), value, stderr_, samples});
}

StatTable& ConvergenceReport::table(const std::string& name) {
    for (auto& t : tables) {
        if (t.name == name) return t;
    }
    tables.push_back(StatTable{name, {}});
    return tables.back();
}

const StatTable& ConvergenceReport::table(const std::string& name) const {
    for (const auto& t : tables) {
        if (t.name == name) return t;
    }
    throw Error("report has no table '" + name + "'");
}

const StatRow& ConvergenceReport::row(const std::string& table_name, const std::string& statistic, double index_n,
                                      double radius) const {
    const StatRow* hit = nullptr;
    for (const auto& r : table(table_name).rows) {
        if (r.statistic == statistic && same_number(r.index_n, index_n) && same_number(r.radius, radius)) {
            if (hit) throw Error("duplicate row " + statistic + " in " + table_name);
            hit = &r;
        }
    }
    if (!hit) {
        throw Error("no row " + statistic + " at n = " + format_double(index_n) + ", radius = " +
                    format_double(radius) + " in " + table_name);
    }
    return *hit;
}

void ConvergenceReport::check(std::string name, bool pass, std::string detail, bool hard) {
    checks.push_back(Check{std::move(name), hard, pass, std::move(detail)});
}

bool ConvergenceReport::passed() const {
    for (const auto& c : checks) {
        if (c.hard && !c.pass) return false;
    }
    return true;
}

const Check* ConvergenceReport::find_check(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

void persist(const ConvergenceReport& report, const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    Json meta;
    meta["schema_version"] = report.schema_version;
    meta["experiment"] = report.experiment;
    meta["config_hash"] = report.config_hash;
    meta["config"] = report.config;
    meta["code_version"] = report.code_version;
    meta["wall_clock_seconds"] = report.wall_clock_seconds;
    meta["passed"] = report.passed();
    meta["tables"] = Json::array();
    for (const auto& t : report.tables) meta["tables"].push_back(t.name);
    meta["checks"] = Json::array();
    for (const auto& c : report.checks) {
        meta["checks"].push_back({{"name", c.name}, {"hard", c.hard}, {"pass", c.pass}, {"detail", c.detail}});
    }
    meta["verdicts"] = report.verdicts;
    write_file(directory / "report.json", meta.dump(2) + "\n");
    write_file(directory / "config.json", report.config.dump(2) + "\n");

    for (const auto& t : report.tables) {
        std::string text = std::string(kCsvHeader) + "\n";
        for (const auto& r : t.rows) {
            text += format_double(r.index_n) + "," + format_double(r.radius) + "," + r.statistic + "," +
                    format_double(r.value) + "," + format_double(r.stderr_) + "," + std::to_string(r.samples) + "\n";
        }
        write_file(directory / (t.name + ".csv"), text);
    }
}

ConvergenceReport load(const std::filesystem::path& directory) {
    const auto meta_path = directory / "report.json";
    Json meta;
    try {
        meta = Json::parse(read_file(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("schema_version") || !meta["schema_version"].is_number_integer()) {
        throw SchemaError(meta_path.string() + ": no schema_version");
    }
    const int version = meta["schema_version"].get<int>();
    if (version != kSchemaVersion) {
        throw SchemaError(meta_path.string() + ": schema version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kSchemaVersion) + ")");
    }
    ConvergenceReport report;
    try {
        report.experiment = meta.at("experiment").get<std::string>();
        report.config_hash = meta.at("config_hash").get<std::string>();
        report.config = meta.at("config");
        report.code_version = meta.at("code_version").get<std::string>();
        report.wall_clock_seconds = meta.at("wall_clock_seconds").get<double>();
        report.verdicts = meta.at("verdicts");
        for (const auto& c : meta.at("checks")) {
            report.checks.push_back(Check{c.at("name").get<std::string>(), c.at("hard").get<bool>(),
                                          c.at("pass").get<bool>(), c.at("detail").get<std::string>()});
        }
        for (const auto& name : meta.at("tables")) report.tables.push_back(StatTable{name.get<std::string>(), {}});
    } catch (const nlohmann::json::exception& e) {
        throw Error(meta_path.string() + ": " + e.what());
    }

    for (auto& t : report.tables) {
        const auto path = directory / (t.name + ".csv");
        std::istringstream in(read_file(path));
        std::string line;
        if (!std::getline(in, line) || line != kCsvHeader) throw Error(path.string() + ": bad header");
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            const auto where = path.string() + ":" + std::to_string(lineno);
            const auto f = split_csv(line);
            if (f.size() != 6) throw Error(where + ": expected 6 fields");
            StatRow r;
            r.index_n = parse_double(f[0], where);
            r.radius = parse_double(f[1], where);
            r.statistic = f[2];
            r.value = parse_double(f[3], where);
            r.stderr_ = parse_double(f[4], where);
            r.samples = static_cast<long long>(parse_double(f[5], where));
            t.rows.push_back(std::move(r));
        }
    }
    return report;
}

bool verify_config_hash(const ConvergenceReport& report) { return config_hash(report.config) == report.config_hash; }

bool verify_config_hash(const std::filesystem::path& directory) {
    const auto report = load(directory);
    const Json stored = Json::parse(read_file(directory / "config.json"));
    return verify_config_hash(report) && config_hash(stored) == report.config_hash;
}

}  // namespace rdlab::harness
