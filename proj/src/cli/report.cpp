#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "spectral/cli.hpp"
#include "spectral/errors.hpp"

namespace spectral::cli {

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string cell(const Json& v) {
    if (v.is_null()) return "";
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_number()) return num(v.get<double>());
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

void flatten(const Json& j, const std::string& prefix, std::vector<std::pair<std::string, Json>>& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) flatten(it.value(), prefix + "." + it.key(), out);
    } else {
        out.emplace_back(prefix, j);
    }
}

std::vector<std::pair<std::string, Json>> row_of(const Record& r) {
    std::vector<std::pair<std::string, Json>> row;
    row.emplace_back("operation", r.operation);
    row.emplace_back("fingerprint", r.fingerprint);
    flatten(r.params, "params", row);
    flatten(r.outputs, "outputs", row);
    flatten(r.tolerances, "tolerances", row);
    return row;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Error("report: cannot write " + path.string());
}

using Series = std::vector<std::pair<double, double>>;

std::string two_column(const std::string& header, const Series& s) {
    std::ostringstream os;
    os << "# " << header << '\n';
    for (const auto& [x, y] : s) os << num(x) << ' ' << num(y) << '\n';
    return os.str();
}

double out_d(const Record& r, const char* key) { return r.outputs.at(key).get<double>(); }

std::map<std::string, std::pair<std::string, Series>> plot_series(const PipelineResult& res) {
    std::map<std::string, std::pair<std::string, Series>> files;
    const auto& recs = res.records;
    switch (res.command) {
        case Command::validate:
            for (const auto& r : recs) {
                files["weyl"].first = "window_max weyl_count";
                files["weyl"].second.emplace_back(out_d(r, "window_max"), out_d(r, "weyl_count"));
            }
            break;
        case Command::lvalues:
            files["central_values"].first = "kappa L(1/2)";
            files["alpha"].first = "kappa alpha";
            for (const auto& r : recs) {
                files["central_values"].second.emplace_back(out_d(r, "kappa"), out_d(r, "value"));
                files["alpha"].second.emplace_back(out_d(r, "kappa"), out_d(r, "alpha"));
            }
            break;
        case Command::trace:
            files["trace_residual"].first = "index relative_residual";
            for (std::size_t i = 0; i < recs.size(); ++i) {
                files["trace_residual"].second.emplace_back(static_cast<double>(i + 1),
                                                            out_d(recs[i], "relative_residual"));
            }
            break;
        case Command::moments: {
            for (const auto& r : recs) {
                const std::string name = "ratio_order" + std::to_string(r.params.at("order").get<int>());
                files[name].first = "l spectral/main_term";
                files[name].second.emplace_back(r.params.at("l").get<double>(), out_d(r, "ratio"));
            }
            // Omega over a grid covering the window and both transition zones
            const auto& w = recs.front().params.at("window");
            const moments::WeightSpec spec{w.at("T").get<double>(), w.at("H").get<double>(), w.at("G").get<double>()};
            auto& om = files["omega"];
            om.first = "r Omega(r)";
            const double hi = spec.T + spec.H + 8 * spec.G;
            const int n = 400;
            for (int i = 0; i <= n; ++i) {
                const double r = hi * i / n;
                om.second.emplace_back(r, moments::weight_omega(r, spec));
            }
            break;
        }
        case Command::explicit_formula:
            for (const auto& r : recs) {
                const std::string name = "terms_l" + std::to_string(r.params.at("l").get<long>());
                files[name].first = "v R_v";
                for (int v = 1; v <= 7; ++v) files[name].second.emplace_back(v, out_d(r, ("R" + std::to_string(v)).c_str()));
            }
            break;
        case Command::mollify:
        case Command::nonvanishing:
            files["bound"].first = "delta nonvanishing_bound";
            files["theoretical"].first = "delta delta/(1+delta)";
            for (const auto& r : recs) {
                files["bound"].second.emplace_back(out_d(r, "delta_used"), out_d(r, "bound"));
                files["theoretical"].second.emplace_back(out_d(r, "delta_used"), out_d(r, "theoretical"));
            }
            break;
    }
    return files;
}

}  // namespace

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    if (name == "plotdata") return Format::plotdata;
    throw ValidationError("unknown format '" + name + "' (csv, json, plotdata)");
}

std::string to_csv(const std::vector<Record>& records) {
    std::vector<std::string> columns;
    std::map<std::string, bool> known;
    std::vector<std::vector<std::pair<std::string, Json>>> rows;
    for (const auto& r : records) {
        rows.push_back(row_of(r));
        for (const auto& [k, v] : rows.back())
            if (!known[k]) {
                known[k] = true;
                columns.push_back(k);
            }
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& row : rows) {
        std::map<std::string, const Json*> by;
        for (const auto& [k, v] : row) by[k] = &v;
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i) os << ',';
            const auto it = by.find(columns[i]);
            if (it != by.end()) os << cell(*it->second);
        }
        os << '\n';
    }
    return os.str();
}

Json to_json_array(const std::vector<Record>& records) {
    Json a = Json::array();
    for (const auto& r : records) a.push_back(r.to_json());
    return a;
}

std::vector<Record> records_from_json(const Json& array) {
    std::vector<Record> out;
    for (const auto& j : array) out.push_back(Record::from_json(j));
    return out;
}

std::vector<fs::path> emit_report(const PipelineResult& result, Format format, const fs::path& output_dir) {
    if (result.records.empty()) {
        throw CapacityError("report: no records for command " + command_name(result.command));
    }
    fs::create_directories(output_dir);
    const std::string stem = command_name(result.command);
    std::vector<fs::path> written;
    switch (format) {
        case Format::csv: {
            const auto p = output_dir / (stem + ".csv");
            write_file(p, to_csv(result.records));
            written.push_back(p);
            break;
        }
        case Format::json: {
            const auto p = output_dir / (stem + ".json");
            write_file(p, to_json_array(result.records).dump(2) + "\n");
            written.push_back(p);
            break;
        }
        case Format::plotdata:
            for (const auto& [name, data] : plot_series(result)) {
                const auto p = output_dir / (stem + "_" + name + ".dat");
                write_file(p, two_column(data.first, data.second));
                written.push_back(p);
            }
            break;
    }
    return written;
}

}  // namespace spectral::cli
