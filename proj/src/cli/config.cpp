#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "spectral/cli.hpp"
#include "spectral/errors.hpp"

namespace spectral::cli {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw ValidationError("config: " + key + " expects a number, got '" + v + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long x = 0;
    try {
        x = std::stol(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) throw ValidationError("config: " + key + " expects an integer, got '" + v + "'");
    return x;
}

fs::path resolve(const fs::path& base, const std::string& v) {
    const fs::path p(v);
    return p.is_absolute() ? p : base / p;
}

}  // namespace

void RunConfig::validate() const {
    try {
        window.validate();
        afe.validate();
    } catch (const DomainError& e) {
        throw ValidationError(std::string("config: ") + e.what());
    }
    if (!(K > 0.0) || !(G > 0.0)) throw ValidationError("config: trace_K and trace_G must be positive");
    if (threads < 1) throw ValidationError("config: threads must be >= 1");
    if (l_list.empty()) throw ValidationError("config: l_list is empty");
    for (long l : l_list)
        if (l < 1) throw ValidationError("config: every l must be >= 1");
    for (double d : delta_list)
        if (!(d > 0.0 && d < 1.0)) throw ValidationError("config: every delta must lie in (0, 1)");
    for (const auto& [m, n] : trace_pairs)
        if (m < 1 || n < 1) throw ValidationError("config: trace pairs must be positive");
    if (!(empirical_T > 0.0)) throw ValidationError("config: empirical_T must be positive");
    if (dataset_url) {
        if (!dataset_sha256) throw ValidationError("config: dataset_url needs dataset_sha256");
    } else if (dataset_path.empty()) {
        throw ValidationError("config: dataset_path (or dataset_url + dataset_sha256) is required");
    } else if (!fs::is_regular_file(dataset_path)) {
        throw ValidationError("config: dataset_path " + dataset_path.string() + " does not exist");
    }
}

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ValidationError("config: duplicate key " + key);

        if (key == "dataset_path") {
            cfg.dataset_path = resolve(base_dir, val);
        } else if (key == "dataset_url") {
            cfg.dataset_url = val;
        } else if (key == "dataset_sha256") {
            cfg.dataset_sha256 = val;
        } else if (key == "T") {
            cfg.window.T = to_double(key, val);
        } else if (key == "H") {
            cfg.window.H = to_double(key, val);
        } else if (key == "G") {
            cfg.window.G = to_double(key, val);
        } else if (key == "trace_K") {
            cfg.K = to_double(key, val);
        } else if (key == "trace_G") {
            cfg.G = to_double(key, val);
        } else if (key == "l_list") {
            cfg.l_list.clear();
            for (const auto& s : split(val, ',')) cfg.l_list.push_back(to_long(key, s));
        } else if (key == "delta_list") {
            cfg.delta_list.clear();
            for (const auto& s : split(val, ',')) cfg.delta_list.push_back(to_double(key, s));
        } else if (key == "trace_pairs") {
            cfg.trace_pairs.clear();
            for (const auto& s : split(val, ',')) {
                const auto parts = split(s, ':');
                if (parts.size() != 2) throw ValidationError("config: trace_pairs entries look like m:n");
                cfg.trace_pairs.emplace_back(to_long(key, parts[0]), to_long(key, parts[1]));
            }
        } else if (key == "empirical_T") {
            cfg.empirical_T = to_double(key, val);
        } else if (key == "afe_delta") {
            cfg.afe.delta = to_double(key, val);
        } else if (key == "afe_kernel") {
            if (val == "gaussian") {
                cfg.afe.kernel = lvalues::Kernel::gaussian;
            } else if (val == "quartic") {
                cfg.afe.kernel = lvalues::Kernel::quartic;
            } else {
                throw ValidationError("config: afe_kernel is gaussian or quartic");
            }
        } else if (key == "afe_kernel_b") {
            cfg.afe.kernel_b = to_double(key, val);
        } else if (key == "afe_tail_cut") {
            cfg.afe.tail_cut = to_double(key, val);
        } else if (key == "afe_quad_tol") {
            cfg.afe.quad.target_abs_tol = to_double(key, val);
        } else if (key == "afe_quad_refinements") {
            cfg.afe.quad.max_refinements = static_cast<int>(to_long(key, val));
        } else if (key == "output_dir") {
            cfg.output_dir = resolve(base_dir, val);
        } else if (key == "cache_dir") {
            cfg.cache_dir = resolve(base_dir, val);
        } else if (key == "threads") {
            cfg.threads = static_cast<int>(to_long(key, val));
        } else {
            throw ValidationError("config: unknown key " + key);
        }
    }
    if (!seen.count("output_dir")) cfg.output_dir = base_dir / "out";
    if (!seen.count("cache_dir")) cfg.cache_dir = base_dir / "cache";
    if (const char* env = std::getenv("SPECTRAL_MOMENTS_CACHE"); env && *env) cfg.cache_dir = env;
    if (cfg.trace_pairs.empty()) {
        for (int m = 1; m <= 3; ++m)
            for (int n = 1; n <= 3; ++n) cfg.trace_pairs.emplace_back(m, n);
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config: cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto cfg = parse_config(ss.str(), fs::absolute(path).parent_path());
    cfg.source = path;
    return cfg;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const DomainError*>(&e)) return 2;
    if (dynamic_cast<const AccuracyError*>(&e) || dynamic_cast<const RangeError*>(&e)) return 3;
    if (dynamic_cast<const CapacityError*>(&e)) return 4;
    return 1;
}

}  // namespace spectral::cli
