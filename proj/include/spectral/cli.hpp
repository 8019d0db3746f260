#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spectral/lvalues.hpp"
#include "spectral/moments.hpp"

namespace spectral::cli {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr const char* kLibraryVersion = "1.0.0";

// ---------------------------------------------------------------- config

struct RunConfig {
    fs::path dataset_path;
    std::optional<std::string> dataset_url;
    std::optional<std::string> dataset_sha256;
    moments::WeightSpec window{18, 6, 2};
    double K = 16;                   // trace / explicit test function
    double G = 2;
    std::vector<long> l_list{1};
    std::vector<double> delta_list{0.3};
    std::vector<std::pair<std::int64_t, std::int64_t>> trace_pairs;
    double empirical_T = 25;
    lvalues::AfeConfig afe;
    fs::path output_dir = "out";
    fs::path cache_dir = "cache";
    int threads = 1;
    fs::path source;                 // the config file, for messages

    void validate() const;
};

// Flat key=value, '#' comments. Relative paths resolve against the config file's
// directory; SPECTRAL_MOMENTS_CACHE replaces cache_dir.
RunConfig parse_config(const std::string& text, const fs::path& base_dir);
RunConfig load_config(const fs::path& path);

// ---------------------------------------------------------------- digests

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

// ---------------------------------------------------------------- results store

struct Record {
    std::string operation;
    std::string fingerprint;    // sha256 of the canonical parameter object
    std::string inputs_digest;  // dataset digest
    Json params;
    Json outputs;
    Json tolerances;
    std::string timestamp;      // UTC, ISO 8601
    std::string version = kLibraryVersion;
    std::string digest;         // sha256 over every field above except timestamp

    std::string compute_digest() const;
    Json to_json() const;
    static Record from_json(const Json& j);
};

// One immutable file per record under <root>/records/<operation>/<fingerprint>.json.
// A record whose stored digest does not match its content is treated as absent.
class ResultsStore {
public:
    explicit ResultsStore(fs::path root);

    std::optional<Record> find(const std::string& operation, const std::string& fingerprint) const;
    // first writer wins; a valid existing record is never replaced
    void put(Record rec);
    const fs::path& root() const { return root_; }

private:
    fs::path path_for(const std::string& operation, const std::string& fingerprint) const;
    fs::path root_;
};

std::string fingerprint(const std::string& operation, const Json& params);

// ---------------------------------------------------------------- fetch

struct FetchResult {
    fs::path path;
    bool cache_hit = false;
};

// Downloads url into <cache_dir>/datasets/<sha256>.dat after checking the digest.
// Nothing is left behind on failure.
FetchResult fetch_dataset(const std::string& url, const std::string& sha256, const fs::path& cache_dir);

// ---------------------------------------------------------------- pipeline

enum class Command { validate, lvalues, trace, moments, explicit_formula, mollify, nonvanishing };

Command parse_command(const std::string& name);
std::string command_name(Command c);

struct PipelineResult {
    Command command = Command::validate;
    std::vector<Record> records;  // records of this command, in deterministic order
    int computed = 0;             // records of any operation computed in this run
    int cache_hits = 0;           // records of any operation served from the store
    std::vector<std::string> notes;
};

PipelineResult run_pipeline(const RunConfig& cfg, Command command);

// ---------------------------------------------------------------- reports

enum class Format { csv, json, plotdata };

Format parse_format(const std::string& name);

// Writes into cfg.output_dir; returns the files written. Timestamps appear in
// json only, so csv and plotdata are byte-stable across runs.
std::vector<fs::path> emit_report(const PipelineResult& result, Format format, const fs::path& output_dir);

std::string to_csv(const std::vector<Record>& records);
Json to_json_array(const std::vector<Record>& records);
std::vector<Record> records_from_json(const Json& array);

// ---------------------------------------------------------------- errors

// 0 ok, 2 validation, 3 accuracy, 4 capacity/completeness, 1 anything else
int exit_code_for(const std::exception& e);

}  // namespace spectral::cli
