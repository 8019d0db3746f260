#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "spectral/cli.hpp"
#include "spectral/errors.hpp"

namespace spectral::cli {

std::string sha256_hex(const std::string& bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: OpenSSL digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str());
}

std::string fingerprint(const std::string& operation, const Json& params) {
    return sha256_hex(operation + "\n" + params.dump() + "\n" + kLibraryVersion);
}

std::string Record::compute_digest() const {
    Json j;
    j["operation"] = operation;
    j["fingerprint"] = fingerprint;
    j["inputs_digest"] = inputs_digest;
    j["params"] = params;
    j["outputs"] = outputs;
    j["tolerances"] = tolerances;
    j["version"] = version;
    return sha256_hex(j.dump());
}

Json Record::to_json() const {
    Json j;
    j["operation"] = operation;
    j["fingerprint"] = fingerprint;
    j["inputs_digest"] = inputs_digest;
    j["params"] = params;
    j["outputs"] = outputs;
    j["tolerances"] = tolerances;
    j["timestamp"] = timestamp;
    j["version"] = version;
    j["digest"] = digest;
    return j;
}

Record Record::from_json(const Json& j) {
    Record r;
    r.operation = j.at("operation").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.inputs_digest = j.at("inputs_digest").get<std::string>();
    r.params = j.at("params");
    r.outputs = j.at("outputs");
    r.tolerances = j.at("tolerances");
    r.timestamp = j.at("timestamp").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.digest = j.at("digest").get<std::string>();
    return r;
}

ResultsStore::ResultsStore(fs::path root) : root_(std::move(root)) { fs::create_directories(root_ / "records"); }

fs::path ResultsStore::path_for(const std::string& operation, const std::string& fp) const {
    return root_ / "records" / operation / (fp + ".json");
}

std::optional<Record> ResultsStore::find(const std::string& operation, const std::string& fp) const {
    const auto path = path_for(operation, fp);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        const auto j = Json::parse(in);
        auto rec = Record::from_json(j);
        if (rec.operation != operation || rec.fingerprint != fp || rec.digest != rec.compute_digest()) {
            return std::nullopt;
        }
        return rec;
    } catch (const std::exception&) {
        return std::nullopt;  // unreadable counts as absent
    }
}

void ResultsStore::put(Record rec) {
    if (find(rec.operation, rec.fingerprint)) return;
    if (rec.timestamp.empty()) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream ts;
        ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        rec.timestamp = ts.str();
    }
    rec.digest = rec.compute_digest();
    const auto path = path_for(rec.operation, rec.fingerprint);
    fs::create_directories(path.parent_path());
    // write-then-rename keeps readers from seeing half a record
    std::random_device rd;
    const auto tmp = path.parent_path() / (rec.fingerprint + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp);
        out << rec.to_json().dump(1) << '\n';
        if (!out) throw Error("results store: cannot write " + tmp.string());
    }
    fs::rename(tmp, path);  // replaces a corrupt record, if any
}

}  // namespace spectral::cli
