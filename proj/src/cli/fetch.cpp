#include <httplib.h>

#include <fstream>
#include <random>

#include "spectral/cli.hpp"
#include "spectral/errors.hpp"

namespace spectral::cli {

namespace {

// scheme://host[:port] and the path, as httplib wants them
std::pair<std::string, std::string> split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ValidationError("fetch: malformed url " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

bool is_hex_digest(const std::string& s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!std::isxdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

}  // namespace

FetchResult fetch_dataset(const std::string& url, const std::string& sha256, const fs::path& cache_dir) {
    std::string want = sha256;
    for (auto& c : want) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!is_hex_digest(want)) throw ValidationError("fetch: dataset_sha256 must be 64 hex digits");

    const fs::path dir = cache_dir / "datasets";
    const fs::path target = dir / (want + ".dat");
    if (fs::is_regular_file(target) && sha256_file(target) == want) return {target, true};

    const auto [origin, path] = split_url(url);
    httplib::Client client(origin);
    client.set_follow_location(true);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    const auto res = client.Get(path);
    if (!res) throw Error("fetch: request to " + url + " failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error("fetch: " + url + " answered HTTP " + std::to_string(res->status));

    const std::string got = sha256_hex(res->body);
    if (got != want) {
        throw ValidationError("fetch: checksum mismatch for " + url + " (expected " + want + ", got " + got + ")");
    }
    fs::create_directories(dir);
    std::random_device rd;
    const fs::path tmp = dir / (want + ".part" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary);
        out.write(res->body.data(), static_cast<std::streamsize>(res->body.size()));
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("fetch: cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, target);
    return {target, false};
}

}  // namespace spectral::cli
