#include "fluctlab/manifest.hpp"

#include "fluctlab/io.hpp"

#include <json.hpp>

#include <chrono>
#include <ctime>

#ifndef FLUCTLAB_VERSION
#define FLUCTLAB_VERSION "0.0.0"
#endif

namespace fluctlab::cli {

using ordered_json = nlohmann::ordered_json;

std::string code_version() { return FLUCTLAB_VERSION; }

std::string iso8601_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string RunManifest::to_json() const {
    ordered_json j;
    j["command"] = command;
    j["version"] = version;
    j["started"] = started;
    j["finished"] = finished;
    // The config echo is itself JSON; embed it structurally.
    j["config"] = config_json.empty()
                      ? ordered_json::object()
                      : ordered_json::parse(config_json);
    auto arr = ordered_json::array();
    for (const auto& a : artifacts)
        arr.push_back(ordered_json{{"name", a.name}, {"hash", a.hash}});
    j["artifacts"] = arr;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    RunManifest m;
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(std::string("manifest.json is not valid JSON: ") +
                      e.what());
    }
    m.command = j.value("command", "");
    m.version = j.value("version", "");
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    if (j.contains("config")) m.config_json = j["config"].dump();
    if (j.contains("artifacts")) {
        for (const auto& a : j["artifacts"])
            m.artifacts.push_back(
                {a.value("name", ""), a.value("hash", "")});
    }
    return m;
}

void add_artifact(RunManifest& manifest, const std::string& dir,
                  const std::string& name) {
    manifest.artifacts.push_back({name, hash_file(dir + "/" + name)});
}

void write_manifest(const RunManifest& manifest, const std::string& dir) {
    write_text(dir + "/manifest.json", manifest.to_json());
}

RunManifest load_manifest(const std::string& dir) {
    return RunManifest::from_json(read_text(dir + "/manifest.json"));
}

std::vector<std::string> verify_artifacts(const RunManifest& manifest,
                                          const std::string& dir) {
    std::vector<std::string> bad;
    for (const auto& a : manifest.artifacts) {
        const std::string path = dir + "/" + a.name;
        if (!file_exists(path)) {
            bad.push_back(a.name + " (missing)");
            continue;
        }
        if (hash_file(path) != a.hash) bad.push_back(a.name + " (modified)");
    }
    return bad;
}

}  // namespace fluctlab::cli
