#pragma once

#include <string>
#include <vector>

namespace fluctlab::cli {

struct ArtifactEntry {
  std::string name;  // path relative to the run directory
  std::string hash;  // hex FNV-1a of the file bytes
};

/// Provenance record of one run directory: the resolved configuration (with
/// its seed plan), the code version, wall-clock bounds, and every emitted
/// artifact with its content hash. Artifact bytes are fully determined by
/// (config, seed), so re-running a manifest must reproduce the hashes.
struct RunManifest {
  std::string command;
  std::string config_json;
  std::string version;
  std::string started;   // ISO-8601 UTC
  std::string finished;  // ISO-8601 UTC
  std::vector<ArtifactEntry> artifacts;

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

std::string code_version();
std::string iso8601_now();

/// Hashes dir/name and appends it to the artifact list.
void add_artifact(RunManifest& manifest, const std::string& dir,
                  const std::string& name);

/// Writes dir/manifest.json.
void write_manifest(const RunManifest& manifest, const std::string& dir);

/// Loads dir/manifest.json; throws IoError if missing or malformed.
RunManifest load_manifest(const std::string& dir);

/// Re-hashes every artifact; returns the names that are missing or whose
/// bytes changed (empty means the directory is intact).
std::vector<std::string> verify_artifacts(const RunManifest& manifest,
                                          const std::string& dir);

}  // namespace fluctlab::cli
