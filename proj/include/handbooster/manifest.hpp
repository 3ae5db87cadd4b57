// SPDX-License-Identifier: Apache-2.0
//
// JSON-lines manifests: a header object followed by one grasp record per
// line. Keys a stage does not understand are carried through untouched.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "handbooster/pose.hpp"

namespace handbooster {

inline constexpr int kManifestSchemaVersion = 1;

struct ManifestHeader {
    int schema_version = kManifestSchemaVersion;
    std::string units = "mm";
    std::size_t joint_count = 15;
    std::string assets;  // as written, relative to the manifest's directory
};

struct ManifestEntry {
    GraspRecord record;
    nlohmann::json extra = nlohmann::json::object();
};

struct Manifest {
    ManifestHeader header;
    std::vector<ManifestEntry> entries;
};

nlohmann::json record_to_json(const GraspRecord& g);
/// Throws DataError naming `where` on missing or malformed fields.
GraspRecord record_from_json(const nlohmann::json& j, const std::string& where);

/// Throws DataError on unreadable files, an unknown schema version, units
/// other than mm, joint-count mismatches or repeated (sequence, frame) ids.
Manifest read_manifest(const std::filesystem::path& path);
std::string format_manifest(const Manifest& m);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace handbooster
