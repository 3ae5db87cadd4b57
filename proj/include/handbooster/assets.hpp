// SPDX-License-Identifier: Apache-2.0
//
// Object meshes keyed by object id. A registry directory holds
// <object_id>.obj files, optionally with a <object_id>.png texture sampled
// through the mesh's vt coordinates.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "handbooster/mesh.hpp"

namespace handbooster {

class AssetRegistry {
public:
    AssetRegistry() = default;

    /// Loads every *.obj in the directory. Throws DataError if the directory
    /// does not exist or a mesh fails to parse.
    static AssetRegistry load(const std::filesystem::path& dir);

    void add(const std::string& object_id, MeshGeometry mesh, std::optional<std::filesystem::path> texture = {});

    bool contains(const std::string& object_id) const { return meshes_.count(object_id) > 0; }

    /// Throws LookupError for unknown ids.
    const MeshGeometry& mesh(const std::string& object_id) const;
    const std::optional<std::filesystem::path>& texture(const std::string& object_id) const;

    std::vector<std::string> ids() const;

private:
    struct Entry {
        std::shared_ptr<const MeshGeometry> mesh;
        std::optional<std::filesystem::path> texture;
    };
    std::map<std::string, Entry> meshes_;
    const Entry& entry(const std::string& object_id) const;
};

}  // namespace handbooster
