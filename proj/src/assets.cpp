// SPDX-License-Identifier: Apache-2.0

#include "handbooster/assets.hpp"

#include <algorithm>

#include "handbooster/errors.hpp"

namespace handbooster {

namespace fs = std::filesystem;

AssetRegistry AssetRegistry::load(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw DataError("asset directory not found: " + dir.string());
    std::vector<fs::path> objs;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".obj") objs.push_back(e.path());
    }
    std::sort(objs.begin(), objs.end());
    AssetRegistry reg;
    for (const auto& p : objs) {
        MeshGeometry m;
        try {
            m = load_obj(p);
        } catch (const InvalidInput& e) {
            throw DataError(e.what());
        }
        fs::path tex = p;
        tex.replace_extension(".png");
        reg.add(p.stem().string(), std::move(m), fs::exists(tex) ? std::optional<fs::path>(tex) : std::nullopt);
    }
    return reg;
}

void AssetRegistry::add(const std::string& object_id, MeshGeometry mesh, std::optional<fs::path> texture) {
    mesh.validate();
    meshes_[object_id] = Entry{std::make_shared<const MeshGeometry>(std::move(mesh)), std::move(texture)};
}

const AssetRegistry::Entry& AssetRegistry::entry(const std::string& object_id) const {
    const auto it = meshes_.find(object_id);
    if (it == meshes_.end()) throw LookupError("unknown object id '" + object_id + "'");
    return it->second;
}

const MeshGeometry& AssetRegistry::mesh(const std::string& object_id) const { return *entry(object_id).mesh; }

const std::optional<fs::path>& AssetRegistry::texture(const std::string& object_id) const {
    return entry(object_id).texture;
}

std::vector<std::string> AssetRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : meshes_) out.push_back(k);
    return out;
}

}  // namespace handbooster
