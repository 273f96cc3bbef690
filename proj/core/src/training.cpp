#include "gwlab/training.hpp"

namespace gwlab {

SceneIndex::SceneIndex(std::vector<Scene> scenes, const FeatureLayout& layout)
    : scenes_(std::move(scenes)), layout_(layout) {
    features_.reserve(scenes_.size());
    for (std::size_t i = 0; i < scenes_.size(); ++i) {
        if (!index_.emplace(scenes_[i].scene_id, i).second)
            throw SchemaError("duplicate scene_id '" + scenes_[i].scene_id + "'");
        features_.push_back(object_features(scenes_[i], layout_));
    }
}

const Scene& SceneIndex::scene(const std::string& scene_id) const {
    auto it = index_.find(scene_id);
    if (it == index_.end()) throw InvalidData("unknown scene_id '" + scene_id + "'");
    return scenes_[it->second];
}

const ObjectFeatureSet& SceneIndex::features(const std::string& scene_id) const {
    auto it = index_.find(scene_id);
    if (it == index_.end()) throw InvalidData("unknown scene_id '" + scene_id + "'");
    return features_[it->second];
}

}  // namespace gwlab
