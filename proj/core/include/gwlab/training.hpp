#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "gwlab/encoder.hpp"
#include "gwlab/numkernel.hpp"
#include "gwlab/world.hpp"

namespace gwlab {

/// Scenes keyed by id with their object features computed once.
class SceneIndex {
public:
    SceneIndex() = default;
    SceneIndex(std::vector<Scene> scenes, const FeatureLayout& layout);

    const Scene& scene(const std::string& scene_id) const;
    const ObjectFeatureSet& features(const std::string& scene_id) const;
    const std::vector<Scene>& scenes() const { return scenes_; }
    const FeatureLayout& layout() const { return layout_; }

private:
    std::vector<Scene> scenes_;
    std::vector<ObjectFeatureSet> features_;
    std::unordered_map<std::string, std::size_t> index_;
    FeatureLayout layout_;
};

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 1e-2;
    double weight_decay = 0.0;
    OptimKind optimizer = OptimKind::AdamW;
    std::uint64_t seed = 0;
    int patience = 3;  // early stop on validation accuracy
    bool verbose = false;
};

struct EpochMetrics {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double valid_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochMetrics> epochs;
    int best_epoch = -1;
    double best_valid_accuracy = 0.0;
};

}  // namespace gwlab
