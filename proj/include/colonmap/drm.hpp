#pragma once

#include <vector>

#include "colonmap/arrayops.hpp"

namespace colonmap {

// Number of decoder layers that receive fused CNN detail features.
inline constexpr int kFusedDecoderLayers = 5;

// One fusion adapter: 1x1 channel projection, 3x3 spatial projection followed
// by average pooling down to the transformer grid, and a zero-initialized 1x1
// convolution gating the additive injection.
struct FusionAdapterParams {
    ConvKernel channel_proj; // 1x1, cnn channels -> vit channels
    ConvKernel spatial_proj; // 3x3, vit channels -> vit channels, padding 1
    int pool_window = 1;     // window == stride; 1 means no pooling
    ConvKernel zero_conv;    // 1x1, vit channels -> vit channels
    int level = 0;           // decoder layer index in [0, kFusedDecoderLayers)

    // All projection weights zero and, in particular, an exactly-zero
    // zero_conv: the adapter is inert until trained.
    static FusionAdapterParams zero_init(int cnn_channels, int vit_channels, int pool_window,
                                         int level);

    void validate() const;
};

// Multi-level CNN encoder features, one grid per fused decoder layer.
struct FeaturePyramid {
    std::vector<Grid> levels;

    explicit FeaturePyramid(std::vector<Grid> lv) : levels(std::move(lv)) {
        if (levels.size() != static_cast<std::size_t>(kFusedDecoderLayers))
            throw ShapeError("FeaturePyramid: expected " +
                             std::to_string(kFusedDecoderLayers) + " levels");
    }
};

// vit_feat + zero_conv(pool(conv3x3(conv1x1(cnn_feat)))). The aligned CNN
// grid must match vit_feat's shape exactly after projection and pooling.
Grid fusion_adapter_forward(const Grid &cnn_feat, const Grid &vit_feat,
                            const FusionAdapterParams &params);

// Applies one adapter per decoder layer 0..4; deeper layers pass through
// untouched.
std::vector<Grid> drm_forward(const FeaturePyramid &pyramid,
                              const std::vector<Grid> &vit_decoder_feats,
                              const std::vector<FusionAdapterParams> &adapters);

} // namespace colonmap
