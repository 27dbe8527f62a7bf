#include "colonmap/drm.hpp"

#include <string>

namespace colonmap {

FusionAdapterParams FusionAdapterParams::zero_init(int cnn_channels, int vit_channels,
                                                   int pool_window, int level) {
    FusionAdapterParams p;
    p.channel_proj = ConvKernel(vit_channels, cnn_channels, 1, 1);
    p.spatial_proj = ConvKernel(vit_channels, vit_channels, 3, 3);
    p.zero_conv = ConvKernel(vit_channels, vit_channels, 1, 1);
    p.pool_window = pool_window;
    p.level = level;
    p.validate();
    return p;
}

void FusionAdapterParams::validate() const {
    channel_proj.validate();
    spatial_proj.validate();
    zero_conv.validate();
    if (channel_proj.kh != 1 || channel_proj.kw != 1)
        throw ShapeError("FusionAdapterParams: channel_proj must be 1x1");
    if (spatial_proj.kh != 3 || spatial_proj.kw != 3)
        throw ShapeError("FusionAdapterParams: spatial_proj must be 3x3");
    if (zero_conv.kh != 1 || zero_conv.kw != 1)
        throw ShapeError("FusionAdapterParams: zero_conv must be 1x1");
    if (spatial_proj.in_channels != channel_proj.out_channels ||
        zero_conv.in_channels != spatial_proj.out_channels)
        throw ShapeError("FusionAdapterParams: channel chain mismatch");
    if (pool_window <= 0)
        throw ShapeError("FusionAdapterParams: pool_window must be positive");
    if (level < 0 || level >= kFusedDecoderLayers)
        throw ShapeError("FusionAdapterParams: level out of range");
}

Grid fusion_adapter_forward(const Grid &cnn_feat, const Grid &vit_feat,
                            const FusionAdapterParams &params) {
    params.validate();

    Grid aligned = conv2d(cnn_feat, params.channel_proj);
    aligned = conv2d(aligned, params.spatial_proj, /*stride=*/1, /*padding=*/1);
    if (params.pool_window > 1)
        aligned = avg_pool(aligned, params.pool_window, params.pool_window);

    if (!aligned.same_shape(vit_feat))
        throw ShapeError("fusion_adapter_forward: aligned CNN features are " +
                         std::to_string(aligned.height()) + "x" + std::to_string(aligned.width()) +
                         "x" + std::to_string(aligned.channels()) + ", ViT features are " +
                         std::to_string(vit_feat.height()) + "x" + std::to_string(vit_feat.width()) +
                         "x" + std::to_string(vit_feat.channels()));

    const Grid gated = conv2d(aligned, params.zero_conv);
    Grid out = vit_feat;
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data()[i] += gated.data()[i];
    return out;
}

std::vector<Grid> drm_forward(const FeaturePyramid &pyramid,
                              const std::vector<Grid> &vit_decoder_feats,
                              const std::vector<FusionAdapterParams> &adapters) {
    if (adapters.size() != static_cast<std::size_t>(kFusedDecoderLayers))
        throw ShapeError("drm_forward: expected " + std::to_string(kFusedDecoderLayers) +
                         " adapters, got " + std::to_string(adapters.size()));
    if (vit_decoder_feats.size() < static_cast<std::size_t>(kFusedDecoderLayers))
        throw ShapeError("drm_forward: need at least " + std::to_string(kFusedDecoderLayers) +
                         " decoder layers, got " + std::to_string(vit_decoder_feats.size()));

    std::vector<Grid> out = vit_decoder_feats;
    for (int i = 0; i < kFusedDecoderLayers; ++i) {
        if (adapters[i].level != i)
            throw ShapeError("drm_forward: adapter " + std::to_string(i) +
                             " labelled for level " + std::to_string(adapters[i].level));
        out[i] = fusion_adapter_forward(pyramid.levels[i], vit_decoder_feats[i], adapters[i]);
    }
    return out;
}

} // namespace colonmap
