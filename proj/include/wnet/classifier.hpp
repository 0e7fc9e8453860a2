#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wnet/hash.hpp"
#include "wnet/modules.hpp"

namespace wnet {

enum class HeadKind : u8 { softmax = 0, sigmoid = 1 };

// Identity of one of the four classifiers: ordered class list and output
// head form.  Binary heads emit a single sigmoid unit representing the
// probability of class 0 (the referenced class); ternary heads emit
// softmax logits.
struct ClassifierSpec {
    std::string name;
    std::string task;
    std::vector<std::string> classes;
    HeadKind head = HeadKind::softmax;

    i64 head_units() const {
        return head == HeadKind::sigmoid ? 1 : static_cast<i64>(classes.size());
    }
};

inline const std::vector<std::string>& task_names() {
    static const std::vector<std::string> names = {"night", "glare", "precip", "fog"};
    return names;
}

inline ClassifierSpec spec_for_task(const std::string& task) {
    if (task == "night") {
        return {"NightNet", "night", {"dawn_dusk", "day", "night"}, HeadKind::softmax};
    }
    if (task == "glare") {
        return {"GlareNet", "glare", {"glare", "no_glare"}, HeadKind::sigmoid};
    }
    if (task == "precip") {
        return {"PrecipitationNet", "precip", {"clear", "rain", "snow"}, HeadKind::softmax};
    }
    if (task == "fog") {
        return {"FogNet", "fog", {"fog", "no_fog"}, HeadKind::sigmoid};
    }
    throw ValueError("unknown task \"" + task + "\" (expected night, glare, precip, or fog)");
}

inline ClassifierSpec spec_for_name(const std::string& name) {
    for (const std::string& task : task_names()) {
        ClassifierSpec spec = spec_for_task(task);
        if (spec.name == name) return spec;
    }
    throw ValueError("unknown model name \"" + name + "\"");
}

// Residual backbone geometry.  The desk profile trains in seconds at
// 32x32; the full profile mirrors the 224x224 stem/stage layout of the
// reference architecture with two-convolution blocks.
struct BackboneConfig {
    struct Stage {
        i64 channels;
        i64 blocks;
        i64 stride;
    };

    i64 input_size = 32;
    i64 stem_channels = 16;
    i64 stem_kernel = 3;
    i64 stem_stride = 1;
    i64 stem_pad = 1;
    bool stem_pool = false;
    std::vector<Stage> stages;

    static BackboneConfig desk() {
        BackboneConfig c;
        c.input_size = 32;
        c.stem_channels = 16;
        c.stem_kernel = 3;
        c.stem_stride = 1;
        c.stem_pad = 1;
        c.stem_pool = false;
        c.stages = {{16, 1, 1}, {32, 1, 2}, {64, 1, 2}};
        return c;
    }

    static BackboneConfig full() {
        BackboneConfig c;
        c.input_size = 224;
        c.stem_channels = 64;
        c.stem_kernel = 7;
        c.stem_stride = 2;
        c.stem_pad = 3;
        c.stem_pool = true;
        c.stages = {{64, 3, 1}, {128, 4, 2}, {256, 6, 2}, {512, 3, 2}};
        return c;
    }

    static BackboneConfig for_input(i64 input_size) {
        if (input_size == 32) return desk();
        if (input_size == 224) return full();
        throw ValueError("unsupported input size " + std::to_string(input_size) +
                         " (expected 32 or 224)");
    }
};

// One classifier: frozen-or-trainable residual backbone, then a trainable
// head of global average pooling and two 64-unit dense+relu layers feeding
// the output units.
template <typename S>
class Classifier {
public:
    Classifier(ClassifierSpec spec, BackboneConfig config, bool freeze_backbone, u64 seed)
        : spec_(std::move(spec)), config_(std::move(config)) {
        Rng rng(mix_seed(seed, 0xc0de));
        stem_conv_.emplace("stem.conv", 3, config_.stem_channels, config_.stem_kernel,
                           config_.stem_stride, config_.stem_pad, rng);
        stem_bn_.emplace("stem.bn", config_.stem_channels);
        i64 in_ch = config_.stem_channels;
        for (std::size_t si = 0; si < config_.stages.size(); ++si) {
            const BackboneConfig::Stage& stage = config_.stages[si];
            for (i64 bi = 0; bi < stage.blocks; ++bi) {
                const std::string name = "stage" + std::to_string(si + 1) + ".block" +
                                         std::to_string(bi + 1);
                const i64 stride = bi == 0 ? stage.stride : 1;
                blocks_.emplace_back(name, in_ch, stage.channels, stride, rng);
                in_ch = stage.channels;
            }
        }
        fc1_.emplace("head.fc1", in_ch, 64, rng);
        fc2_.emplace("head.fc2", 64, 64, rng);
        out_.emplace("head.out", 64, spec_.head_units(), rng);
        set_backbone_frozen(freeze_backbone);
    }

    // Raw head output: [N, n_classes] logits for softmax heads, [N, 1]
    // pre-sigmoid for binary heads.
    Var<S> forward(Tape<S>& tape, const Var<S>& x, bool training) {
        if (x.value.rank() != 4 || x.value.dim(1) != 3 || x.value.dim(2) != config_.input_size ||
            x.value.dim(3) != config_.input_size) {
            throw ShapeError("classifier expects [N,3," + std::to_string(config_.input_size) +
                             "," + std::to_string(config_.input_size) + "] input, got " +
                             x.value.shape_string());
        }
        Var<S> h = ops::relu(tape, stem_bn_->forward(tape, stem_conv_->forward(tape, x), training));
        if (config_.stem_pool) {
            h = nn::maxpool2d(tape, h, 3, 2, 1);
        }
        for (nn::ResidualBlock<S>& block : blocks_) {
            h = block.forward(tape, h, training);
        }
        h = nn::global_avgpool(tape, h);
        h = ops::relu(tape, fc1_->forward(tape, h));
        h = ops::relu(tape, fc2_->forward(tape, h));
        return out_->forward(tape, h);
    }

    const ClassifierSpec& spec() const { return spec_; }
    const BackboneConfig& config() const { return config_; }
    bool backbone_frozen() const { return frozen_; }

    void set_backbone_frozen(bool frozen) {
        frozen_ = frozen;
        stem_conv_->set_trainable(!frozen);
        stem_bn_->set_trainable(!frozen);
        for (nn::ResidualBlock<S>& block : blocks_) {
            block.set_trainable(!frozen);
        }
    }

    std::vector<Parameter<S>*> parameters() {
        std::vector<Parameter<S>*> params;
        stem_conv_->collect(params);
        stem_bn_->collect(params);
        for (nn::ResidualBlock<S>& block : blocks_) {
            block.collect(params);
        }
        fc1_->collect(params);
        fc2_->collect(params);
        out_->collect(params);
        return params;
    }

    std::vector<nn::ModuleBuffer<S>*> buffers() {
        std::vector<nn::ModuleBuffer<S>*> bufs;
        stem_bn_->collect_buffers(bufs);
        for (nn::ResidualBlock<S>& block : blocks_) {
            block.collect_buffers(bufs);
        }
        return bufs;
    }

    // SHA-256 over the raw bytes of all non-trainable parameters in
    // declaration order; constant across training when the backbone is
    // frozen.
    std::string frozen_checksum() {
        Sha256 hash;
        for (Parameter<S>* p : parameters()) {
            if (p->trainable) continue;
            hash.update(p->value.data(), static_cast<std::size_t>(p->value.numel()) * sizeof(S));
        }
        return hash.hex_digest();
    }

private:
    ClassifierSpec spec_;
    BackboneConfig config_;
    bool frozen_ = false;
    std::optional<nn::Conv2d<S>> stem_conv_;
    std::optional<nn::BatchNorm2d<S>> stem_bn_;
    std::vector<nn::ResidualBlock<S>> blocks_;
    std::optional<nn::Dense<S>> fc1_;
    std::optional<nn::Dense<S>> fc2_;
    std::optional<nn::Dense<S>> out_;
};

}  // namespace wnet
