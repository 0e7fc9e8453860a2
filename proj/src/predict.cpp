#include "wnet/predict.hpp"

#include <utility>

#include "wnet/layers.hpp"

namespace wnet {

namespace {

std::size_t argmax_first(const std::vector<double>& v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

void check_probability_vector(const std::vector<double>& v, std::size_t size, const char* head) {
    if (v.size() != size) {
        throw ValueError(std::string(head) + " probability vector must have " +
                         std::to_string(size) + " entries");
    }
    for (double p : v) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw ValueError(std::string(head) + " probabilities must lie in [0,1]");
        }
    }
}

void expect_spec(const Classifier<float>& model, const std::string& task) {
    if (model.spec().task != task) {
        throw DataError("expected a " + spec_for_task(task).name + " model, got " +
                        model.spec().name);
    }
}

Tensor<float> image_to_input(const Image& img, i64 input_size) {
    const Image resized = resize_bilinear(img, input_size, input_size);
    Tensor<float> x = Tensor<float>::zeros({1, 3, input_size, input_size});
    float* xp = x.mutable_data();
    for (i64 c = 0; c < 3; ++c) {
        for (i64 y = 0; y < input_size; ++y) {
            for (i64 r = 0; r < input_size; ++r) {
                xp[(c * input_size + y) * input_size + r] = resized.at(y, r, c);
            }
        }
    }
    return x;
}

std::vector<double> softmax_probs(Classifier<float>& model, const Tensor<float>& x) {
    Tape<float> tape;
    tape.set_grad_enabled(false);
    const Var<float> logits = model.forward(tape, Tape<float>::constant(x), /*training=*/false);
    const Var<float> probs = nn::softmax(tape, logits);
    std::vector<double> out;
    for (i64 j = 0; j < probs.value.dim(1); ++j) {
        out.push_back(static_cast<double>(probs.value.data()[j]));
    }
    return out;
}

double sigmoid_prob(Classifier<float>& model, const Tensor<float>& x) {
    Tape<float> tape;
    tape.set_grad_enabled(false);
    const Var<float> logits = model.forward(tape, Tape<float>::constant(x), /*training=*/false);
    const Var<float> probs = nn::sigmoid(tape, logits);
    return static_cast<double>(probs.value.data()[0]);
}

}  // namespace

SceneLabel fuse_scene(const HeadProbabilities& probs) {
    check_probability_vector(probs.night, 3, "night");
    check_probability_vector(probs.precip, 3, "precip");
    if (!(probs.glare >= 0.0 && probs.glare <= 1.0) || !(probs.fog >= 0.0 && probs.fog <= 1.0)) {
        throw ValueError("binary head probabilities must lie in [0,1]");
    }

    const ClassifierSpec night = spec_for_task("night");
    const ClassifierSpec precip = spec_for_task("precip");
    SceneLabel label;
    label.time = night.classes[argmax_first(probs.night)];
    label.precipitation = precip.classes[argmax_first(probs.precip)];
    label.glare = probs.glare >= 0.5;
    label.fog = probs.fog >= 0.5;
    label.night_conf = probs.night;
    label.glare_conf = {probs.glare, 1.0 - probs.glare};
    label.precip_conf = probs.precip;
    label.fog_conf = {probs.fog, 1.0 - probs.fog};
    return label;
}

std::string describe(const SceneLabel& label) {
    return label.time + ", " + label.precipitation + ", fog=" + (label.fog ? "yes" : "no") +
           ", glare=" + (label.glare ? "yes" : "no");
}

ScenePredictor::ScenePredictor(Classifier<float> night, Classifier<float> glare,
                               Classifier<float> precip, Classifier<float> fog)
    : night_(std::move(night)),
      glare_(std::move(glare)),
      precip_(std::move(precip)),
      fog_(std::move(fog)) {
    expect_spec(night_, "night");
    expect_spec(glare_, "glare");
    expect_spec(precip_, "precip");
    expect_spec(fog_, "fog");
    const i64 size = night_.config().input_size;
    if (glare_.config().input_size != size || precip_.config().input_size != size ||
        fog_.config().input_size != size) {
        throw DataError("the four models disagree on input size");
    }
}

SceneLabel ScenePredictor::predict(const Image& img) {
    const Tensor<float> x = image_to_input(img, input_size());
    HeadProbabilities probs;
    probs.night = softmax_probs(night_, x);
    probs.glare = sigmoid_prob(glare_, x);
    probs.precip = softmax_probs(precip_, x);
    probs.fog = sigmoid_prob(fog_, x);
    return fuse_scene(probs);
}

Classifier<float>& ScenePredictor::model(const std::string& task) {
    if (task == "night") return night_;
    if (task == "glare") return glare_;
    if (task == "precip") return precip_;
    if (task == "fog") return fog_;
    throw ValueError("unknown task \"" + task + "\"");
}

}  // namespace wnet
