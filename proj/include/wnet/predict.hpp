#pragma once

#include <string>
#include <vector>

#include "wnet/classifier.hpp"
#include "wnet/image.hpp"

namespace wnet {

// Fused output of the four heads.  Exactly one time-of-day and one
// precipitation class; glare and fog are independent booleans.  Each
// head's full probability vector is retained.
struct SceneLabel {
    std::string time;
    bool glare = false;
    std::string precipitation;
    bool fog = false;
    std::vector<double> night_conf;   // dawn_dusk, day, night
    std::vector<double> glare_conf;   // glare, no_glare
    std::vector<double> precip_conf;  // clear, rain, snow
    std::vector<double> fog_conf;     // fog, no_fog
};

// Head probabilities before fusion.  Binary heads supply the probability
// of their referenced class 0.
struct HeadProbabilities {
    std::vector<double> night;  // size 3, sums to 1
    double glare = 0.0;
    std::vector<double> precip;  // size 3, sums to 1
    double fog = 0.0;
};

// Pure fusion: ternary heads pick their argmax (first index wins a tie),
// binary heads threshold at 0.5 with the tie going to the referenced
// class.
SceneLabel fuse_scene(const HeadProbabilities& probs);

// "<time>, <precipitation>, fog=<yes|no>, glare=<yes|no>"
std::string describe(const SceneLabel& label);

// The four models run side by side on one preprocessed image.  Order:
// night, glare, precip, fog; all must share one input size.
class ScenePredictor {
public:
    ScenePredictor(Classifier<float> night, Classifier<float> glare, Classifier<float> precip,
                   Classifier<float> fog);

    SceneLabel predict(const Image& img);
    i64 input_size() const { return night_.config().input_size; }

    Classifier<float>& model(const std::string& task);

private:
    Classifier<float> night_;
    Classifier<float> glare_;
    Classifier<float> precip_;
    Classifier<float> fog_;
};

}  // namespace wnet
