#pragma once

#include <string>
#include <vector>

#include "wnet/common.hpp"

namespace wnet {

// Rows index the true class, columns the predicted class.
struct ConfusionMatrix {
    i64 n_classes = 0;
    std::vector<i64> counts;

    i64 at(i64 truth, i64 pred) const {
        return counts[static_cast<std::size_t>(truth * n_classes + pred)];
    }
    i64 total() const;
    i64 trace() const;

    // One-vs-rest reduction for a reference class: TP + TN + FP + FN
    // always equals total().
    struct Binary {
        i64 tp = 0;
        i64 tn = 0;
        i64 fp = 0;
        i64 fn = 0;
    };
    Binary reduce(i64 ref_class) const;
};

ConfusionMatrix confusion(const std::vector<i64>& preds, const std::vector<i64>& truth,
                          i64 n_classes);

// A rate whose denominator can vanish; such cases report 0 and are
// flagged instead of throwing.
struct Rate {
    double value = 0.0;
    bool degenerate = false;
};

// trace/total; equals (TP+TN)/(TP+TN+FP+FN) for two classes.
double accuracy(const ConfusionMatrix& cm);

Rate precision(const ConfusionMatrix& cm, i64 ref_class = 0);
Rate recall(const ConfusionMatrix& cm, i64 ref_class = 0);
Rate false_positive_rate(const ConfusionMatrix& cm, i64 ref_class = 0);

// Harmonic mean 2pr/(p+r); 0 when both inputs are 0.
double f1(double precision, double recall);

struct MetricsReport {
    std::string model;
    double loss = 0.0;
    double accuracy = 0.0;
    Rate precision;
    Rate recall;
    Rate fpr;
    double f1 = 0.0;
    i64 referenced_class = 0;
    i64 n_test = 0;
};

// Stable key: value text form, 6-decimal rates, with a trailing line
// listing any degenerate metrics.
std::string report_text(const MetricsReport& report);

}  // namespace wnet
