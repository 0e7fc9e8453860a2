#include "wnet/metrics.hpp"

#include <cstdio>

namespace wnet {

i64 ConfusionMatrix::total() const {
    i64 sum = 0;
    for (i64 c : counts) sum += c;
    return sum;
}

i64 ConfusionMatrix::trace() const {
    i64 sum = 0;
    for (i64 i = 0; i < n_classes; ++i) sum += at(i, i);
    return sum;
}

ConfusionMatrix::Binary ConfusionMatrix::reduce(i64 ref_class) const {
    if (ref_class < 0 || ref_class >= n_classes) {
        throw ValueError("reference class " + std::to_string(ref_class) + " out of range");
    }
    Binary b;
    for (i64 t = 0; t < n_classes; ++t) {
        for (i64 p = 0; p < n_classes; ++p) {
            const i64 c = at(t, p);
            if (t == ref_class && p == ref_class) {
                b.tp += c;
            } else if (t == ref_class) {
                b.fn += c;
            } else if (p == ref_class) {
                b.fp += c;
            } else {
                b.tn += c;
            }
        }
    }
    return b;
}

ConfusionMatrix confusion(const std::vector<i64>& preds, const std::vector<i64>& truth,
                          i64 n_classes) {
    if (preds.size() != truth.size()) {
        throw ValueError("prediction and truth lists differ in length");
    }
    if (preds.empty()) {
        throw ValueError("confusion matrix needs at least one sample");
    }
    if (n_classes <= 0) {
        throw ValueError("confusion matrix needs a positive class count");
    }
    ConfusionMatrix cm;
    cm.n_classes = n_classes;
    cm.counts.assign(static_cast<std::size_t>(n_classes * n_classes), 0);
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] < 0 || preds[i] >= n_classes || truth[i] < 0 || truth[i] >= n_classes) {
            throw ValueError("class index out of range at sample " + std::to_string(i));
        }
        cm.counts[static_cast<std::size_t>(truth[i] * n_classes + preds[i])] += 1;
    }
    return cm;
}

double accuracy(const ConfusionMatrix& cm) {
    const i64 total = cm.total();
    if (total == 0) {
        throw ValueError("accuracy of an empty confusion matrix");
    }
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

namespace {

Rate ratio(i64 numerator, i64 denominator) {
    if (denominator == 0) {
        return {0.0, true};
    }
    return {static_cast<double>(numerator) / static_cast<double>(denominator), false};
}

}  // namespace

Rate precision(const ConfusionMatrix& cm, i64 ref_class) {
    const ConfusionMatrix::Binary b = cm.reduce(ref_class);
    return ratio(b.tp, b.tp + b.fp);
}

Rate recall(const ConfusionMatrix& cm, i64 ref_class) {
    const ConfusionMatrix::Binary b = cm.reduce(ref_class);
    return ratio(b.tp, b.tp + b.fn);
}

Rate false_positive_rate(const ConfusionMatrix& cm, i64 ref_class) {
    const ConfusionMatrix::Binary b = cm.reduce(ref_class);
    return ratio(b.fp, b.fp + b.tn);
}

double f1(double precision, double recall) {
    if (precision + recall == 0.0) {
        return 0.0;
    }
    return 2.0 * precision * recall / (precision + recall);
}

std::string report_text(const MetricsReport& report) {
    char buf[512];
    std::string degenerate;
    auto mark = [&degenerate](const char* name, const Rate& r) {
        if (r.degenerate) {
            if (!degenerate.empty()) degenerate += ",";
            degenerate += name;
        }
    };
    mark("precision", report.precision);
    mark("recall", report.recall);
    mark("fpr", report.fpr);
    if (degenerate.empty()) degenerate = "none";

    std::snprintf(buf, sizeof(buf),
                  "model: %s\n"
                  "loss: %.6f\n"
                  "accuracy: %.6f\n"
                  "precision: %.6f\n"
                  "recall: %.6f\n"
                  "fpr: %.6f\n"
                  "f1: %.6f\n"
                  "referenced_class: %lld\n"
                  "n_test: %lld\n"
                  "degenerate: %s\n",
                  report.model.c_str(), report.loss, report.accuracy, report.precision.value,
                  report.recall.value, report.fpr.value, report.f1,
                  static_cast<long long>(report.referenced_class),
                  static_cast<long long>(report.n_test), degenerate.c_str());
    return std::string(buf);
}

}  // namespace wnet
