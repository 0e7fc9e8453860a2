#pragma once

#include <iosfwd>
#include <vector>

#include "wnet/classifier.hpp"
#include "wnet/dataset.hpp"
#include "wnet/metrics.hpp"

namespace wnet {

struct TrainConfig {
    i64 epochs = 100;
    i64 batch_size = 32;
    float lr = 1e-3f;
    u64 seed = 0;
    bool augment = true;
    AugmentationConfig aug;
};

struct EpochStats {
    i64 epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double test_loss = 0.0;
    double test_acc = 0.0;
};

// Single inference pass over one split: running batch-norm statistics, no
// augmentation, deterministic order.  Loss is the head's mean
// cross-entropy; per-class columns use reference class 0.
MetricsReport evaluate_classifier(Classifier<float>& model, const DatasetManifest& manifest,
                                  SplitKind kind, i64 batch_size = 32);

void write_epoch_log_header(std::ostream& out);
void write_epoch_log_row(std::ostream& out, const EpochStats& row);

// Adam over shuffled augmented train batches.  After each epoch both
// splits are re-evaluated in inference mode and logged; epoch_log, when
// given, receives the CSV rows as they are produced.  A non-finite batch
// loss aborts with NumericError naming the last completed epoch.
std::vector<EpochStats> train_classifier(Classifier<float>& model,
                                         const DatasetManifest& manifest,
                                         const TrainConfig& config,
                                         std::ostream* epoch_log = nullptr);

}  // namespace wnet
