#include "wnet/train.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "wnet/layers.hpp"
#include "wnet/optimizer.hpp"

namespace wnet {

namespace {

void check_class_agreement(const Classifier<float>& model, const DatasetManifest& manifest) {
    if (model.spec().classes != manifest.classes) {
        throw DataError("class mismatch between model " + model.spec().name +
                        " and dataset manifest for task \"" + manifest.task_name + "\"");
    }
}

// Targets for the single-sigmoid head: 1 when the sample belongs to the
// referenced class 0.
Tensor<float> binary_targets(const std::vector<i64>& labels) {
    Tensor<float> t = Tensor<float>::zeros({static_cast<i64>(labels.size()), 1});
    float* p = t.mutable_data();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        p[i] = labels[i] == 0 ? 1.0f : 0.0f;
    }
    return t;
}

i64 argmax_row(const float* row, i64 n) {
    i64 best = 0;
    for (i64 j = 1; j < n; ++j) {
        if (row[j] > row[best]) best = j;
    }
    return best;
}

struct BatchOutcome {
    Var<float> loss;
    std::vector<i64> preds;
};

BatchOutcome head_loss_and_preds(Classifier<float>& model, Tape<float>& tape,
                                 const Batch& batch, bool training) {
    const Var<float> x = Tape<float>::constant(batch.x);
    const Var<float> logits = model.forward(tape, x, training);
    BatchOutcome out;
    const i64 n = logits.value.dim(0);
    if (model.spec().head == HeadKind::softmax) {
        nn::SoftmaxCrossEntropy<float> ce = nn::softmax_cross_entropy(tape, logits, batch.labels);
        out.loss = ce.loss;
        const i64 classes = ce.probs.dim(1);
        for (i64 r = 0; r < n; ++r) {
            out.preds.push_back(argmax_row(ce.probs.data() + r * classes, classes));
        }
    } else {
        const Var<float> probs = nn::sigmoid(tape, logits);
        out.loss = nn::binary_cross_entropy(tape, probs, binary_targets(batch.labels));
        for (i64 r = 0; r < n; ++r) {
            out.preds.push_back(probs.value.data()[r] >= 0.5f ? 0 : 1);
        }
    }
    return out;
}

}  // namespace

MetricsReport evaluate_classifier(Classifier<float>& model, const DatasetManifest& manifest,
                                  SplitKind kind, i64 batch_size) {
    check_class_agreement(model, manifest);
    Rng unused(0);
    const std::vector<Batch> batches =
        make_batches(manifest, kind, batch_size, model.config().input_size,
                     /*shuffle=*/false, /*augment=*/nullptr, unused);

    double loss_sum = 0.0;
    i64 total = 0;
    std::vector<i64> preds;
    std::vector<i64> truths;
    for (const Batch& batch : batches) {
        Tape<float> tape;
        tape.set_grad_enabled(false);
        BatchOutcome out = head_loss_and_preds(model, tape, batch, /*training=*/false);
        const i64 n = static_cast<i64>(batch.labels.size());
        loss_sum += static_cast<double>(out.loss.value.item()) * static_cast<double>(n);
        total += n;
        preds.insert(preds.end(), out.preds.begin(), out.preds.end());
        truths.insert(truths.end(), batch.labels.begin(), batch.labels.end());
    }

    const i64 n_classes = static_cast<i64>(manifest.classes.size());
    const ConfusionMatrix cm = confusion(preds, truths, n_classes);
    MetricsReport report;
    report.model = model.spec().name;
    report.loss = loss_sum / static_cast<double>(total);
    report.accuracy = accuracy(cm);
    report.precision = precision(cm, 0);
    report.recall = recall(cm, 0);
    report.fpr = false_positive_rate(cm, 0);
    report.f1 = f1(report.precision.value, report.recall.value);
    report.referenced_class = 0;
    report.n_test = total;
    return report;
}

void write_epoch_log_header(std::ostream& out) {
    out << "epoch,train_loss,train_acc,test_loss,test_acc\n";
}

void write_epoch_log_row(std::ostream& out, const EpochStats& row) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.6f,%.6f,%.6f\n",
                  static_cast<long long>(row.epoch), row.train_loss, row.train_acc,
                  row.test_loss, row.test_acc);
    out << buf;
}

std::vector<EpochStats> train_classifier(Classifier<float>& model,
                                         const DatasetManifest& manifest,
                                         const TrainConfig& config, std::ostream* epoch_log) {
    if (config.epochs <= 0) throw ValueError("epoch count must be positive");
    if (config.batch_size <= 0) throw ValueError("batch size must be positive");
    if (!(config.lr > 0.0f)) throw ValueError("learning rate must be positive");
    config.aug.validate();
    check_class_agreement(model, manifest);
    if (!manifest.split_done) {
        throw ValueError("manifest must be split before training");
    }

    const std::vector<Parameter<float>*> params = model.parameters();
    Adam<float> adam(config.lr);
    Tape<float> tape;
    std::vector<EpochStats> log;
    if (epoch_log != nullptr) {
        write_epoch_log_header(*epoch_log);
    }

    for (i64 epoch = 1; epoch <= config.epochs; ++epoch) {
        Rng epoch_rng(mix_seed(mix_seed(config.seed, 0xe90c), static_cast<u64>(epoch)));
        const std::vector<Batch> batches = make_batches(
            manifest, SplitKind::train, config.batch_size, model.config().input_size,
            /*shuffle=*/true, config.augment ? &config.aug : nullptr, epoch_rng);
        for (const Batch& batch : batches) {
            BatchOutcome out = head_loss_and_preds(model, tape, batch, /*training=*/true);
            if (!std::isfinite(out.loss.value.item())) {
                throw NumericError("loss diverged in epoch " + std::to_string(epoch) +
                                   "; last completed epoch " + std::to_string(epoch - 1));
            }
            tape.backward(out.loss);
            adam.step(tape, params);
            tape.reset();
        }

        const MetricsReport train_report =
            evaluate_classifier(model, manifest, SplitKind::train, config.batch_size);
        const MetricsReport test_report =
            evaluate_classifier(model, manifest, SplitKind::test, config.batch_size);
        EpochStats row;
        row.epoch = epoch;
        row.train_loss = train_report.loss;
        row.train_acc = train_report.accuracy;
        row.test_loss = test_report.loss;
        row.test_acc = test_report.accuracy;
        log.push_back(row);
        if (epoch_log != nullptr) {
            write_epoch_log_row(*epoch_log, row);
        }
    }
    return log;
}

}  // namespace wnet
