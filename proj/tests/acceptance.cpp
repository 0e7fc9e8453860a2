// End-to-end acceptance checks: one [PASS]/[FAIL] line per criterion, exit
// status 0 only when every line passes.  The training and determinism
// checks exercise the real pipeline on the synthetic dataset, so a full
// run takes a couple of minutes.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wnet/classifier.hpp"
#include "wnet/dataset.hpp"
#include "wnet/fixtures.hpp"
#include "wnet/grad_check.hpp"
#include "wnet/layers.hpp"
#include "wnet/metrics.hpp"
#include "wnet/modules.hpp"
#include "wnet/ops.hpp"
#include "wnet/predict.hpp"
#include "wnet/rng.hpp"
#include "wnet/serialize.hpp"
#include "wnet/train.hpp"

using namespace wnet;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(bool ok, const std::string& label, const std::string& detail) {
    std::printf("[%s] %s%s%s\n", ok ? "PASS" : "FAIL", label.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Tensor<double> random_tensor(Rng& rng, std::vector<i64> shape, double lo = -1.0,
                             double hi = 1.0) {
    Tensor<double> t = Tensor<double>::zeros(std::move(shape));
    double* p = t.mutable_data();
    for (i64 i = 0; i < t.numel(); ++i) p[i] = rng.uniform(lo, hi);
    return t;
}

Parameter<double> make_param(const char* name, Tensor<double> value) {
    Parameter<double> p;
    p.name = name;
    p.value = std::move(value);
    return p;
}

Tensor<float> random_input(Rng& rng, i64 n, i64 size) {
    Tensor<float> x = Tensor<float>::zeros({n, 3, size, size});
    float* p = x.mutable_data();
    for (i64 i = 0; i < x.numel(); ++i) p[i] = static_cast<float>(rng.uniform());
    return x;
}

std::vector<char> read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    return std::vector<char>(std::istreambuf_iterator<char>(in),
                             std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Mean of the elementwise product with a fixed mixer; breaks the
// symmetries that would otherwise zero out gradients (a batchnorm output's
// plain mean, say, is independent of gamma).
Var<double> mixed_mean(Tape<double>& tape, const Var<double>& y, const Tensor<double>& mixer) {
    return ops::mean(tape, ops::mul(tape, y, Tape<double>::constant(mixer.clone())));
}

struct LayerCheck {
    std::string name;
    GradCheckResult result;
};

std::vector<LayerCheck> layer_gradient_checks() {
    std::vector<LayerCheck> checks;
    Rng rng(0xacce97);

    {
        Parameter<double> x = make_param("x", random_tensor(rng, {1, 2, 5, 5}));
        Parameter<double> w = make_param("w", random_tensor(rng, {3, 2, 3, 3}));
        Parameter<double> b = make_param("b", random_tensor(rng, {3}));
        const Tensor<double> mixer = random_tensor(rng, {1, 3, 3, 3});
        checks.push_back({"conv2d", grad_check({&x, &w, &b}, [&](Tape<double>& tape) {
                              return mixed_mean(tape,
                                                nn::conv2d(tape, tape.param(x), tape.param(w),
                                                           tape.param(b), 2, 1),
                                                mixer);
                          })});
    }
    {
        Parameter<double> x = make_param("x", random_tensor(rng, {2, 3, 4, 4}));
        Parameter<double> gamma = make_param("gamma", random_tensor(rng, {3}, 0.5, 1.5));
        Parameter<double> beta = make_param("beta", random_tensor(rng, {3}));
        const Tensor<double> mixer = random_tensor(rng, {2, 3, 4, 4});
        checks.push_back(
            {"batchnorm2d_train", grad_check({&x, &gamma, &beta}, [&](Tape<double>& tape) {
                 return mixed_mean(
                     tape,
                     nn::batchnorm2d_train(tape, tape.param(x), tape.param(gamma), tape.param(beta),
                                           1e-5)
                         .y,
                     mixer);
             })});
    }
    {
        Parameter<double> x = make_param("x", random_tensor(rng, {2, 3, 4, 4}));
        Parameter<double> gamma = make_param("gamma", random_tensor(rng, {3}, 0.5, 1.5));
        Parameter<double> beta = make_param("beta", random_tensor(rng, {3}));
        const Tensor<double> mean = random_tensor(rng, {3});
        const Tensor<double> var = random_tensor(rng, {3}, 0.5, 1.5);
        const Tensor<double> mixer = random_tensor(rng, {2, 3, 4, 4});
        checks.push_back(
            {"batchnorm2d_eval", grad_check({&x, &gamma, &beta}, [&](Tape<double>& tape) {
                 return mixed_mean(tape,
                                   nn::batchnorm2d_eval(tape, tape.param(x), tape.param(gamma),
                                                        tape.param(beta), mean, var, 1e-5),
                                   mixer);
             })});
    }
    {
        Parameter<double> x = make_param("x", random_tensor(rng, {1, 2, 6, 6}));
        const Tensor<double> mixer = random_tensor(rng, {1, 2, 3, 3});
        checks.push_back({"maxpool2d", grad_check({&x}, [&](Tape<double>& tape) {
                              return mixed_mean(tape, nn::maxpool2d(tape, tape.param(x), 3, 2, 1),
                                                mixer);
                          })});
    }
    {
        Parameter<double> x = make_param("x", random_tensor(rng, {2, 4, 3, 3}));
        const Tensor<double> mixer = random_tensor(rng, {2, 4});
        checks.push_back({"global_avgpool", grad_check({&x}, [&](Tape<double>& tape) {
                              return mixed_mean(tape, nn::global_avgpool(tape, tape.param(x)),
                                                mixer);
                          })});
    }
    {
        Parameter<double> x = make_param("x", random_tensor(rng, {4, 5}));
        Parameter<double> w = make_param("w", random_tensor(rng, {5, 3}));
        Parameter<double> b = make_param("b", random_tensor(rng, {3}));
        const Tensor<double> mixer = random_tensor(rng, {4, 3});
        checks.push_back({"dense_relu", grad_check({&x, &w, &b}, [&](Tape<double>& tape) {
                              const Var<double> h = ops::bias_add(
                                  tape, ops::matmul(tape, tape.param(x), tape.param(w)),
                                  tape.param(b));
                              return mixed_mean(tape, ops::relu(tape, h), mixer);
                          })});
    }
    {
        Parameter<double> logits = make_param("logits", random_tensor(rng, {4, 3}));
        const std::vector<i64> labels{0, 2, 1, 2};
        checks.push_back(
            {"softmax_cross_entropy", grad_check({&logits}, [&](Tape<double>& tape) {
                 return nn::softmax_cross_entropy(tape, tape.param(logits), labels).loss;
             })});
    }
    {
        Parameter<double> logits = make_param("logits", random_tensor(rng, {6, 1}));
        const Tensor<double> targets =
            Tensor<double>::from({6, 1}, {1.0, 0.0, 1.0, 1.0, 0.0, 0.0});
        checks.push_back(
            {"sigmoid_binary_cross_entropy", grad_check({&logits}, [&](Tape<double>& tape) {
                 return nn::binary_cross_entropy(tape, nn::sigmoid(tape, tape.param(logits)),
                                                 targets);
             })});
    }
    {
        nn::ResidualBlock<double> block("block", 3, 4, 2, rng);
        std::vector<Parameter<double>*> params;
        block.collect(params);
        Parameter<double> x = make_param("x", random_tensor(rng, {2, 3, 6, 6}));
        params.push_back(&x);
        const Tensor<double> mixer = random_tensor(rng, {2, 4, 3, 3});
        checks.push_back({"residual_block", grad_check(
                                                params,
                                                [&](Tape<double>& tape) {
                                                    return mixed_mean(
                                                        tape,
                                                        block.forward(tape, tape.param(x), true),
                                                        mixer);
                                                },
                                                1e-6, -1, 0x67adc0de, 1e-5)});
    }
    return checks;
}

void check_gradients() {
    const auto start = std::chrono::steady_clock::now();

    double worst = 0.0;
    std::string worst_name;
    bool ok = true;
    for (const LayerCheck& check : layer_gradient_checks()) {
        ok = ok && check.result.ok(1e-4);
        if (check.result.max_rel_err > worst) {
            worst = check.result.max_rel_err;
            worst_name = check.name;
        }
    }

    // Conv biases ahead of a batchnorm have an exactly-zero gradient, so
    // those coordinates measure nothing but finite-difference noise; the
    // raised denominator floor holds them to the ~1e-9 absolute agreement
    // the probe can actually resolve.  The small eps keeps relu kinks out
    // of the probed neighborhood.
    Classifier<double> model(spec_for_task("night"), BackboneConfig::desk(), false, 17);
    Rng rng(18);
    const Tensor<double> x = random_tensor(rng, {2, 3, 32, 32}, 0.0, 1.0);
    const std::vector<i64> labels{0, 2};
    const GradCheckResult full =
        grad_check(model.parameters(),
                   [&](Tape<double>& tape) {
                       const Var<double> logits =
                           model.forward(tape, Tape<double>::constant(x.clone()), true);
                       return nn::softmax_cross_entropy(tape, logits, labels).loss;
                   },
                   1e-6, 3, 0x67adc0de, 1e-5);
    ok = ok && full.ok(1e-4);
    if (full.max_rel_err > worst) {
        worst = full.max_rel_err;
        worst_name = "full_desk_classifier";
    }

    const double elapsed = seconds_since(start);
    ok = ok && elapsed < 60.0;

    std::ostringstream detail;
    detail << "worst rel err " << worst << " (" << worst_name << ", " << full.coords_checked
           << " sampled coords on the full model), " << std::fixed << elapsed << "s";
    report(ok, "layer and full-model gradients match central differences in 64-bit (tol 1e-4)",
           detail.str());
}

void check_f1_rows() {
    const double a = f1(0.885, 0.825);
    const double b = f1(0.862, 0.829);
    const bool ok = std::fabs(a - 0.854) <= 1e-3 && std::fabs(b - 0.845) <= 1e-3;
    std::ostringstream detail;
    detail << "f1(0.885,0.825)=" << a << ", f1(0.862,0.829)=" << b;
    report(ok, "f1 reproduces the published precision/recall pairs within 0.001", detail.str());
}

void check_metric_oracle() {
    Rng rng(0x0acce5);
    bool ok = true;
    std::string first_failure;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
        const i64 n_classes = trial % 2 == 0 ? 2 : 3;
        const i64 n = 1 + static_cast<i64>(rng.bounded(60));
        std::vector<i64> preds;
        std::vector<i64> truths;
        for (i64 i = 0; i < n; ++i) {
            preds.push_back(static_cast<i64>(rng.bounded(static_cast<u64>(n_classes))));
            truths.push_back(static_cast<i64>(rng.bounded(static_cast<u64>(n_classes))));
        }
        const ConfusionMatrix cm = confusion(preds, truths, n_classes);

        for (i64 ref = 0; ref < n_classes && ok; ++ref) {
            i64 tp = 0, tn = 0, fp = 0, fn = 0;
            for (i64 i = 0; i < n; ++i) {
                const bool pp = preds[static_cast<std::size_t>(i)] == ref;
                const bool tt = truths[static_cast<std::size_t>(i)] == ref;
                tp += pp && tt;
                fp += pp && !tt;
                fn += !pp && tt;
                tn += !pp && !tt;
            }
            const ConfusionMatrix::Binary b = cm.reduce(ref);
            if (b.tp != tp || b.tn != tn || b.fp != fp || b.fn != fn) {
                ok = false;
                first_failure = "count mismatch at trial " + std::to_string(trial);
                break;
            }
            const Rate p = precision(cm, ref);
            const Rate r = recall(cm, ref);
            const Rate fpr = false_positive_rate(cm, ref);
            const auto match = [](const Rate& rate, i64 num, i64 den) {
                if (den == 0) return rate.degenerate;
                return !rate.degenerate &&
                       std::fabs(rate.value -
                                 static_cast<double>(num) / static_cast<double>(den)) <= 1e-12;
            };
            const double want_f1 = p.value + r.value == 0.0
                                       ? 0.0
                                       : 2.0 * p.value * r.value / (p.value + r.value);
            if (!match(p, tp, tp + fp) || !match(r, tp, tp + fn) || !match(fpr, fp, fp + tn) ||
                std::fabs(f1(p.value, r.value) - want_f1) > 1e-12) {
                ok = false;
                first_failure = "rate mismatch at trial " + std::to_string(trial);
            }
        }

        i64 correct = 0;
        for (i64 i = 0; i < n; ++i) {
            correct += preds[static_cast<std::size_t>(i)] == truths[static_cast<std::size_t>(i)];
        }
        if (ok && std::fabs(accuracy(cm) - static_cast<double>(correct) /
                                               static_cast<double>(n)) > 1e-12) {
            ok = false;
            first_failure = "accuracy mismatch at trial " + std::to_string(trial);
        }
    }
    report(ok, "confusion, accuracy, precision, recall, fpr, and f1 agree with a counting "
               "oracle over 1000 random label sets",
           ok ? "2-class and 3-class, exact counts, rates within 1e-12" : first_failure);
}

struct TrainingOutcome {
    bool fit_ok = true;
    bool frozen_ok = true;
    std::string fit_detail;
    std::optional<Classifier<float>> night_model;
};

TrainingOutcome check_training(const fs::path& fixture_root) {
    const auto start = std::chrono::steady_clock::now();
    TrainingOutcome outcome;
    std::ostringstream detail;

    for (const char* task : {"night", "glare", "precip", "fog"}) {
        DatasetManifest manifest = load_dataset((fixture_root / task).string(), task,
                                                spec_for_task(task).classes);
        split_manifest(manifest, 0.8, 0);

        Classifier<float> model(spec_for_task(task), BackboneConfig::desk(), true, 0);
        const std::string checksum_before = model.frozen_checksum();

        TrainConfig config;
        config.epochs = 30;
        config.batch_size = 32;
        config.lr = 1e-3f;
        config.seed = 0;
        config.augment = true;
        const std::vector<EpochStats> log = train_classifier(model, manifest, config);

        const EpochStats& last = log.back();
        if (last.train_acc < 0.95 || last.test_acc < 0.85) {
            outcome.fit_ok = false;
        }
        if (model.frozen_checksum() != checksum_before) {
            outcome.frozen_ok = false;
        }
        detail << task << "=" << last.train_acc << "/" << last.test_acc << " ";
        if (std::string(task) == "night") {
            outcome.night_model.emplace(std::move(model));
        }
    }

    const double elapsed = seconds_since(start);
    outcome.fit_ok = outcome.fit_ok && elapsed < 600.0;
    detail << "(train/test after 30 epochs, " << std::fixed << elapsed << "s)";
    outcome.fit_detail = detail.str();
    return outcome;
}

void check_fusion() {
    bool ok = true;
    std::string detail = "36 synthesized head outcomes, 20 random images";

    const std::vector<std::string> times{"dawn_dusk", "day", "night"};
    const std::vector<std::string> precips{"clear", "rain", "snow"};
    std::set<std::string> summaries;
    for (int t = 0; t < 3 && ok; ++t) {
        for (int p = 0; p < 3 && ok; ++p) {
            for (int g = 0; g < 2 && ok; ++g) {
                for (int f = 0; f < 2 && ok; ++f) {
                    HeadProbabilities probs;
                    probs.night = {0.1, 0.1, 0.1};
                    probs.night[static_cast<std::size_t>(t)] = 0.8;
                    probs.precip = {0.1, 0.1, 0.1};
                    probs.precip[static_cast<std::size_t>(p)] = 0.8;
                    probs.glare = g == 1 ? 0.9 : 0.1;
                    probs.fog = f == 1 ? 0.9 : 0.1;
                    const SceneLabel label = fuse_scene(probs);
                    const bool valid =
                        label.time == times[static_cast<std::size_t>(t)] &&
                        label.precipitation == precips[static_cast<std::size_t>(p)] &&
                        label.glare == (g == 1) && label.fog == (f == 1);
                    if (!valid) {
                        ok = false;
                        detail = "wrong fused label for combination " + describe(label);
                    }
                    summaries.insert(describe(label));
                }
            }
        }
    }
    if (ok && summaries.size() != 36) {
        ok = false;
        detail = "describe() collapsed " + std::to_string(36 - summaries.size()) +
                 " of the 36 outcomes";
    }

    ScenePredictor base(Classifier<float>(spec_for_task("night"), BackboneConfig::desk(), true, 1),
                        Classifier<float>(spec_for_task("glare"), BackboneConfig::desk(), true, 2),
                        Classifier<float>(spec_for_task("precip"), BackboneConfig::desk(), true, 3),
                        Classifier<float>(spec_for_task("fog"), BackboneConfig::desk(), true, 4));
    Classifier<float> bent_fog(spec_for_task("fog"), BackboneConfig::desk(), true, 4);
    for (Parameter<float>* p : bent_fog.parameters()) {
        float* v = p->value.mutable_data();
        for (i64 i = 0; i < p->value.numel(); ++i) v[i] += 0.37f * static_cast<float>(i % 3);
    }
    ScenePredictor bent(Classifier<float>(spec_for_task("night"), BackboneConfig::desk(), true, 1),
                        Classifier<float>(spec_for_task("glare"), BackboneConfig::desk(), true, 2),
                        Classifier<float>(spec_for_task("precip"), BackboneConfig::desk(), true, 3),
                        std::move(bent_fog));

    Rng rng(5);
    for (int i = 0; i < 20 && ok; ++i) {
        Image img;
        img.width = 32;
        img.height = 32;
        img.pixels.resize(32 * 32 * 3);
        for (float& px : img.pixels) px = static_cast<float>(rng.uniform());
        const SceneLabel a = base.predict(img);
        const SceneLabel b = bent.predict(img);
        if (a.time != b.time || a.glare != b.glare || a.precipitation != b.precipitation ||
            a.night_conf != b.night_conf || a.glare_conf != b.glare_conf ||
            a.precip_conf != b.precip_conf) {
            ok = false;
            detail = "fog weight perturbation leaked into another field on image " +
                     std::to_string(i);
        }
    }

    report(ok, "fusion covers all 36 outcomes distinctly and fog weights cannot affect the "
               "other three fields",
           detail);
}

void check_split_census() {
    DatasetManifest manifest;
    manifest.task_name = "night";
    manifest.classes = {"dawn_dusk", "day", "night"};
    const std::vector<i64> counts{1673, 2584, 1848};
    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        for (i64 i = 0; i < counts[ci]; ++i) {
            ManifestEntry entry;
            entry.path = "class" + std::to_string(ci) + "/img" + std::to_string(i);
            entry.label = static_cast<i64>(ci);
            manifest.samples.push_back(entry);
        }
    }
    split_manifest(manifest, 0.8, 123);

    const i64 train = manifest.split_count(SplitKind::train);
    const i64 test = manifest.split_count(SplitKind::test);
    std::vector<i64> class_train(3, 0);
    for (const ManifestEntry& entry : manifest.samples) {
        if (entry.split == SplitKind::train) ++class_train[static_cast<std::size_t>(entry.label)];
    }

    bool ok = train == 4884 && test == 1221;
    for (std::size_t ci = 0; ci < counts.size(); ++ci) {
        const double frac = static_cast<double>(class_train[ci]) /
                            static_cast<double>(counts[ci]);
        ok = ok && std::fabs(frac - 0.8) < 1.0 / static_cast<double>(counts[ci]);
    }
    std::ostringstream detail;
    detail << "1673/2584/1848 -> " << train << " train / " << test << " test (per class "
           << class_train[0] << "/" << class_train[1] << "/" << class_train[2] << ")";
    report(ok, "stratified 80/20 split reproduces the documented census", detail.str());
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    if (status == -1 || !WIFEXITED(status)) return -1;
    return WEXITSTATUS(status);
}

void check_train_determinism(const fs::path& fixture_root, const fs::path& scratch) {
    const char* bin = std::getenv("WNET_CLI_BIN");
    if (bin == nullptr) {
        report(false, "identical train commands produce byte-identical models and logs",
               "WNET_CLI_BIN is not set");
        return;
    }
    const fs::path model_a = scratch / "det_a.wnet";
    const fs::path model_b = scratch / "det_b.wnet";
    const fs::path log_a = scratch / "det_a.csv";
    const fs::path log_b = scratch / "det_b.csv";
    const std::string common = std::string(bin) + " train --task night --data " +
                               fixture_root.string() +
                               " --desk-scale --epochs 12 --batch 32 --seed 7";
    const int code_a = run_command(common + " --out " + model_a.string() + " --log " +
                                   log_a.string() + " >/dev/null 2>&1");
    const int code_b = run_command(common + " --out " + model_b.string() + " --log " +
                                   log_b.string() + " >/dev/null 2>&1");

    const std::vector<char> bytes_a = read_bytes(model_a);
    const std::vector<char> bytes_b = read_bytes(model_b);
    const std::vector<char> csv_a = read_bytes(log_a);
    const std::vector<char> csv_b = read_bytes(log_b);
    const bool ok = code_a == 0 && code_b == 0 && !bytes_a.empty() && bytes_a == bytes_b &&
                    !csv_a.empty() && csv_a == csv_b;
    std::ostringstream detail;
    detail << "two runs of train --seed 7, model " << bytes_a.size() << " bytes, log "
           << csv_a.size() << " bytes";
    if (code_a != 0 || code_b != 0) {
        detail << " (exit codes " << code_a << "/" << code_b << ")";
    }
    report(ok, "identical train commands produce byte-identical models and logs", detail.str());
}

void check_serialization(std::optional<Classifier<float>>& trained, const fs::path& scratch) {
    bool ok = true;
    std::string detail = "100 random inputs bit-identical; 5 corruption modes rejected";

    Classifier<float>& model =
        trained ? *trained
                : (trained.emplace(spec_for_task("night"), BackboneConfig::desk(), true, 6),
                   *trained);
    const fs::path file = scratch / "serialized.wnet";
    save_model(model, file.string());
    Classifier<float> loaded = load_model(file.string());

    Rng rng(7);
    const Tensor<float> x = random_input(rng, 100, 32);
    Tape<float> tape;
    tape.set_grad_enabled(false);
    const Tensor<float> a = model.forward(tape, Tape<float>::constant(x.clone()), false).value;
    const Tensor<float> b = loaded.forward(tape, Tape<float>::constant(x.clone()), false).value;
    if (a.shape() != b.shape() ||
        std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.numel()) * sizeof(float)) !=
            0) {
        ok = false;
        detail = "reloaded model produced different logits";
    }

    const std::vector<char> good = read_bytes(file);
    const fs::path bad = scratch / "corrupted.wnet";
    int rejected = 0;
    const auto expect_rejection = [&](std::vector<char> bytes, const char* mode) {
        write_bytes(bad, bytes);
        try {
            load_model(bad.string());
            ok = false;
            detail = std::string("corruption mode accepted: ") + mode;
        } catch (const ModelIoError&) {
            ++rejected;
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string(mode) + " raised the wrong error: " + e.what();
        }
    };

    std::vector<char> wrong_magic = good;
    wrong_magic[0] = 'Z';
    expect_rejection(wrong_magic, "magic");
    std::vector<char> wrong_version = good;
    wrong_version[4] = 77;
    expect_rejection(wrong_version, "version");
    std::vector<char> flipped = good;
    flipped[good.size() / 2] ^= 0x10;
    expect_rejection(flipped, "payload flip");
    expect_rejection(std::vector<char>(good.begin(), good.begin() + 32), "truncation");
    std::vector<char> padded = good;
    padded.insert(padded.end(), {'x', 'y'});
    expect_rejection(padded, "trailing bytes");

    ok = ok && rejected == 5;
    report(ok, "models reload with bit-identical behavior and corrupted files are "
               "rejected cleanly",
           detail);
}

}  // namespace

int main() {
    const fs::path scratch =
        fs::temp_directory_path() / ("wnet_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(scratch);
    fs::create_directories(scratch);
    const fs::path fixture_root = scratch / "fixtures";
    generate_fixtures(fixture_root.string(), 50, 0, 32);

    check_gradients();
    check_f1_rows();
    check_metric_oracle();

    TrainingOutcome training = check_training(fixture_root);
    report(training.fit_ok,
           "all four heads fit the synthetic dataset (train >= 0.95, test >= 0.85, 30 epochs, "
           "under 10 minutes)",
           training.fit_detail);
    report(training.frozen_ok,
           "frozen backbone weights are bit-conserved across training (sha-256)", "");

    check_fusion();
    check_split_census();
    check_train_determinism(fixture_root, scratch);
    check_serialization(training.night_model, scratch);

    fs::remove_all(scratch);
    if (failures != 0) {
        std::printf("%d acceptance check%s failed\n", failures, failures == 1 ? "" : "s");
        return 1;
    }
    std::printf("all acceptance checks passed\n");
    return 0;
}
