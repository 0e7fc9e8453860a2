#include "wnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <ostream>
#include <set>

#include "wnet/image.hpp"

namespace fs = std::filesystem;

namespace wnet {

const char* split_name(SplitKind kind) {
    return kind == SplitKind::train ? "train" : "test";
}

std::vector<i64> DatasetManifest::class_counts() const {
    std::vector<i64> counts(classes.size(), 0);
    for (const ManifestEntry& e : samples) {
        counts[static_cast<std::size_t>(e.label)] += 1;
    }
    return counts;
}

i64 DatasetManifest::split_count(SplitKind kind) const {
    i64 n = 0;
    for (const ManifestEntry& e : samples) {
        if (e.split == kind) ++n;
    }
    return n;
}

DatasetManifest load_dataset(const std::string& root, const std::string& task_name,
                             const std::vector<std::string>& classes) {
    if (classes.empty()) {
        throw ValueError("load_dataset needs at least one class");
    }
    if (!fs::is_directory(root)) {
        throw DataError("dataset root is not a directory: " + root);
    }

    const std::set<std::string> declared(classes.begin(), classes.end());
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory() && declared.count(entry.path().filename().string()) == 0) {
            std::cerr << "warning: ignoring unknown class directory " << entry.path().string()
                      << "\n";
        }
    }

    DatasetManifest manifest;
    manifest.task_name = task_name;
    manifest.classes = classes;
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const fs::path dir = fs::path(root) / classes[ci];
        if (!fs::is_directory(dir)) {
            throw DataError("missing class directory: " + dir.string());
        }
        i64 added = 0;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (!entry.is_regular_file()) continue;
            const std::string path = entry.path().string();
            if (!sniff_ppm(path)) {
                std::cerr << "warning: skipping undecodable file " << path << "\n";
                continue;
            }
            manifest.samples.push_back({path, static_cast<i64>(ci), SplitKind::train});
            ++added;
        }
        if (added == 0) {
            throw DataError("class directory has no decodable images: " + dir.string());
        }
    }
    std::sort(manifest.samples.begin(), manifest.samples.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) { return a.path < b.path; });
    return manifest;
}

void split_manifest(DatasetManifest& manifest, double train_fraction, u64 seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValueError("train fraction must lie strictly between 0 and 1");
    }
    const std::size_t n_classes = manifest.classes.size();
    std::vector<std::vector<std::size_t>> by_class(n_classes);
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        by_class[static_cast<std::size_t>(manifest.samples[i].label)].push_back(i);
    }
    for (std::size_t ci = 0; ci < n_classes; ++ci) {
        if (by_class[ci].size() < 2) {
            throw DataError("class \"" + manifest.classes[ci] +
                            "\" has fewer than 2 samples; cannot stratify");
        }
    }

    std::vector<i64> train_quota(n_classes);
    std::vector<double> remainder(n_classes);
    i64 floor_total = 0;
    for (std::size_t ci = 0; ci < n_classes; ++ci) {
        const double exact = train_fraction * static_cast<double>(by_class[ci].size());
        train_quota[ci] = static_cast<i64>(std::floor(exact));
        remainder[ci] = exact - std::floor(exact);
        floor_total += train_quota[ci];
    }
    const i64 target =
        std::llround(train_fraction * static_cast<double>(manifest.samples.size()));

    // Hand out the slots lost to per-class flooring, biggest remainder
    // first (ties to the lower class index), but never empty a test side.
    std::vector<std::size_t> order(n_classes);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return a < b;
    });
    i64 extra = target - floor_total;
    for (std::size_t ci : order) {
        if (extra <= 0) break;
        if (train_quota[ci] + 1 <= static_cast<i64>(by_class[ci].size()) - 1) {
            train_quota[ci] += 1;
            --extra;
        }
    }

    for (std::size_t ci = 0; ci < n_classes; ++ci) {
        Rng rng(mix_seed(mix_seed(seed, 0xd1ce), static_cast<u64>(ci)));
        std::vector<std::size_t> members = by_class[ci];
        rng.shuffle(members);
        for (std::size_t k = 0; k < members.size(); ++k) {
            manifest.samples[members[k]].split =
                static_cast<i64>(k) < train_quota[ci] ? SplitKind::train : SplitKind::test;
        }
    }
    manifest.seed = seed;
    manifest.split_done = true;
}

void export_manifest(const DatasetManifest& manifest, std::ostream& out) {
    if (!manifest.split_done) {
        throw ValueError("manifest has no split assignment to export");
    }
    for (const ManifestEntry& e : manifest.samples) {
        out << e.path << "\t" << e.label << "\t" << split_name(e.split) << "\n";
    }
}

std::vector<Batch> make_batches(const DatasetManifest& manifest, SplitKind kind, i64 batch_size,
                                i64 input_size, bool shuffle, const AugmentationConfig* augment,
                                Rng& rng) {
    if (batch_size <= 0) {
        throw ValueError("batch size must be positive");
    }
    if (input_size <= 0) {
        throw ValueError("input size must be positive");
    }
    std::vector<std::size_t> indices;
    for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
        if (manifest.samples[i].split == kind) {
            indices.push_back(i);
        }
    }
    if (indices.empty()) {
        throw DataError(std::string("split \"") + split_name(kind) + "\" is empty");
    }
    if (shuffle) {
        rng.shuffle(indices);
    }
    const float rescale = augment != nullptr ? augment->rescale : 1.0f / 255.0f;

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < indices.size(); start += static_cast<std::size_t>(batch_size)) {
        const std::size_t n =
            std::min(static_cast<std::size_t>(batch_size), indices.size() - start);
        Batch batch;
        batch.x = Tensor<float>::zeros({static_cast<i64>(n), 3, input_size, input_size});
        float* xp = batch.x.mutable_data();
        for (std::size_t bi = 0; bi < n; ++bi) {
            const ManifestEntry& e = manifest.samples[indices[start + bi]];
            Image img = load_image(e.path, rescale);
            img = resize_bilinear(img, input_size, input_size);
            if (augment != nullptr) {
                img = apply_augment(img, draw_augment(*augment, rng));
            }
            float* dst = xp + static_cast<i64>(bi) * 3 * input_size * input_size;
            for (i64 c = 0; c < 3; ++c) {
                for (i64 y = 0; y < input_size; ++y) {
                    for (i64 x = 0; x < input_size; ++x) {
                        dst[(c * input_size + y) * input_size + x] = img.at(y, x, c);
                    }
                }
            }
            batch.labels.push_back(e.label);
            batch.paths.push_back(e.path);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

}  // namespace wnet
