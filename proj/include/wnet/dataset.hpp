#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wnet/augment.hpp"
#include "wnet/rng.hpp"
#include "wnet/tensor.hpp"

namespace wnet {

enum class SplitKind : u8 { train = 0, test = 1 };

const char* split_name(SplitKind kind);

struct ManifestEntry {
    std::string path;
    i64 label = 0;
    SplitKind split = SplitKind::train;
};

// Class-labeled sample index.  Entries are kept sorted by path so every
// derived quantity (split, batching) is independent of directory listing
// order.
struct DatasetManifest {
    std::string task_name;
    std::vector<std::string> classes;
    std::vector<ManifestEntry> samples;
    u64 seed = 0;
    bool split_done = false;

    std::vector<i64> class_counts() const;
    i64 split_count(SplitKind kind) const;
};

// Indexes a directory-per-class tree.  Each declared class must have its
// own subdirectory with at least one decodable image; unknown
// subdirectories and undecodable files are skipped with a warning on
// stderr.
DatasetManifest load_dataset(const std::string& root, const std::string& task_name,
                             const std::vector<std::string>& classes);

// Stratified deterministic split: per class, floor(train_fraction * count)
// samples train, with single-sample top-ups by largest fractional
// remainder until the round(train_fraction * total) global target is met.
// A top-up never empties a class's test side.
void split_manifest(DatasetManifest& manifest, double train_fraction, u64 seed);

// Line-delimited `path<TAB>class_index<TAB>split` records.
void export_manifest(const DatasetManifest& manifest, std::ostream& out);

struct Batch {
    Tensor<float> x;  // [N,3,S,S]
    std::vector<i64> labels;
    std::vector<std::string> paths;
};

// Loads one split as a batch sequence: decode, resize to input_size, then
// optional augmentation.  shuffle reorders samples with rng before
// chunking; augmentation draws also come from rng, in batch order.
std::vector<Batch> make_batches(const DatasetManifest& manifest, SplitKind kind, i64 batch_size,
                                i64 input_size, bool shuffle, const AugmentationConfig* augment,
                                Rng& rng);

}  // namespace wnet
