#pragma once

#include <string>

#include "wnet/classifier.hpp"

namespace wnet {

// Model container layout (all integers little-endian):
//   magic "WNET"
//   u32 format version (currently 1)
//   u32 name length, name bytes
//   u32 class count, then per class u32 length + bytes
//   u32 input size, u8 backbone-frozen flag
//   u32 tensor record count
//   records: u32 name length, name, u8 dtype (0 = float32), u8 trainable,
//            u32 rank, u32 extents[rank], raw float32 payload
//   u32 CRC32 of every preceding byte
// Parameters are written in declaration order, then batch-norm running
// statistics as non-trainable records.

void save_model(Classifier<float>& model, const std::string& path);

// Rebuilds the classifier a file describes and restores every tensor
// bit-exactly.  Bad magic, version, checksum, or structure is rejected
// with the failing byte offset and no partial model.
Classifier<float> load_model(const std::string& path);

// Copies tensors from a container file into an existing model by name.
// Every record must match a model tensor of the same shape; the first
// mismatch is reported by name.  Model tensors absent from the file keep
// their values, so a backbone-only export can seed a fresh head.
void import_weights(Classifier<float>& model, const std::string& path);

}  // namespace wnet
