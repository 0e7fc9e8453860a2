#include "wnet/serialize.hpp"

#include <cstring>
#include <fstream>
#include <set>
#include <vector>

#include "wnet/hash.hpp"

namespace wnet {

namespace {

constexpr u32 kFormatVersion = 1;
constexpr u32 kMaxNameLength = 4096;
constexpr u32 kMaxRank = 8;
constexpr u64 kMaxTensorElems = u64(1) << 31;

class ByteWriter {
public:
    void put_u8(u8 v) { bytes_.push_back(v); }

    void put_u32(u32 v) {
        bytes_.push_back(static_cast<u8>(v));
        bytes_.push_back(static_cast<u8>(v >> 8));
        bytes_.push_back(static_cast<u8>(v >> 16));
        bytes_.push_back(static_cast<u8>(v >> 24));
    }

    void put_bytes(const void* data, std::size_t size) {
        const u8* p = static_cast<const u8*>(data);
        bytes_.insert(bytes_.end(), p, p + size);
    }

    void put_string(const std::string& s) {
        put_u32(static_cast<u32>(s.size()));
        put_bytes(s.data(), s.size());
    }

    std::vector<u8>& bytes() { return bytes_; }

private:
    std::vector<u8> bytes_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<u8>& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }

    u8 read_u8(const char* what) {
        need(1, what);
        return bytes_[pos_++];
    }

    u32 read_u32(const char* what) {
        need(4, what);
        const u32 v = static_cast<u32>(bytes_[pos_]) | (static_cast<u32>(bytes_[pos_ + 1]) << 8) |
                      (static_cast<u32>(bytes_[pos_ + 2]) << 16) |
                      (static_cast<u32>(bytes_[pos_ + 3]) << 24);
        pos_ += 4;
        return v;
    }

    std::string read_string(const char* what) {
        const u32 len = read_u32(what);
        if (len > kMaxNameLength) {
            throw ModelIoError(std::string(what) + " length " + std::to_string(len) +
                                   " exceeds limit",
                               pos_ - 4);
        }
        need(len, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }

    void read_floats(float* dst, std::size_t count, const char* what) {
        need(count * sizeof(float), what);
        std::memcpy(dst, bytes_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
    }

    void need(std::size_t n, const char* what) {
        if (bytes_.size() - pos_ < n) {
            throw ModelIoError(std::string("file truncated while reading ") + what, pos_);
        }
    }

private:
    const std::vector<u8>& bytes_;
    std::size_t pos_ = 0;
};

struct TensorRecord {
    std::string name;
    bool trainable = false;
    std::vector<i64> shape;
    std::vector<float> values;
    std::size_t file_offset = 0;
};

struct ParsedModel {
    std::string name;
    std::vector<std::string> classes;
    u32 input_size = 0;
    bool frozen_backbone = false;
    std::vector<TensorRecord> records;
};

void append_record(ByteWriter& w, const std::string& name, bool trainable,
                   const Tensor<float>& value) {
    w.put_string(name);
    w.put_u8(0);
    w.put_u8(trainable ? 1 : 0);
    const auto& shape = value.shape();
    w.put_u32(static_cast<u32>(shape.size()));
    for (i64 extent : shape) {
        w.put_u32(static_cast<u32>(extent));
    }
    w.put_bytes(value.data(), static_cast<std::size_t>(value.numel()) * sizeof(float));
}

std::vector<u8> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open model file: " + path);
    }
    return std::vector<u8>((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
}

ParsedModel parse_container(const std::string& path) {
    const std::vector<u8> bytes = read_file(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "WNET", 4) != 0) {
        throw ModelIoError(path + ": bad magic (not a model container)", 0);
    }
    if (bytes.size() < 12) {
        throw ModelIoError(path + ": file too short for header", bytes.size());
    }
    const std::size_t crc_offset = bytes.size() - 4;
    const u32 stored_crc = static_cast<u32>(bytes[crc_offset]) |
                           (static_cast<u32>(bytes[crc_offset + 1]) << 8) |
                           (static_cast<u32>(bytes[crc_offset + 2]) << 16) |
                           (static_cast<u32>(bytes[crc_offset + 3]) << 24);
    const u32 computed = crc32(bytes.data(), crc_offset);

    ByteReader r(bytes);
    r.read_u32("magic");
    const u32 version = r.read_u32("version");
    if (version != kFormatVersion) {
        throw ModelIoError(path + ": unsupported format version " + std::to_string(version), 4);
    }
    if (stored_crc != computed) {
        throw ModelIoError(path + ": checksum mismatch (file corrupted)", crc_offset);
    }

    ParsedModel parsed;
    parsed.name = r.read_string("model name");
    const u32 n_classes = r.read_u32("class count");
    if (n_classes > 64) {
        throw ModelIoError(path + ": implausible class count " + std::to_string(n_classes),
                           r.offset() - 4);
    }
    for (u32 i = 0; i < n_classes; ++i) {
        parsed.classes.push_back(r.read_string("class name"));
    }
    parsed.input_size = r.read_u32("input size");
    parsed.frozen_backbone = r.read_u8("frozen flag") != 0;
    const u32 n_records = r.read_u32("tensor count");

    for (u32 i = 0; i < n_records; ++i) {
        TensorRecord rec;
        rec.file_offset = r.offset();
        rec.name = r.read_string("tensor name");
        const u8 dtype = r.read_u8("dtype");
        if (dtype != 0) {
            throw ModelIoError(
                path + ": unsupported dtype " + std::to_string(dtype) + " for tensor " + rec.name,
                r.offset() - 1);
        }
        rec.trainable = r.read_u8("trainable flag") != 0;
        const u32 rank = r.read_u32("rank");
        if (rank > kMaxRank) {
            throw ModelIoError(path + ": implausible rank " + std::to_string(rank) +
                                   " for tensor " + rec.name,
                               r.offset() - 4);
        }
        u64 count = 1;
        for (u32 d = 0; d < rank; ++d) {
            const u32 extent = r.read_u32("extent");
            count *= extent;
            if (extent == 0 || count > kMaxTensorElems) {
                throw ModelIoError(path + ": implausible extents for tensor " + rec.name,
                                   r.offset() - 4);
            }
            rec.shape.push_back(static_cast<i64>(extent));
        }
        rec.values.resize(static_cast<std::size_t>(count));
        r.read_floats(rec.values.data(), rec.values.size(), rec.name.c_str());
        parsed.records.push_back(std::move(rec));
    }
    if (r.offset() != crc_offset) {
        throw ModelIoError(path + ": trailing bytes after tensor records", r.offset());
    }
    return parsed;
}

std::string shape_text(const std::vector<i64>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

}  // namespace

void save_model(Classifier<float>& model, const std::string& path) {
    ByteWriter w;
    w.put_bytes("WNET", 4);
    w.put_u32(kFormatVersion);
    w.put_string(model.spec().name);
    w.put_u32(static_cast<u32>(model.spec().classes.size()));
    for (const std::string& cls : model.spec().classes) {
        w.put_string(cls);
    }
    w.put_u32(static_cast<u32>(model.config().input_size));
    w.put_u8(model.backbone_frozen() ? 1 : 0);

    const std::vector<Parameter<float>*> params = model.parameters();
    const std::vector<nn::ModuleBuffer<float>*> buffers = model.buffers();
    w.put_u32(static_cast<u32>(params.size() + buffers.size()));
    for (Parameter<float>* p : params) {
        append_record(w, p->name, p->trainable, p->value);
    }
    for (nn::ModuleBuffer<float>* b : buffers) {
        append_record(w, b->name, false, b->value);
    }
    w.put_u32(crc32(w.bytes().data(), w.bytes().size()));

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open model file for writing: " + path);
    }
    out.write(reinterpret_cast<const char*>(w.bytes().data()),
              static_cast<std::streamsize>(w.bytes().size()));
    if (!out) {
        throw DataError("short write to model file: " + path);
    }
}

Classifier<float> load_model(const std::string& path) {
    const ParsedModel parsed = parse_container(path);

    ClassifierSpec spec;
    try {
        spec = spec_for_name(parsed.name);
    } catch (const ValueError&) {
        throw ModelIoError(path + ": unknown model name \"" + parsed.name + "\"", 8);
    }
    if (parsed.classes != spec.classes) {
        throw ModelIoError(path + ": class list does not match model " + parsed.name, 8);
    }
    BackboneConfig config;
    try {
        config = BackboneConfig::for_input(static_cast<i64>(parsed.input_size));
    } catch (const ValueError& e) {
        throw ModelIoError(path + ": " + e.what(), 8);
    }

    Classifier<float> model(spec, config, parsed.frozen_backbone, 0);

    std::vector<Parameter<float>*> params = model.parameters();
    std::vector<nn::ModuleBuffer<float>*> buffers = model.buffers();
    std::set<std::string> applied_names;
    auto apply = [&](const TensorRecord& rec, Tensor<float>& dst) {
        if (!applied_names.insert(rec.name).second) {
            throw ModelIoError(path + ": duplicate tensor record " + rec.name, rec.file_offset);
        }
        if (dst.shape() != rec.shape) {
            throw ModelIoError(path + ": shape mismatch for tensor " + rec.name + ": file " +
                                   shape_text(rec.shape) + " vs model " +
                                   shape_text(dst.shape()),
                               rec.file_offset);
        }
        std::memcpy(dst.mutable_data(), rec.values.data(), rec.values.size() * sizeof(float));
    };
    for (const TensorRecord& rec : parsed.records) {
        bool found = false;
        for (Parameter<float>* p : params) {
            if (p->name == rec.name) {
                apply(rec, p->value);
                p->trainable = rec.trainable;
                found = true;
                break;
            }
        }
        if (!found) {
            for (nn::ModuleBuffer<float>* b : buffers) {
                if (b->name == rec.name) {
                    apply(rec, b->value);
                    found = true;
                    break;
                }
            }
        }
        if (!found) {
            throw ModelIoError(path + ": file tensor " + rec.name + " does not exist in model",
                               rec.file_offset);
        }
    }
    if (applied_names.size() != params.size() + buffers.size()) {
        std::string missing;
        for (Parameter<float>* p : params) {
            if (applied_names.count(p->name) == 0) {
                missing = p->name;
                break;
            }
        }
        if (missing.empty()) {
            for (nn::ModuleBuffer<float>* b : buffers) {
                if (applied_names.count(b->name) == 0) {
                    missing = b->name;
                    break;
                }
            }
        }
        throw ModelIoError(path + ": file is missing model tensor " + missing, 0);
    }
    return model;
}

void import_weights(Classifier<float>& model, const std::string& path) {
    const ParsedModel parsed = parse_container(path);
    std::vector<Parameter<float>*> params = model.parameters();
    std::vector<nn::ModuleBuffer<float>*> buffers = model.buffers();
    for (const TensorRecord& rec : parsed.records) {
        Tensor<float>* dst = nullptr;
        for (Parameter<float>* p : params) {
            if (p->name == rec.name) {
                dst = &p->value;
                break;
            }
        }
        if (dst == nullptr) {
            for (nn::ModuleBuffer<float>* b : buffers) {
                if (b->name == rec.name) {
                    dst = &b->value;
                    break;
                }
            }
        }
        if (dst == nullptr) {
            throw ModelIoError(path + ": no tensor named " + rec.name + " in model",
                               rec.file_offset);
        }
        if (dst->shape() != rec.shape) {
            throw ModelIoError(path + ": shape mismatch for tensor " + rec.name + ": file " +
                                   shape_text(rec.shape) + " vs model " +
                                   shape_text(dst->shape()),
                               rec.file_offset);
        }
        std::memcpy(dst->mutable_data(), rec.values.data(), rec.values.size() * sizeof(float));
    }
}

}  // namespace wnet
