#include "mloc/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "mloc/error.hpp"

namespace mloc {

namespace {

constexpr char kMagic[5] = {'M', 'L', 'O', 'C', '1'};

void write_u32(std::ostream& os, std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                                static_cast<unsigned char>((v >> 8) & 0xff),
                                static_cast<unsigned char>((v >> 16) & 0xff),
                                static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f32(std::ostream& os, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    write_u32(os, bits);
}

float read_f32(std::istream& is) {
    const std::uint32_t bits = read_u32(is);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

struct Record {
    LayerKind kind;
    std::vector<std::size_t> shape;
    std::vector<double> values;
};

std::vector<Record> read_records(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("checkpoint: cannot open " + path);
    char magic[5];
    is.read(magic, 5);
    if (!is || std::memcmp(magic, kMagic, 5) != 0) {
        throw Error("checkpoint: bad magic in " + path);
    }
    std::vector<Record> records;
    while (true) {
        const int kind_tag = is.get();
        if (kind_tag == EOF) break;
        const int ndim = is.get();
        if (ndim == EOF || ndim <= 0 || ndim > 8) {
            throw Error("checkpoint: malformed record in " + path);
        }
        Record rec;
        rec.kind = static_cast<LayerKind>(kind_tag);
        std::size_t numel = 1;
        for (int d = 0; d < ndim; ++d) {
            const std::size_t e = read_u32(is);
            rec.shape.push_back(e);
            numel *= e;
        }
        rec.values.resize(numel);
        for (std::size_t i = 0; i < numel; ++i) rec.values[i] = static_cast<double>(read_f32(is));
        if (!is) throw Error("checkpoint: truncated record in " + path);
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

void save_checkpoint(const Network& net, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("checkpoint: cannot write " + path);
    os.write(kMagic, 5);
    for (std::size_t i = 0; i < net.size(); ++i) {
        const Tensor* p = net.layer(i).param();
        if (!p) continue;
        os.put(static_cast<char>(net.layer(i).kind()));
        os.put(static_cast<char>(p->shape.size()));
        for (std::size_t e : p->shape) write_u32(os, static_cast<std::uint32_t>(e));
        for (double v : p->data) write_f32(os, static_cast<float>(v));
    }
    if (!os) throw Error("checkpoint: write failed for " + path);
}

void load_checkpoint(Network& net, const std::string& path) {
    const auto records = read_records(path);
    std::size_t r = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
        Tensor* p = const_cast<Layer&>(net.layer(i)).param();
        if (!p) continue;
        if (r >= records.size()) throw Error("checkpoint: too few records in " + path);
        const Record& rec = records[r++];
        if (rec.kind != net.layer(i).kind() || rec.shape != p->shape) {
            throw Error("checkpoint: record " + std::to_string(r - 1) + " (" +
                        layer_kind_name(rec.kind) + " " + shape_str(rec.shape) +
                        ") does not match layer " + std::to_string(i) + " (" +
                        layer_kind_name(net.layer(i).kind()) + " " + shape_str(p->shape) + ")");
        }
        p->data = rec.values;
    }
    if (r != records.size()) throw Error("checkpoint: extra records in " + path);
}

LoadedModel load_checkpoint_auto(const std::string& path) {
    const auto records = read_records(path);
    if (records.empty()) throw Error("checkpoint: no parameter records in " + path);
    LoadedModel model;
    Rng init_rng(0);  // values are overwritten by the load below
    if (records[0].kind == LayerKind::Conv2d) {
        model.is_image_model = true;
        model.input_channels = records[0].shape[1];
        model.net = build_network(builtin_embedder_specs(), model.input_channels, false, init_rng);
    } else {
        model.is_image_model = false;
        model.input_channels = records[0].shape[1];
        model.net = build_network(embedding_head_specs(), model.input_channels, true, init_rng);
    }
    load_checkpoint(model.net, path);
    return model;
}

}  // namespace mloc
