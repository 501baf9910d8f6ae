#include "dpdist/archive.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dpdist/error.hpp"

namespace dpdist {

namespace {

static_assert(std::endian::native == std::endian::little, "archive code assumes a little-endian host");

constexpr char kMagic[4] = {'D', 'P', 'D', '1'};

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks.
    std::size_t off = 0;
    while (off < bytes.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
        crc = crc32(crc, bytes.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(crc);
}

class Writer {
public:
    template <typename T>
    void put(T v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        out_.insert(out_.end(), p, p + sizeof(T));
    }
    void put_f32(const std::vector<double>& v) {
        for (double x : v) put(static_cast<float>(x));
    }
    std::vector<std::uint8_t>& bytes() { return out_; }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <typename T>
    T get() {
        if (pos_ + sizeof(T) > bytes_.size()) throw IntegrityError("model archive is truncated");
        T v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
        pos_ += sizeof(T);
        return v;
    }
    std::vector<double> get_f32(std::uint64_t n) {
        if (n > (bytes_.size() - pos_) / sizeof(float)) throw IntegrityError("model archive is truncated");
        std::vector<double> v(n);
        for (auto& x : v) x = static_cast<double>(get<float>());
        return v;
    }
    std::size_t position() const noexcept { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const MlpModel& model) {
    Writer w;
    for (char c : kMagic) w.put(c);
    w.put<std::uint32_t>(kArchiveVersion);
    const auto& cfg = model.config;
    w.put<std::uint64_t>(static_cast<std::uint64_t>(cfg.patch_size));
    w.put<std::uint64_t>(cfg.channels);
    w.put<std::uint64_t>(static_cast<std::uint64_t>(cfg.grid_resolution));
    w.put<double>(cfg.sigma);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(cfg.query_frame));
    w.put<std::uint64_t>(cfg.hidden.size());
    for (auto h : cfg.hidden) w.put<std::uint64_t>(h);
    w.put<std::uint64_t>(model.input_mean.size());
    w.put_f32(model.input_mean);
    w.put_f32(model.input_scale);
    for (const auto& l : model.layers) {
        w.put<std::uint64_t>(l.in);
        w.put<std::uint64_t>(l.out);
        w.put<std::uint8_t>(l.batch_norm ? 1 : 0);
        w.put_f32(l.weight);
        w.put_f32(l.bias);
        if (l.batch_norm) {
            w.put_f32(l.gamma);
            w.put_f32(l.beta);
            w.put_f32(l.running_mean);
            w.put_f32(l.running_var);
        }
    }
    w.put<std::uint64_t>(model.steps);
    w.put<std::uint64_t>(model.seed);
    w.put<std::uint32_t>(crc32_of(w.bytes()));
    return std::move(w.bytes());
}

MlpModel deserialize_model(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw FormatError("not a DPD1 model archive (bad magic bytes)");
    }
    if (bytes.size() < 12) throw IntegrityError("model archive is truncated");
    std::uint32_t version = 0;
    std::memcpy(&version, bytes.data() + 4, 4);
    if (version != kArchiveVersion) {
        throw FormatError("unsupported model archive version " + std::to_string(version));
    }
    std::uint32_t stored = 0;
    std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
    if (crc32_of(bytes.first(bytes.size() - 4)) != stored) {
        throw IntegrityError("model archive checksum mismatch (corrupt or truncated)");
    }

    Reader r(bytes.first(bytes.size() - 4));
    r.get<std::uint32_t>();  // magic
    r.get<std::uint32_t>();  // version
    MlpModel model;
    auto& cfg = model.config;
    cfg.patch_size = static_cast<int>(r.get<std::uint64_t>());
    cfg.channels = r.get<std::uint64_t>();
    cfg.grid_resolution = static_cast<int>(r.get<std::uint64_t>());
    cfg.sigma = r.get<double>();
    const auto frame = r.get<std::uint8_t>();
    if (frame > static_cast<std::uint8_t>(QueryFrame::anchor)) throw FormatError("model archive has an unknown query frame");
    cfg.query_frame = static_cast<QueryFrame>(frame);
    const auto n_hidden = r.get<std::uint64_t>();
    if (n_hidden > 64) throw FormatError("model archive declares too many layers");
    cfg.hidden.clear();
    for (std::uint64_t i = 0; i < n_hidden; ++i) cfg.hidden.push_back(r.get<std::uint64_t>());
    try {
        cfg.validate();
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("model archive has invalid hyperparameters: ") + e.what());
    }
    const auto n_in = r.get<std::uint64_t>();
    if (n_in != cfg.input_width()) throw FormatError("model archive input width does not match (k, F)");
    model.input_mean = r.get_f32(n_in);
    model.input_scale = r.get_f32(n_in);

    std::size_t expected_in = cfg.input_width();
    for (std::size_t l = 0; l <= n_hidden; ++l) {
        DenseLayer layer;
        layer.in = r.get<std::uint64_t>();
        layer.out = r.get<std::uint64_t>();
        layer.batch_norm = r.get<std::uint8_t>() != 0;
        const std::size_t expected_out = l < n_hidden ? cfg.hidden[l] : 1;
        if (layer.in != expected_in || layer.out != expected_out || layer.batch_norm != (l < n_hidden)) {
            throw FormatError("model archive layer " + std::to_string(l) + " has inconsistent shape");
        }
        layer.weight = r.get_f32(layer.in * layer.out);
        layer.bias = r.get_f32(layer.out);
        if (layer.batch_norm) {
            layer.gamma = r.get_f32(layer.out);
            layer.beta = r.get_f32(layer.out);
            layer.running_mean = r.get_f32(layer.out);
            layer.running_var = r.get_f32(layer.out);
        }
        expected_in = layer.out;
        model.layers.push_back(std::move(layer));
    }
    model.steps = r.get<std::uint64_t>();
    model.seed = r.get<std::uint64_t>();
    if (r.position() != bytes.size() - 4) throw FormatError("model archive has trailing data");
    model.mode = Mode::inference;
    return model;
}

void save_model(const MlpModel& model, const std::string& path) {
    const auto bytes = serialize_model(model);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing '" + path + "'");
}

MlpModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize_model(bytes);
}

}  // namespace dpdist
