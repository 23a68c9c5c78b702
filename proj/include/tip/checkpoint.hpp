#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tip/encoder.hpp"
#include "tip/tensor.hpp"

namespace tip {

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t hash = 14695981039346656037ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        hash ^= p[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

inline std::uint64_t fnv1a64(const std::string& s,
                             std::uint64_t hash = 14695981039346656037ULL) {
    return fnv1a64(s.data(), s.size(), hash);
}

inline std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return out;
}

/// Single-file checkpoint: versioned header, config snapshot, then
/// length-prefixed named tensors as little-endian 64-bit floats.
struct Checkpoint {
    static constexpr char kMagic[8] = {'T', 'I', 'P', 'C', 'K', 'P', 'T', '\0'};
    static constexpr std::uint32_t kVersion = 1;

    std::string config_json;
    std::uint64_t graph_hash = 0;
    std::uint64_t epochs = 0;
    double final_loss = 0.0;
    std::vector<std::pair<std::string, Tensor>> tensors;

    static Checkpoint from_model(TipModel& model) {
        Checkpoint c;
        for (Parameter* p : model.params()) c.tensors.emplace_back(p->name, p->value);
        return c;
    }

    /// Copies stored tensors into a freshly built model; names and shapes
    /// must match exactly.
    void apply_to(TipModel& model) const {
        std::size_t applied = 0;
        for (const auto& [name, value] : tensors) {
            if (!model.has(name)) {
                throw std::runtime_error("checkpoint: model has no parameter '" + name + "'");
            }
            Parameter& p = model.at(name);
            if (!p.value.same_shape(value)) {
                throw std::runtime_error("checkpoint: shape mismatch for '" + name + "'");
            }
            p.value = value;
            ++applied;
        }
        if (applied != model.params().size()) {
            throw std::runtime_error("checkpoint: parameter set mismatch");
        }
    }
};

namespace detail {

template <typename T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: unexpected end of file");
    return v;
}

inline void write_string(std::ostream& os, const std::string& s) {
    write_pod<std::uint64_t>(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& is) {
    const auto len = read_pod<std::uint64_t>(is);
    std::string s(len, '\0');
    is.read(s.data(), static_cast<std::streamsize>(len));
    if (!is) throw std::runtime_error("checkpoint: unexpected end of file");
    return s;
}

}  // namespace detail

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write checkpoint: " + path);
    os.write(Checkpoint::kMagic, sizeof(Checkpoint::kMagic));
    detail::write_pod<std::uint32_t>(os, Checkpoint::kVersion);
    detail::write_string(os, c.config_json);
    detail::write_pod<std::uint64_t>(os, c.graph_hash);
    detail::write_pod<std::uint64_t>(os, c.epochs);
    detail::write_pod<double>(os, c.final_loss);
    detail::write_pod<std::uint64_t>(os, c.tensors.size());
    for (const auto& [name, t] : c.tensors) {
        detail::write_string(os, name);
        detail::write_pod<std::uint64_t>(os, t.ndim());
        for (std::size_t d : t.shape()) detail::write_pod<std::uint64_t>(os, d);
        os.write(reinterpret_cast<const char*>(t.data()),
                 static_cast<std::streamsize>(t.size() * sizeof(double)));
    }
    if (!os) throw std::runtime_error("write failure on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[sizeof(Checkpoint::kMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, Checkpoint::kMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a checkpoint file: " + path);
    }
    const auto version = detail::read_pod<std::uint32_t>(is);
    if (version != Checkpoint::kVersion) {
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint c;
    c.config_json = detail::read_string(is);
    c.graph_hash = detail::read_pod<std::uint64_t>(is);
    c.epochs = detail::read_pod<std::uint64_t>(is);
    c.final_loss = detail::read_pod<double>(is);
    const auto count = detail::read_pod<std::uint64_t>(is);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::string name = detail::read_string(is);
        const auto ndim = detail::read_pod<std::uint64_t>(is);
        std::vector<std::size_t> shape(ndim);
        for (auto& d : shape) d = detail::read_pod<std::uint64_t>(is);
        Tensor t(shape);
        is.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!is) throw std::runtime_error("checkpoint: unexpected end of file");
        c.tensors.emplace_back(std::move(name), std::move(t));
    }
    return c;
}

}  // namespace tip
