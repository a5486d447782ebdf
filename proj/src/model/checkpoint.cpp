// Copyright 2026 The adfg Authors
// SPDX-License-Identifier: Apache-2.0

#include "adfg/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "adfg/common/error.hpp"

namespace adfg::model {

static_assert(std::endian::native == std::endian::little, "container io assumes a little-endian host");

const std::string* TensorContainer::find_meta(const std::string& key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return &v;
    }
    return nullptr;
}

const Tensor<float>* TensorContainer::find_tensor(const std::string& name) const {
    for (const auto& [n, t] : tensors) {
        if (n == name) return &t;
    }
    return nullptr;
}

namespace {

constexpr char kMagic[4] = {'A', 'D', 'F', 'G'};
constexpr std::uint32_t kMaxString = 1u << 20;

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        ADFG_REQUIRE(out_.good(), ErrorKind::io, "cannot open for writing: " + path.string());
    }
    template <typename V>
    void pod(V v) {
        out_.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void str(const std::string& s) {
        pod(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void finish(const std::filesystem::path& path) {
        out_.flush();
        ADFG_REQUIRE(out_.good(), ErrorKind::io, "write failed: " + path.string());
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
        ADFG_REQUIRE(in_.good(), ErrorKind::io, "cannot open: " + path.string());
    }
    template <typename V>
    V pod() {
        V v{};
        bytes(&v, sizeof v);
        return v;
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        ADFG_REQUIRE(static_cast<std::size_t>(in_.gcount()) == n, ErrorKind::parse, "truncated container: " + path_.string());
    }
    std::string str() {
        const auto n = pod<std::uint32_t>();
        ADFG_REQUIRE(n <= kMaxString, ErrorKind::parse, "oversized string in container: " + path_.string());
        std::string s(n, '\0');
        bytes(s.data(), n);
        return s;
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
};

}  // namespace

void write_container(const std::filesystem::path& path, const TensorContainer& c) {
    Writer w(path);
    w.bytes(kMagic, 4);
    w.pod(kContainerVersion);
    for (std::int32_t f : c.config.as_array()) w.pod(f);
    w.pod(static_cast<std::uint32_t>(c.metadata.size()));
    for (const auto& [k, v] : c.metadata) {
        w.str(k);
        w.str(v);
    }
    w.pod(static_cast<std::uint32_t>(c.tensors.size()));
    for (const auto& [name, t] : c.tensors) {
        w.str(name);
        w.pod(static_cast<std::uint32_t>(t.rank()));
        for (std::int64_t d : t.shape()) w.pod(static_cast<std::int32_t>(d));
        w.bytes(t.data(), static_cast<std::size_t>(t.numel()) * sizeof(float));
    }
    w.finish(path);
}

TensorContainer read_container(const std::filesystem::path& path) {
    Reader r(path);
    char magic[4];
    r.bytes(magic, 4);
    ADFG_REQUIRE(std::memcmp(magic, kMagic, 4) == 0, ErrorKind::parse, "not an ADFG container: " + path.string());
    const auto version = r.pod<std::uint32_t>();
    ADFG_REQUIRE(version == kContainerVersion, ErrorKind::parse,
            "unsupported container version " + std::to_string(version) + ": " + path.string());
    TensorContainer c;
    std::array<std::int32_t, 8> fields{};
    for (std::int32_t& f : fields) f = r.pod<std::int32_t>();
    c.config = ModelConfig::from_array(fields);
    const auto n_meta = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_meta; ++i) {
        std::string k = r.str();
        std::string v = r.str();
        c.metadata.emplace_back(std::move(k), std::move(v));
    }
    const auto n_tensors = r.pod<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_tensors; ++i) {
        std::string name = r.str();
        const auto rank = r.pod<std::uint32_t>();
        ADFG_REQUIRE(rank >= 1 && rank <= 4, ErrorKind::parse, "bad tensor rank for " + name);
        numerics::Shape shape;
        std::int64_t numel = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            const auto dim = r.pod<std::int32_t>();
            ADFG_REQUIRE(dim >= 0, ErrorKind::parse, "negative dimension for " + name);
            shape.push_back(dim);
            numel *= dim;
            ADFG_REQUIRE(numel <= (std::int64_t{1} << 34), ErrorKind::parse, "tensor too large: " + name);
        }
        Tensor<float> t(std::move(shape));
        r.bytes(t.data(), static_cast<std::size_t>(numel) * sizeof(float));
        c.tensors.emplace_back(std::move(name), std::move(t));
    }
    return c;
}

void save_model(const std::filesystem::path& path, const TransformerModel& model,
                std::vector<std::pair<std::string, std::string>> metadata) {
    TensorContainer c;
    c.config = model.config();
    c.metadata = std::move(metadata);
    c.metadata.emplace_back("kind", "model");
    for (const auto& [name, t] : model.named_tensors()) c.tensors.emplace_back(name, *t);
    write_container(path, c);
}

TransformerModel load_model(const std::filesystem::path& path) {
    TensorContainer c = read_container(path);
    const std::string* kind = c.find_meta("kind");
    ADFG_REQUIRE(kind != nullptr && *kind == "model", ErrorKind::parse, "not a model checkpoint: " + path.string());
    c.config.validate();
    TransformerModel model(c.config, 0);
    for (auto& [name, dst] : model.mutable_named_tensors()) {
        const Tensor<float>* src = c.find_tensor(name);
        ADFG_REQUIRE(src != nullptr, ErrorKind::parse, "checkpoint lacks tensor " + name);
        ADFG_REQUIRE(src->shape() == dst->shape(), ErrorKind::parse, "shape mismatch for tensor " + name);
        *dst = *src;
    }
    return model;
}

}  // namespace adfg::model
