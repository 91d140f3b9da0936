#include "pcgk/tensor/param_store.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "pcgk/common/error.hpp"

namespace pcgk::tensor {

namespace {

template <typename T>
void put(std::ostream& os, T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

class Reader {
public:
    explicit Reader(std::istream& is) : is_(is) {}

    template <typename T>
    T get(const char* what) {
        unsigned char buf[sizeof(T)];
        read(buf, sizeof(T), what);
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        T v;
        std::memcpy(&v, buf, sizeof(T));
        return v;
    }

    void read(void* dst, std::size_t n, const char* what) {
        is_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(is_.gcount()) != n)
            throw DataError("param store: truncated while reading " + std::string(what) + " at byte offset " +
                            std::to_string(offset_ + static_cast<std::size_t>(is_.gcount())));
        offset_ += n;
    }

    std::size_t offset() const { return offset_; }

private:
    std::istream& is_;
    std::size_t offset_ = 0;
};

}  // namespace

Value ParamStore::add(const std::string& name, Value value) {
    if (name.empty() || name.size() > UINT16_MAX) throw ShapeError("param store: invalid parameter name length");
    if (contains(name)) throw ShapeError("param store: duplicate parameter '" + name + "'");
    value.set_requires_grad(true);
    params_.emplace(name, value);
    return value;
}

const Value& ParamStore::get(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ShapeError("param store: no parameter named '" + name + "'");
    return it->second;
}

std::size_t ParamStore::total_elements() const {
    std::size_t n = 0;
    for (const auto& [_, v] : params_) n += v.size();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& [_, v] : params_) const_cast<Value&>(v).zero_grad();
}

void ParamStore::assign_from(const ParamStore& other) {
    if (other.size() != size())
        throw ShapeError("param store: expected " + std::to_string(size()) + " parameters, got " +
                         std::to_string(other.size()));
    for (auto& [name, v] : params_) {
        const Value& src = other.get(name);
        if (src.shape() != v.shape())
            throw ShapeError("param store: '" + name + "' has shape " + shape_str(v.shape()) + ", source has " +
                             shape_str(src.shape()));
        Value dst = v;
        std::copy(src.data().begin(), src.data().end(), dst.mutable_data().begin());
    }
}

void ParamStore::save(std::ostream& os) const {
    os.write("PCGK", 4);
    put<std::uint32_t>(os, kFormatVersion);
    put<std::uint64_t>(os, params_.size());
    for (const auto& [name, v] : params_) {
        put<std::uint16_t>(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint8_t>(os, static_cast<std::uint8_t>(v.rank()));
        for (auto e : v.shape()) put<std::uint64_t>(os, e);
        for (double x : v.data()) put<double>(os, x);
    }
    if (!os) throw DataError("param store: write failed");
}

ParamStore ParamStore::load(std::istream& is) {
    Reader r(is);
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, "PCGK", 4) != 0) throw DataError("param store: bad magic at byte offset 0");
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFormatVersion)
        throw DataError("param store: unsupported version " + std::to_string(version) + " at byte offset 4");
    const auto count = r.get<std::uint64_t>("parameter count");
    ParamStore store;
    for (std::uint64_t p = 0; p < count; ++p) {
        const auto len = r.get<std::uint16_t>("name length");
        std::string name(len, '\0');
        r.read(name.data(), len, "name");
        const auto rank = r.get<std::uint8_t>("rank");
        if (rank == 0) throw DataError("param store: rank 0 for '" + name + "' at byte offset " + std::to_string(r.offset()));
        Shape shape(rank);
        for (auto& e : shape) e = r.get<std::uint64_t>("dims");
        const std::size_t n = numel(shape);
        if (n == 0 || n > (std::size_t{1} << 32))
            throw DataError("param store: implausible shape " + shape_str(shape) + " for '" + name + "'");
        std::vector<double> data(n);
        for (auto& x : data) x = r.get<double>("data");
        try {
            store.add(name, Value(std::move(shape), std::move(data), true));
        } catch (const ShapeError& e) {
            throw DataError(std::string("param store: ") + e.what());
        }
    }
    return store;
}

void ParamStore::save_file(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("param store: cannot open '" + path.string() + "' for writing");
    save(os);
}

ParamStore ParamStore::load_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("param store: cannot open '" + path.string() + "'");
    return load(is);
}

}  // namespace pcgk::tensor
