#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "pcgk/tensor/value.hpp"

namespace pcgk::tensor {

/// Named learnable parameters, iterated in lexicographic name order.
///
/// Binary layout (little-endian): "PCGK", u32 version = 1, u64 count, then per
/// parameter u16 name length, UTF-8 name, u8 rank, u64 dims[rank], f64 data[].
class ParamStore {
public:
    static constexpr std::uint32_t kFormatVersion = 1;

    explicit ParamStore(std::uint64_t rng_seed = 0) : rng_seed_(rng_seed) {}

    /// Registers a parameter; forces requires_grad. Throws ShapeError on a duplicate name.
    Value add(const std::string& name, Value value);
    const Value& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.count(name) != 0; }

    std::size_t size() const { return params_.size(); }
    std::size_t total_elements() const;
    std::uint64_t rng_seed() const { return rng_seed_; }

    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    void zero_grad();

    /// Copies values from `other` in place; names and shapes must match exactly.
    void assign_from(const ParamStore& other);

    void save(std::ostream& os) const;
    /// Reads one store from the stream; throws DataError naming the byte offset on truncation.
    static ParamStore load(std::istream& is);

    void save_file(const std::filesystem::path& path) const;
    static ParamStore load_file(const std::filesystem::path& path);

private:
    std::map<std::string, Value> params_;
    std::uint64_t rng_seed_;
};

}  // namespace pcgk::tensor
