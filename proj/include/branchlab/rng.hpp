#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>

namespace branchlab {

// Philox4x32-10 (Salmon et al., SC'11). Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    explicit Philox4x32(std::uint64_t key = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> block_{};
    unsigned next_ = 4;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag);

// Key of the root particle of a given replica.
std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica);

class Stream {
public:
    explicit Stream(std::uint64_t key) : key_(key), engine_(key) {}

    std::uint64_t key() const { return key_; }
    Stream child(unsigned digit) const { return Stream(derive_key(key_, digit)); }

    // Uniform on [0, 1).
    double uniform() { return std::generate_canonical<double, std::numeric_limits<double>::digits>(engine_); }
    double normal() { return normal_(engine_); }
    Philox4x32& engine() { return engine_; }

private:
    std::uint64_t key_;
    Philox4x32 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace branchlab
