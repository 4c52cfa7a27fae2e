#include "branchlab/rng.hpp"

namespace branchlab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53;
constexpr std::uint32_t kMul1 = 0xCD9E8D57;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t prod = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(prod >> 32);
    lo = static_cast<std::uint32_t>(prod);
}

}  // namespace

Philox4x32::Philox4x32(std::uint64_t key)
    : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)}
{
}

void Philox4x32::refill()
{
    auto ctr = counter_;
    auto key = key_;
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    block_ = ctr;
    next_ = 0;
    for (auto& word : counter_)
        if (++word != 0)
            break;
}

Philox4x32::result_type Philox4x32::operator()()
{
    if (next_ == 4)
        refill();
    return block_[next_++];
}

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_key(std::uint64_t parent, std::uint64_t tag)
{
    return mix64(parent ^ mix64(tag + 0x632BE59BD9B4E019ULL));
}

std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica)
{
    return derive_key(mix64(seed), replica);
}

}  // namespace branchlab
