#include "racma/rng.hpp"

namespace racma
{
    std::uint64_t mix64(std::uint64_t x)
    {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::uint64_t derive_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c)
    {
        return mix64(mix64(mix64(a) ^ b) ^ c);
    }

    Rng StreamFactory::stream(std::uint64_t iteration, StreamPurpose purpose) const
    {
        return Rng(derive_seed(seed_, iteration, static_cast<std::uint64_t>(purpose)));
    }

    StreamFactory StreamFactory::child(std::uint64_t index) const
    {
        return StreamFactory(derive_seed(seed_, ~index, 0x5eedULL));
    }
}
