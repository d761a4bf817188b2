#pragma once

#include <cstdint>
#include <random>

namespace patchlens {

// Seeded random stream used by every stochastic routine in the library.
//
// The raw generator is std::mt19937_64, whose output sequence is fixed by the
// standard. Everything derived from it (uniforms, normals, coin flips, indices)
// is computed here rather than through <random> distributions so that results
// are bit-identical across standard library implementations:
//   uniform()   = (x >> 11) * 2^-53, in [0, 1)
//   normal()    = Box-Muller on two uniforms, both outputs used in order
//   coin()      = top bit of one draw
//   index(n)    = rejection sampling on the raw draw, unbiased
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    bool coin() { return (engine_() >> 63) != 0; }
    std::uint64_t index(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

}  // namespace patchlens
