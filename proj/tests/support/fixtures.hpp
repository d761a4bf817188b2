#pragma once

#include "patchlens/image.hpp"
#include "oracles.hpp"

namespace patchlens::testing {

// Images that repeat a random 3-channel 3x3 tile whose 27 entries sum to zero.
// Every 3x3x3 window holds each tile entry exactly once, so all patches lie in
// the 26-dimensional zero-sum subspace and the all-ones direction is never
// reached by a filter built from patches.
inline LabeledImageSet zero_sum_periodic_set(int n_images, int side, std::uint64_t seed) {
    LabeledImageSet set;
    for (int n = 0; n < n_images; ++n) {
        Matrix tile = random_matrix(3, 9, seed + static_cast<std::uint64_t>(n));
        tile.array() -= tile.mean();
        Image img(3, side, side);
        for (int c = 0; c < 3; ++c)
            for (int r = 0; r < side; ++r)
                for (int col = 0; col < side; ++col) img.at(c, r, col) = tile(c, (r % 3) * 3 + col % 3);
        set.images.push_back(std::move(img));
        set.labels.push_back(n % 2);
    }
    return set;
}

}  // namespace patchlens::testing
