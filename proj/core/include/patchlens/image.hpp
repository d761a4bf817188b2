#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace patchlens {

// A multi-channel image stored channel-major, then row-major:
// values[ch * height * width + row * width + col].
struct Image {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> values;

    Image() = default;
    Image(int c, int h, int w, double fill = 0.0);

    double at(int ch, int row, int col) const {
        return values[(static_cast<std::size_t>(ch) * height + row) * width + col];
    }
    double& at(int ch, int row, int col) {
        return values[(static_cast<std::size_t>(ch) * height + row) * width + col];
    }
    std::size_t size() const { return values.size(); }
};

struct LabeledImageSet {
    std::vector<Image> images;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return images.size(); }
    bool empty() const { return images.empty(); }

    // Throws InvalidArgument unless all images share a shape and the label
    // vector has one entry per image.
    void validate() const;
};

}  // namespace patchlens
