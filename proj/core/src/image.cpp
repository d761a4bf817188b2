#include "patchlens/image.hpp"

#include "patchlens/types.hpp"

namespace patchlens {

Image::Image(int c, int h, int w, double fill)
    : channels(c), height(h), width(w),
      values(static_cast<std::size_t>(c) * h * w, fill) {
    if (c <= 0 || h <= 0 || w <= 0) throw InvalidArgument("image dimensions must be positive");
}

void LabeledImageSet::validate() const {
    if (labels.size() != images.size())
        throw InvalidArgument("label count " + std::to_string(labels.size()) +
                              " does not match image count " + std::to_string(images.size()));
    if (images.empty()) return;
    const Image& first = images.front();
    for (std::size_t i = 1; i < images.size(); ++i) {
        const Image& img = images[i];
        if (img.channels != first.channels || img.height != first.height || img.width != first.width)
            throw InvalidArgument("image " + std::to_string(i) + " has a different shape than image 0");
    }
}

}  // namespace patchlens
