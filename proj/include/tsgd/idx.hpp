#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "tsgd/dataset.hpp"

namespace tsgd {

/// Load an MNIST-style IDX image/label pair into a flattened dataset
/// (p = rows*cols, pixel values kept in [0, 255], spatial shape retained
/// as metadata). Magic numbers: 0x00000803 for images, 0x00000801 for
/// labels, both big-endian. `limit` truncates to the first samples.
Dataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                        std::optional<std::size_t> limit = std::nullopt);

}  // namespace tsgd
