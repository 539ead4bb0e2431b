#include "tsgd/idx.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace tsgd {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be_u32(std::ifstream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) {
        throw std::runtime_error(path + ": truncated header");
    }
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

Dataset load_idx_images(const std::string& images_path, const std::string& labels_path,
                        std::optional<std::size_t> limit) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images) throw std::runtime_error("cannot open IDX image file: " + images_path);
    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels) throw std::runtime_error("cannot open IDX label file: " + labels_path);

    const std::uint32_t image_magic = read_be_u32(images, images_path);
    if (image_magic != kImageMagic) {
        throw std::runtime_error(images_path + ": bad image magic number");
    }
    const std::uint32_t image_count = read_be_u32(images, images_path);
    const std::uint32_t height = read_be_u32(images, images_path);
    const std::uint32_t width = read_be_u32(images, images_path);

    const std::uint32_t label_magic = read_be_u32(labels, labels_path);
    if (label_magic != kLabelMagic) {
        throw std::runtime_error(labels_path + ": bad label magic number");
    }
    const std::uint32_t label_count = read_be_u32(labels, labels_path);
    if (image_count != label_count) {
        throw std::runtime_error("image/label count mismatch: " + std::to_string(image_count) +
                                 " images vs " + std::to_string(label_count) + " labels");
    }

    std::size_t n = image_count;
    if (limit) n = std::min(n, *limit);
    const std::size_t pixels = static_cast<std::size_t>(height) * width;

    Dataset data;
    data.rows = n;
    data.cols = pixels;
    data.task = Task::classification;
    data.num_classes = 10;
    data.name = std::filesystem::path(images_path).stem().string();
    data.spatial_shape = {height, width, 1};
    data.features.resize(n * pixels);
    data.labels.resize(n);

    std::vector<unsigned char> buf(pixels);
    for (std::size_t i = 0; i < n; ++i) {
        if (!images.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels))) {
            throw std::runtime_error(images_path + ": truncated at sample " + std::to_string(i));
        }
        double* out = data.features.data() + i * pixels;
        for (std::size_t j = 0; j < pixels; ++j) out[j] = static_cast<double>(buf[j]);

        char lbl;
        if (!labels.read(&lbl, 1)) {
            throw std::runtime_error(labels_path + ": truncated at sample " + std::to_string(i));
        }
        const auto cls = static_cast<unsigned char>(lbl);
        if (cls > 9) {
            throw std::runtime_error(labels_path + ": label " + std::to_string(int(cls)) +
                                     " outside 0..9 at sample " + std::to_string(i));
        }
        data.labels[i] = static_cast<double>(cls);
    }
    validate_dataset(data);
    return data;
}

}  // namespace tsgd
