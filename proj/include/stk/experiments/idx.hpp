#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace stk::experiments {

/// Raw IDX array of unsigned bytes (type code 0x08).
struct IdxArray {
    std::vector<std::size_t> dims;
    std::vector<std::uint8_t> data;
};

/// Parse the big-endian IDX layout: two zero bytes, type byte, dimension count, 32-bit sizes,
/// then the payload. Malformed input throws FormatError with the byte offset.
IdxArray parse_idx(const std::vector<std::uint8_t>& bytes);
/// Read and parse a file; a missing file throws DataError.
IdxArray read_idx(const std::string& path);

/// Images as rows of pixels scaled by 1/255, in file order.
struct ImageSet {
    std::size_t rows = 0;
    std::size_t cols = 0;
    Eigen::MatrixXd pixels;
};

ImageSet read_idx_images(const std::string& path);
std::vector<int> read_idx_labels(const std::string& path);

struct DatasetBundle {
    ImageSet train_images;
    std::vector<int> train_labels;
    ImageSet test_images;
    std::vector<int> test_labels;
};

struct MnistFile {
    const char* name;
    const char* sha256;
};

/// The four uncompressed MNIST files with their SHA-256 digests.
const std::vector<MnistFile>& mnist_files();

/// Load the four files from `dir`. Missing files raise DataError naming the expected files.
DatasetBundle load_mnist(const std::string& dir);

}  // namespace stk::experiments
