#include "stk/experiments/idx.hpp"

#include "stk/errors.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

namespace stk::experiments {

namespace {

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

std::string missing_files_message(const std::string& dir) {
    std::string msg = "MNIST data not found in \"" + dir + "\". Expected the uncompressed IDX files:";
    for (const auto& f : mnist_files()) msg += std::string("\n  ") + f.name + "  sha256 " + f.sha256;
    msg += "\nRun tools/fetch_mnist.sh <dir> or copy the files manually, then pass --data-dir or set STK_DATA_DIR.";
    return msg;
}

}  // namespace

IdxArray parse_idx(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 4) throw FormatError("IDX header truncated", bytes.size());
    if (bytes[0] != 0 || bytes[1] != 0) throw FormatError("IDX magic must start with two zero bytes", 0);
    if (bytes[2] != 0x08) throw FormatError("unsupported IDX element type (only unsigned bytes)", 2);
    const std::size_t ndim = bytes[3];
    if (ndim == 0) throw FormatError("IDX dimension count must be positive", 3);
    if (bytes.size() < 4 + 4 * ndim) throw FormatError("IDX dimension sizes truncated", bytes.size());
    IdxArray out;
    std::size_t total = 1;
    for (std::size_t d = 0; d < ndim; ++d) {
        const std::size_t n = read_be32(bytes, 4 + 4 * d);
        out.dims.push_back(n);
        total *= n;
    }
    const std::size_t header = 4 + 4 * ndim;
    if (bytes.size() < header + total) {
        throw FormatError("IDX payload truncated: expected " + std::to_string(total) + " bytes", bytes.size());
    }
    if (bytes.size() > header + total) throw FormatError("IDX file has trailing bytes", header + total);
    out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
    return out;
}

IdxArray read_idx(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open IDX file " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_idx(bytes);
}

ImageSet read_idx_images(const std::string& path) {
    const IdxArray a = read_idx(path);
    if (a.dims.size() != 3) throw FormatError("image file must have 3 dimensions", 3);
    ImageSet s;
    s.rows = a.dims[1];
    s.cols = a.dims[2];
    const auto count = static_cast<Eigen::Index>(a.dims[0]);
    const auto px = static_cast<Eigen::Index>(s.rows * s.cols);
    s.pixels.resize(count, px);
    for (Eigen::Index i = 0; i < count; ++i) {
        for (Eigen::Index k = 0; k < px; ++k) {
            s.pixels(i, k) = a.data[static_cast<std::size_t>(i * px + k)] / 255.0;
        }
    }
    return s;
}

std::vector<int> read_idx_labels(const std::string& path) {
    const IdxArray a = read_idx(path);
    if (a.dims.size() != 1) throw FormatError("label file must have 1 dimension", 3);
    return std::vector<int>(a.data.begin(), a.data.end());
}

const std::vector<MnistFile>& mnist_files() {
    static const std::vector<MnistFile> files = {
        {"train-images-idx3-ubyte", "ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db"},
        {"train-labels-idx1-ubyte", "65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5"},
        {"t10k-images-idx3-ubyte", "0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7"},
        {"t10k-labels-idx1-ubyte", "ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2"},
    };
    return files;
}

DatasetBundle load_mnist(const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& f : mnist_files()) {
        if (dir.empty() || !fs::exists(fs::path(dir) / f.name)) throw DataError(missing_files_message(dir));
    }
    auto path = [&](const char* name) { return (fs::path(dir) / name).string(); };
    DatasetBundle b;
    b.train_images = read_idx_images(path("train-images-idx3-ubyte"));
    b.train_labels = read_idx_labels(path("train-labels-idx1-ubyte"));
    b.test_images = read_idx_images(path("t10k-images-idx3-ubyte"));
    b.test_labels = read_idx_labels(path("t10k-labels-idx1-ubyte"));
    if (static_cast<std::size_t>(b.train_images.pixels.rows()) != b.train_labels.size() ||
        static_cast<std::size_t>(b.test_images.pixels.rows()) != b.test_labels.size()) {
        throw FormatError("image and label counts differ", 4);
    }
    for (const auto* labels : {&b.train_labels, &b.test_labels}) {
        for (int l : *labels) {
            if (l < 0 || l > 9) throw FormatError("label outside 0..9", 8);
        }
    }
    return b;
}

}  // namespace stk::experiments
