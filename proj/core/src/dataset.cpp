#include "fop/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fop/eigen.hpp"
#include "fop/rng.hpp"

namespace fop {

namespace {

std::uint32_t read_be32(std::ifstream& f, const std::string& path) {
  unsigned char buf[4];
  if (!f.read(reinterpret_cast<char*>(buf), 4)) {
    throw TruncatedFileError("load_idx: " + path + " is truncated");
  }
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgf(images_path, std::ios::binary);
  if (!imgf) throw FormatError("load_idx: cannot open " + images_path);
  std::ifstream lblf(labels_path, std::ios::binary);
  if (!lblf) throw FormatError("load_idx: cannot open " + labels_path);

  const std::uint32_t img_magic = read_be32(imgf, images_path);
  if (img_magic != 2051) {
    throw BadMagicError("load_idx: bad magic " + std::to_string(img_magic) +
                        " in " + images_path + " (expected 2051)");
  }
  const std::uint32_t n_img = read_be32(imgf, images_path);
  const std::uint32_t rows = read_be32(imgf, images_path);
  const std::uint32_t cols = read_be32(imgf, images_path);

  const std::uint32_t lbl_magic = read_be32(lblf, labels_path);
  if (lbl_magic != 2049) {
    throw BadMagicError("load_idx: bad magic " + std::to_string(lbl_magic) +
                        " in " + labels_path + " (expected 2049)");
  }
  const std::uint32_t n_lbl = read_be32(lblf, labels_path);

  if (n_img != n_lbl) {
    throw CountMismatchError("load_idx: " + std::to_string(n_img) + " images vs " +
                             std::to_string(n_lbl) + " labels");
  }

  const std::size_t d = std::size_t(rows) * cols;
  std::vector<unsigned char> pixels(std::size_t(n_img) * d);
  if (!imgf.read(reinterpret_cast<char*>(pixels.data()),
                 static_cast<std::streamsize>(pixels.size()))) {
    throw TruncatedFileError("load_idx: " + images_path + " is truncated");
  }
  std::vector<unsigned char> raw_labels(n_img);
  if (!lblf.read(reinterpret_cast<char*>(raw_labels.data()),
                 static_cast<std::streamsize>(raw_labels.size()))) {
    throw TruncatedFileError("load_idx: " + labels_path + " is truncated");
  }

  Dataset ds;
  ds.inputs = Mat(n_img, d);
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    ds.inputs.values()[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  ds.labels.resize(n_img);
  int max_label = 0;
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    ds.labels[i] = static_cast<int>(raw_labels[i]);
    if (ds.labels[i] > max_label) max_label = ds.labels[i];
  }
  ds.class_count = max_label < 10 ? 10 : static_cast<std::size_t>(max_label) + 1;
  return ds;
}

namespace {

constexpr std::size_t kSynDim = 64;
constexpr std::size_t kSynClasses = 10;
constexpr std::uint64_t kSynStructureSeed = 0x5eedf00dULL;
constexpr double kSynNoiseMax = 6.0;   // stddev along the noisiest direction
constexpr double kSynNoiseMin = 0.5;   // stddev along the cleanest direction
constexpr double kSynSeparation = 1.6; // class-mean spread in informative dims
constexpr double kSynSquashT = 2.5;

struct SynStructure {
  Mat q;            // orthonormal mixing
  Vec scales;       // per-rotated-dim noise stddev, decreasing
  Mat means_rot;    // classes x dim, in rotated coordinates
};

const SynStructure& syn_structure() {
  static const SynStructure s = [] {
    SynStructure st;
    Rng rng(kSynStructureSeed);
    Mat sym(kSynDim, kSynDim);
    for (std::size_t i = 0; i < kSynDim; ++i)
      for (std::size_t j = i; j < kSynDim; ++j) {
        const double v = rng.next_gaussian();
        sym(i, j) = v;
        sym(j, i) = v;
      }
    st.q = sym_eigendecompose(sym).eigenvectors;

    st.scales.resize(kSynDim);
    for (std::size_t i = 0; i < kSynDim; ++i) {
      const double frac = static_cast<double>(i) / static_cast<double>(kSynDim - 1);
      st.scales[i] = kSynNoiseMax * std::pow(kSynNoiseMin / kSynNoiseMax, frac);
    }

    // Class identity lives only in the second (low-noise) half of the rotated
    // coordinates, so the useful gradient directions are the poorly scaled ones.
    st.means_rot = Mat(kSynClasses, kSynDim);
    for (std::size_t c = 0; c < kSynClasses; ++c) {
      for (std::size_t i = kSynDim / 2; i < kSynDim; ++i) {
        st.means_rot(c, i) = kSynSeparation * rng.next_gaussian();
      }
    }
    return st;
  }();
  return s;
}

}  // namespace

Dataset synthetic_dataset(std::size_t n, std::uint64_t seed) {
  const SynStructure& st = syn_structure();
  Rng rng(seed);
  Dataset ds;
  ds.class_count = kSynClasses;
  ds.inputs = Mat(n, kSynDim);
  ds.labels.resize(n);
  Vec rot(kSynDim);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = r % kSynClasses;
    ds.labels[r] = static_cast<int>(c);
    for (std::size_t i = 0; i < kSynDim; ++i) {
      rot[i] = st.means_rot(c, i) + st.scales[i] * rng.next_gaussian();
    }
    for (std::size_t i = 0; i < kSynDim; ++i) {
      double x = 0.0;
      for (std::size_t j = 0; j < kSynDim; ++j) x += st.q(i, j) * rot[j];
      ds.inputs(r, i) = 1.0 / (1.0 + std::exp(-x / kSynSquashT));
    }
  }
  return ds;
}

namespace {

Dataset take_rows(const Dataset& ds, std::size_t n) {
  if (n >= ds.inputs.rows()) return ds;
  Dataset out;
  out.class_count = ds.class_count;
  out.inputs = Mat(n, ds.inputs.cols());
  out.labels.assign(ds.labels.begin(), ds.labels.begin() + static_cast<long>(n));
  std::copy(ds.inputs.data(), ds.inputs.data() + n * ds.inputs.cols(),
            out.inputs.data());
  return out;
}

}  // namespace

TrainTestData default_dataset(std::size_t train_n, std::size_t test_n) {
  const char* dir = std::getenv("FOP_DATA_DIR");
  if (dir != nullptr) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    const fs::path ti = base / "train-images-idx3-ubyte";
    const fs::path tl = base / "train-labels-idx1-ubyte";
    const fs::path vi = base / "t10k-images-idx3-ubyte";
    const fs::path vl = base / "t10k-labels-idx1-ubyte";
    if (fs::exists(ti) && fs::exists(tl) && fs::exists(vi) && fs::exists(vl)) {
      TrainTestData data;
      data.train = take_rows(load_idx(ti.string(), tl.string()), train_n);
      data.test = take_rows(load_idx(vi.string(), vl.string()), test_n);
      data.source = "mnist";
      return data;
    }
  }
  TrainTestData data;
  data.train = synthetic_dataset(train_n, 1000003);
  data.test = synthetic_dataset(test_n, 2000003);
  data.source = "synthetic";
  return data;
}

}  // namespace fop
