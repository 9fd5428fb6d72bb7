#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fop/error.hpp"
#include "fop/mat.hpp"

namespace fop {

struct BadMagicError : FormatError {
  using FormatError::FormatError;
};
struct TruncatedFileError : FormatError {
  using FormatError::FormatError;
};
struct CountMismatchError : FormatError {
  using FormatError::FormatError;
};

struct Dataset {
  Mat inputs;               // N x d, entries in [0, 1]
  std::vector<int> labels;  // in [0, class_count)
  std::size_t class_count = 0;
};

// IDX pair: big-endian magic 2051 (images) / 2049 (labels), dims, raw bytes.
// Pixels scale by 1/255. Image and label counts must agree.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Deterministic 10-class blobs with anisotropic, correlated noise; class
// structure concentrated in the low-noise directions so conditioning matters.
// Entries squashed into (0, 1). The structure (means, mixing) is fixed; seed
// varies only the sample noise, so train/test splits use different seeds.
Dataset synthetic_dataset(std::size_t n, std::uint64_t seed);

// The 10k/2k pair used by the built-in experiments: MNIST from FOP_DATA_DIR
// when the four IDX files are present, otherwise the synthetic fallback.
struct TrainTestData {
  Dataset train;
  Dataset test;
  std::string source;  // "mnist" or "synthetic"
};
TrainTestData default_dataset(std::size_t train_n, std::size_t test_n);

}  // namespace fop
