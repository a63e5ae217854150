// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace seadapt {

// A stack of images stored as one flat matrix: row i holds image i in
// row-major (y, x, channel) order, values are float64 in [0, 1].
struct TensorBlob {
  int count = 0;
  int height = 0;
  int width = 0;
  int channels = 0;
  Eigen::MatrixXd data;  // count x (height*width*channels)

  int pixels() const { return height * width * channels; }
};

// Writes a blob as: magic "SDTN", u32 version, u32 count/height/width/
// channels, then count*height*width*channels little-endian float64.
void write_tensor_blob(const std::filesystem::path& path,
                       const TensorBlob& blob);

// Reads a blob back; throws Error on bad magic, version, or truncation.
TensorBlob read_tensor_blob(const std::filesystem::path& path);

struct ImageDims {
  int height = 0;
  int width = 0;
  int channels = 0;

  int pixels() const { return height * width * channels; }
  bool operator==(const ImageDims&) const = default;
};

// Resolves manifest image references of the form "<file>.tns:<index>"
// against a base directory, loading each blob at most once. Lookups are
// safe to run from multiple threads.
class ImageStore {
 public:
  explicit ImageStore(std::filesystem::path base_dir);

  // Pixel row for one reference.
  Eigen::RowVectorXd image(const std::string& ref) const;

  ImageDims dims(const std::string& ref) const;

  // Stacks several references into a batch matrix; all images must share
  // the same dimensions.
  Eigen::MatrixXd batch(const std::vector<std::string>& refs) const;

  const std::filesystem::path& base_dir() const { return base_dir_; }

 private:
  const TensorBlob& blob_for(const std::string& file) const;

  std::filesystem::path base_dir_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, TensorBlob> cache_;
};

}  // namespace seadapt
