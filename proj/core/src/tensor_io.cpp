// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/tensor_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "seadapt/common.hpp"

namespace seadapt {

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'D', 'T', 'N'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b;
  is.read(reinterpret_cast<char*>(b.data()), 4);
  require(is.good(), "tensor blob ", path.string(), ": truncated header");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensor_blob(const std::filesystem::path& path,
                       const TensorBlob& blob) {
  require(blob.count >= 0 && blob.height > 0 && blob.width > 0 &&
              blob.channels > 0,
          "tensor blob: bad dimensions ", blob.count, "x", blob.height, "x",
          blob.width, "x", blob.channels);
  require(blob.data.rows() == blob.count && blob.data.cols() == blob.pixels(),
          "tensor blob: data shape ", blob.data.rows(), "x", blob.data.cols(),
          " does not match declared dimensions");

  std::ofstream os(path, std::ios::binary);
  require(os.good(), "tensor blob ", path.string(), ": cannot open for write");
  os.write(kMagic.data(), kMagic.size());
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(blob.count));
  write_u32(os, static_cast<std::uint32_t>(blob.height));
  write_u32(os, static_cast<std::uint32_t>(blob.width));
  write_u32(os, static_cast<std::uint32_t>(blob.channels));

  // Row by row: Eigen matrices are column-major, the file is row-major.
  std::vector<double> row(static_cast<std::size_t>(blob.pixels()));
  for (int i = 0; i < blob.count; ++i) {
    Eigen::Map<Eigen::RowVectorXd>(row.data(), blob.pixels()) =
        blob.data.row(i);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  require(os.good(), "tensor blob ", path.string(), ": write failed");
}

TensorBlob read_tensor_blob(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "tensor blob ", path.string(), ": cannot open");

  std::array<char, 4> magic;
  is.read(magic.data(), magic.size());
  require(is.good() && magic == kMagic, "tensor blob ", path.string(),
          ": bad magic");
  const std::uint32_t version = read_u32(is, path);
  require(version == kVersion, "tensor blob ", path.string(),
          ": unsupported version ", version);

  TensorBlob blob;
  blob.count = static_cast<int>(read_u32(is, path));
  blob.height = static_cast<int>(read_u32(is, path));
  blob.width = static_cast<int>(read_u32(is, path));
  blob.channels = static_cast<int>(read_u32(is, path));
  require(blob.height > 0 && blob.width > 0 && blob.channels > 0,
          "tensor blob ", path.string(), ": bad dimensions");

  blob.data.resize(blob.count, blob.pixels());
  std::vector<double> row(static_cast<std::size_t>(blob.pixels()));
  for (int i = 0; i < blob.count; ++i) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    require(is.good(), "tensor blob ", path.string(), ": truncated at image ",
            i);
    blob.data.row(i) =
        Eigen::Map<const Eigen::RowVectorXd>(row.data(), blob.pixels());
  }
  return blob;
}

namespace {

// Splits "file.tns:7" into file and index.
std::pair<std::string, int> split_ref(const std::string& ref) {
  const auto pos = ref.rfind(':');
  require(pos != std::string::npos && pos + 1 < ref.size(),
          "image reference '", ref, "': expected <file>.tns:<index>");
  const std::string file = ref.substr(0, pos);
  int index = 0;
  try {
    std::size_t used = 0;
    index = std::stoi(ref.substr(pos + 1), &used);
    require(used == ref.size() - pos - 1 && index >= 0, "bad index");
  } catch (const std::exception&) {
    fail("image reference '", ref, "': bad index");
  }
  return {file, index};
}

}  // namespace

ImageStore::ImageStore(std::filesystem::path base_dir)
    : base_dir_(std::move(base_dir)) {}

const TensorBlob& ImageStore::blob_for(const std::string& file) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(file);
  if (it == cache_.end()) {
    it = cache_.emplace(file, read_tensor_blob(base_dir_ / file)).first;
  }
  return it->second;
}

Eigen::RowVectorXd ImageStore::image(const std::string& ref) const {
  const auto [file, index] = split_ref(ref);
  const TensorBlob& blob = blob_for(file);
  require(index < blob.count, "image reference '", ref, "': index ", index,
          " out of range (blob holds ", blob.count, ")");
  return blob.data.row(index);
}

ImageDims ImageStore::dims(const std::string& ref) const {
  const auto [file, index] = split_ref(ref);
  const TensorBlob& blob = blob_for(file);
  require(index < blob.count, "image reference '", ref, "': index ", index,
          " out of range (blob holds ", blob.count, ")");
  return {blob.height, blob.width, blob.channels};
}

Eigen::MatrixXd ImageStore::batch(const std::vector<std::string>& refs) const {
  require(!refs.empty(), "image batch: no references given");
  const ImageDims d0 = dims(refs.front());
  Eigen::MatrixXd out(static_cast<int>(refs.size()), d0.pixels());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    require(dims(refs[i]) == d0, "image batch: '", refs[i],
            "' has different dimensions than '", refs.front(), "'");
    out.row(static_cast<int>(i)) = image(refs[i]);
  }
  return out;
}

}  // namespace seadapt
