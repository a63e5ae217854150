// Copyright 2026 The seadapt Authors
// SPDX-License-Identifier: Apache-2.0

#include "seadapt/checkpoint.hpp"

#include <array>
#include <fstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "seadapt/common.hpp"

namespace seadapt {

using json = nlohmann::ordered_json;

namespace {

constexpr std::array<char, 4> kMagic = {'S', 'D', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

json config_to_json(const ModelConfig& c) {
  json j;
  j["image_height"] = c.backbone.image_height;
  j["image_width"] = c.backbone.image_width;
  j["channels"] = c.backbone.channels;
  j["patch_size"] = c.backbone.patch_size;
  j["dim"] = c.backbone.dim;
  j["heads"] = c.backbone.heads;
  j["blocks"] = c.backbone.blocks;
  j["mlp_hidden"] = c.backbone.mlp_hidden;
  j["embed_dim"] = c.embed_dim;
  j["classes"] = c.classes;
  j["dropout"] = c.dropout;
  j["disc_hidden"] = c.disc_hidden;
  return j;
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.backbone.image_height = j.at("image_height").get<int>();
  c.backbone.image_width = j.at("image_width").get<int>();
  c.backbone.channels = j.at("channels").get<int>();
  c.backbone.patch_size = j.at("patch_size").get<int>();
  c.backbone.dim = j.at("dim").get<int>();
  c.backbone.heads = j.at("heads").get<int>();
  c.backbone.blocks = j.at("blocks").get<int>();
  c.backbone.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.embed_dim = j.at("embed_dim").get<int>();
  c.classes = j.at("classes").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.disc_hidden = j.at("disc_hidden").get<int>();
  return c;
}

void write_u32(std::ostream& os, std::uint32_t v) {
  std::array<unsigned char, 4> b;
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& is, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b;
  is.read(reinterpret_cast<char*>(b.data()), 4);
  require(is.good(), "checkpoint ", path.string(), ": truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void write_matrix(std::ostream& os, const ad::Mat& m) {
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    Eigen::Map<Eigen::RowVectorXd>(row.data(), m.cols()) = m.row(i);
    os.write(reinterpret_cast<const char*>(row.data()),
             static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

void read_matrix(std::istream& is, ad::Mat& m,
                 const std::filesystem::path& path, const std::string& name) {
  std::vector<double> row(static_cast<std::size_t>(m.cols()));
  for (int i = 0; i < m.rows(); ++i) {
    is.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    require(is.good(), "checkpoint ", path.string(), ": truncated in '", name,
            "'");
    m.row(i) = Eigen::Map<const Eigen::RowVectorXd>(row.data(), m.cols());
  }
}

struct RawHeader {
  json j;
  std::streampos body_start;
};

RawHeader read_raw_header(std::istream& is,
                          const std::filesystem::path& path) {
  std::array<char, 4> magic;
  is.read(magic.data(), magic.size());
  require(is.good() && magic == kMagic, "checkpoint ", path.string(),
          ": bad magic (not a checkpoint, or corrupt)");
  const std::uint32_t version = read_u32(is, path);
  require(version == kVersion, "checkpoint ", path.string(),
          ": unsupported version ", version);
  const std::uint32_t len = read_u32(is, path);
  std::string buf(len, '\0');
  is.read(buf.data(), static_cast<std::streamsize>(len));
  require(is.good(), "checkpoint ", path.string(), ": truncated header");
  RawHeader h;
  try {
    h.j = json::parse(buf);
  } catch (const json::exception& e) {
    fail("checkpoint ", path.string(), ": corrupt header: ", e.what());
  }
  h.body_start = is.tellg();
  return h;
}

TrainerState state_from_json(const json& j) {
  TrainerState s;
  s.epoch = j.at("epoch").get<int>();
  s.iteration = j.at("iteration").get<long>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model,
                     const TrainerState& state) {
  std::ofstream os(path, std::ios::binary);
  require(os.good(), "checkpoint ", path.string(), ": cannot open for write");

  const std::vector<Parameter*> params = model.parameters();
  json header;
  header["model"] = config_to_json(model.config());
  header["epoch"] = state.epoch;
  header["iteration"] = state.iteration;
  header["seed"] = state.seed;
  json plist = json::array();
  for (const Parameter* p : params) {
    json e;
    e["name"] = p->name;
    e["rows"] = p->value.rows();
    e["cols"] = p->value.cols();
    plist.push_back(e);
  }
  header["params"] = plist;
  const std::string hs = header.dump();

  os.write(kMagic.data(), kMagic.size());
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(hs.size()));
  os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  for (const Parameter* p : params) {
    write_matrix(os, p->value);
    write_matrix(os, p->momentum);
  }
  require(os.good(), "checkpoint ", path.string(), ": write failed");
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "checkpoint ", path.string(), ": cannot open");
  const RawHeader raw = read_raw_header(is, path);
  CheckpointHeader h;
  try {
    h.config = config_from_json(raw.j.at("model"));
    h.state = state_from_json(raw.j);
  } catch (const json::exception& e) {
    fail("checkpoint ", path.string(), ": corrupt header: ", e.what());
  }
  return h;
}

TrainerState load_checkpoint(const std::filesystem::path& path, Model& model) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "checkpoint ", path.string(), ": cannot open");
  const RawHeader raw = read_raw_header(is, path);

  ModelConfig stored;
  TrainerState state;
  try {
    stored = config_from_json(raw.j.at("model"));
    state = state_from_json(raw.j);
  } catch (const json::exception& e) {
    fail("checkpoint ", path.string(), ": corrupt header: ", e.what());
  }

  const json current = config_to_json(model.config());
  require(config_to_json(stored) == current, "checkpoint ", path.string(),
          ": architecture mismatch (stored ", config_to_json(stored).dump(),
          ", model ", current.dump(), ")");

  const std::vector<Parameter*> params = model.parameters();
  const json& plist = raw.j.at("params");
  require(plist.is_array() && plist.size() == params.size(), "checkpoint ",
          path.string(), ": parameter list size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter* p = params[i];
    const json& e = plist[i];
    require(e.at("name").get<std::string>() == p->name &&
                e.at("rows").get<long>() == p->value.rows() &&
                e.at("cols").get<long>() == p->value.cols(),
            "checkpoint ", path.string(), ": parameter ", i, " ('", p->name,
            "') does not match the stored layout");
    read_matrix(is, p->value, path, p->name);
    read_matrix(is, p->momentum, path, p->name);
  }
  return state;
}

}  // namespace seadapt
