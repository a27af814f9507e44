#include "ssi/models/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "ssi/common/error.h"

namespace ssi::models {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'S', 'I', 'C', 'K', 'P', 'T', '\0'};

template <typename T>
void WriteRaw(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T ReadRaw(std::ifstream& f, const std::string& path) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw ValidationError("truncated checkpoint: " + path);
  return v;
}

}  // namespace

Checkpoint MakeCheckpoint(const SpectralModel& model, int stage, nlohmann::json extra) {
  Checkpoint c;
  c.kind = model.kind();
  c.stage = stage;
  c.config = model.config();
  c.extra = std::move(extra);
  for (const auto& p : model.Parameters()) {
    c.params[p.name] = {p.tensor.shape(), std::vector<double>(p.tensor.data().begin(), p.tensor.data().end())};
  }
  return c;
}

void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt) {
  nlohmann::json header{{"kind", ToString(ckpt.kind)}, {"stage", ckpt.stage}, {"config", ckpt.config},
                        {"extra", ckpt.extra}};
  nlohmann::json entries = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& [name, p] : ckpt.params) {
    entries.push_back({{"name", name}, {"shape", p.shape}, {"offset", offset}});
    offset += p.values.size();
  }
  header["params"] = entries;
  const std::string text = header.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ValidationError("cannot write checkpoint: " + path);
    f.write(kMagic, sizeof(kMagic));
    WriteRaw(f, kCheckpointVersion);
    WriteRaw(f, static_cast<uint64_t>(text.size()));
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, p] : ckpt.params) {
      f.write(reinterpret_cast<const char*>(p.values.data()), static_cast<std::streamsize>(p.values.size() * 8));
    }
    if (!f) throw ValidationError("failed writing checkpoint: " + path);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw ValidationError("cannot move checkpoint into " + path);
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open checkpoint: " + path);
  char magic[8];
  f.read(magic, sizeof(magic));
  if (!f || std::memcmp(magic, kMagic, sizeof(magic)) != 0) throw ValidationError("not a checkpoint file: " + path);
  const auto version = ReadRaw<uint32_t>(f, path);
  if (version != kCheckpointVersion) {
    throw ValidationError("unsupported checkpoint version " + std::to_string(version) + ": " + path);
  }
  const auto header_len = ReadRaw<uint64_t>(f, path);
  std::string text(header_len, '\0');
  f.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!f) throw ValidationError("truncated checkpoint header: " + path);

  Checkpoint c;
  try {
    const auto header = nlohmann::json::parse(text);
    c.kind = ModelKindFromString(header.at("kind").get<std::string>());
    c.stage = header.at("stage").get<int>();
    c.config = header.at("config").get<ModelConfig>();
    c.extra = header.value("extra", nlohmann::json::object());
    std::vector<double> data;
    for (const auto& e : header.at("params")) {
      StoredParam p;
      p.shape = e.at("shape").get<nn::Shape>();
      const auto offset = e.at("offset").get<uint64_t>();
      p.values.resize(nn::NumElements(p.shape));
      f.seekg(static_cast<std::streamoff>(20 + header_len + offset * 8));
      f.read(reinterpret_cast<char*>(p.values.data()), static_cast<std::streamsize>(p.values.size() * 8));
      if (!f) throw ValidationError("truncated checkpoint data: " + path);
      c.params[e.at("name").get<std::string>()] = std::move(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed checkpoint header in " + path + ": " + e.what());
  }
  return c;
}

void LoadParameters(const nn::Module& module, const Checkpoint& ckpt, const std::string& prefix) {
  for (const auto& p : module.Parameters()) {
    const auto it = ckpt.params.find(prefix + p.name);
    if (it == ckpt.params.end()) throw ValidationError("checkpoint is missing parameter " + prefix + p.name);
    if (it->second.shape != p.tensor.shape()) {
      throw ValidationError("shape mismatch for " + prefix + p.name + ": checkpoint " +
                            nn::ShapeString(it->second.shape) + ", model " + nn::ShapeString(p.tensor.shape()));
    }
    nn::Tensor t = p.tensor;
    std::copy(it->second.values.begin(), it->second.values.end(), t.mutable_data().begin());
  }
}

std::unique_ptr<SpectralModel> ModelFromCheckpoint(const Checkpoint& ckpt) {
  auto model = BuildModel(ckpt.kind, ckpt.config, 0);
  LoadParameters(*model, ckpt);
  return model;
}

}  // namespace ssi::models
