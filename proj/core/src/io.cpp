#include "deeppde/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace deeppde {

namespace {

// All integers little-endian; doubles as IEEE-754 bit patterns.
void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ConfigError("file truncated");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

void write_binary(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return data;
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::string out = "NOPDS1";
  put_u32(out, 1);  // format version
  const auto& ext = ds.inputs.empty() ? std::vector<int>{} : ds.inputs[0].extents;
  put_u32(out, static_cast<std::uint32_t>(ext.size()));
  for (int e : ext) put_u32(out, static_cast<std::uint32_t>(e));
  put_u32(out, static_cast<std::uint32_t>(ds.size()));
  for (const GridFunction& g : ds.inputs)
    for (double v : g.values.values()) put_f64(out, v);
  for (const GridFunction& g : ds.targets)
    for (double v : g.values.values()) put_f64(out, v);

  nlohmann::json meta = ds.metadata;
  if (!ds.inputs.empty()) meta["lengths"] = ds.inputs[0].lengths;
  const std::string blob = meta.dump();
  put_u64(out, blob.size());
  out += blob;
  write_binary(path, out);
}

Dataset load_dataset(const std::string& path) {
  const std::string data = read_binary(path);
  Reader r(data);
  if (r.bytes(6) != "NOPDS1") throw ConfigError("dataset: bad magic in " + path);
  if (r.u32() != 1) throw ConfigError("dataset: unsupported version");
  const std::uint32_t dims = r.u32();
  std::vector<int> ext(dims);
  for (std::uint32_t i = 0; i < dims; ++i) ext[i] = static_cast<int>(r.u32());
  const std::uint32_t count = r.u32();

  std::size_t nodes = 1;
  for (int e : ext) nodes *= static_cast<std::size_t>(e);

  // metadata sits behind the payload; read the payload doubles first
  std::vector<std::vector<double>> in_vals(count), tg_vals(count);
  for (std::uint32_t s = 0; s < count; ++s) {
    in_vals[s].resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) in_vals[s][i] = r.f64();
  }
  for (std::uint32_t s = 0; s < count; ++s) {
    tg_vals[s].resize(nodes);
    for (std::size_t i = 0; i < nodes; ++i) tg_vals[s][i] = r.f64();
  }
  const std::uint64_t blob_len = r.u64();
  const std::string blob = r.bytes(blob_len);
  if (!r.done()) throw ConfigError("dataset: trailing bytes in " + path);

  Dataset ds;
  ds.metadata = nlohmann::json::parse(blob);
  std::vector<double> lengths(dims, 1.0);
  if (ds.metadata.contains("lengths"))
    lengths = ds.metadata.at("lengths").get<std::vector<double>>();
  for (std::uint32_t s = 0; s < count; ++s) {
    ds.inputs.emplace_back(ext, lengths, Tensor(ext, std::move(in_vals[s])));
    ds.targets.emplace_back(ext, lengths, Tensor(ext, std::move(tg_vals[s])));
  }
  ds.validate();
  return ds;
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::string out = "NOPCK1";
  nlohmann::json blob_json = {{"descriptor", ck.descriptor}, {"metadata", ck.metadata}};
  const std::string blob = blob_json.dump();
  put_u64(out, blob.size());
  out += blob;
  put_u64(out, ck.params.size());
  for (double v : ck.params) put_f64(out, v);
  write_binary(path, out);
}

Checkpoint load_checkpoint(const std::string& path) {
  const std::string data = read_binary(path);
  Reader r(data);
  if (r.bytes(6) != "NOPCK1") throw ConfigError("checkpoint: bad magic in " + path);
  const std::uint64_t blob_len = r.u64();
  const nlohmann::json blob = nlohmann::json::parse(r.bytes(blob_len));
  Checkpoint ck;
  ck.descriptor = blob.at("descriptor");
  ck.metadata = blob.value("metadata", nlohmann::json::object());
  const std::uint64_t count = r.u64();
  ck.params.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) ck.params[i] = r.f64();
  if (!r.done()) throw ConfigError("checkpoint: trailing bytes in " + path);

  // structural check: the descriptor's declared parameter count must match
  const std::string type = ck.descriptor.value("type", "");
  std::size_t declared = 0;
  if (type == "mlp") {
    MlpArchitecture arch(ck.descriptor.at("widths").get<std::vector<int>>(),
                         activation_from_string(ck.descriptor.at("activation")));
    declared = arch.param_count();
  } else if (type == "mlp-pair") {
    MlpArchitecture a(ck.descriptor.at("first_widths").get<std::vector<int>>(),
                      activation_from_string(ck.descriptor.at("activation")));
    MlpArchitecture b(ck.descriptor.at("second_widths").get<std::vector<int>>(),
                      activation_from_string(ck.descriptor.at("activation")));
    declared = a.param_count() + b.param_count();
  } else {
    declared = OperatorModel::from_descriptor(ck.descriptor)->param_count();
  }
  if (declared != ck.params.size())
    throw ConfigError("checkpoint: parameter count does not match the descriptor");
  return ck;
}

std::string read_text_file(const std::string& path) { return read_binary(path); }

void write_text_file(const std::string& path, const std::string& text) {
  write_binary(path, text);
}

}  // namespace deeppde
