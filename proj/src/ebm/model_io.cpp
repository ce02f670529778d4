#include "lop/model_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace lop {
namespace {

constexpr char kMagic[8] = {'L', 'O', 'P', 'M', 'O', 'D', 'E', 'L'};

template <class T>
void put(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

class Cursor {
 public:
  explicit Cursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <class T>
  T get(const std::string& section) {
    need(sizeof(T), section);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string text(std::size_t n, const std::string& section) {
    need(n, section);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const std::string& section) const {
    if (n > bytes_.size() - pos_) throw ModelFormatError("truncated model file: missing " + section);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_model(const Model& model) {
  ebm::validate(model.params);
  auto params = model.params;
  const auto views = ebm::tensors(params);

  std::vector<std::uint8_t> out(kMagic, kMagic + sizeof(kMagic));
  put<std::uint32_t>(out, kModelFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(model.kind()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(views.size()));
  for (const auto& t : views) {
    put<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.rows));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(t.cols));
  }
  for (const auto& t : views)
    for (Eigen::Index i = 0; i < t.size(); ++i) put<double>(out, t.data[i]);

  const nlohmann::json meta = {{"layout", model.layout.to_json()},
                               {"quantization", model.quantization},
                               {"horizon", model.horizon},
                               {"training_config", model.training_config}};
  const std::string text = meta.dump();
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  return out;
}

Model deserialize_model(std::span<const std::uint8_t> bytes) {
  Cursor in(bytes);
  if (in.text(sizeof(kMagic), "header (magic)") != std::string(kMagic, sizeof(kMagic)))
    throw ModelFormatError("not a model file: bad magic");
  const auto version = in.get<std::uint32_t>("header (version)");
  if (version != kModelFormatVersion)
    throw ModelFormatError("model format version " + std::to_string(version) + " is not supported (expected " +
                           std::to_string(kModelFormatVersion) + ")");
  const auto kind_code = in.get<std::uint32_t>("header (model kind)");
  if (kind_code > 2) throw ModelFormatError("corrupt header: unknown model kind " + std::to_string(kind_code));
  const auto kind = static_cast<ebm::ModelKind>(kind_code);
  const auto count = in.get<std::uint32_t>("header (tensor count)");
  const auto expected_names = ebm::tensor_names(kind);
  if (count != expected_names.size())
    throw ModelFormatError("corrupt header: " + std::to_string(count) + " tensors for a " +
                           std::string(ebm::to_string(kind)));

  struct Entry {
    std::string name;
    std::uint64_t rows, cols;
  };
  std::vector<Entry> table;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = in.get<std::uint16_t>("dimension table");
    Entry e{in.text(len, "dimension table"), in.get<std::uint64_t>("dimension table"),
            in.get<std::uint64_t>("dimension table")};
    if (e.name != expected_names[i])
      throw ModelFormatError("corrupt dimension table: tensor " + std::to_string(i) + " is '" + e.name +
                             "', expected '" + std::string(expected_names[i]) + "'");
    table.push_back(std::move(e));
  }

  // Shape the parameter set from the table, then fill it in place.
  ebm::Dims d;
  for (const auto& e : table) {
    const auto r = static_cast<Eigen::Index>(e.rows), c = static_cast<Eigen::Index>(e.cols);
    if (e.name == "a") d.n_v = r;
    else if (e.name == "b") d.n_h = r;
    else if (e.name == "A" || e.name == "A_xf") d.n_x = r;
    else if (e.name == "W_zf") { d.n_z = r; d.n_f = c; }
    else if (e.name == "A_vf") d.n_fa = c;
    else if (e.name == "B_hf") d.n_fb = c;
  }
  Model model;
  model.params = ebm::zeros(kind, d);
  auto views = ebm::tensors(model.params);
  for (std::size_t i = 0; i < views.size(); ++i) {
    if (static_cast<std::uint64_t>(views[i].rows) != table[i].rows ||
        static_cast<std::uint64_t>(views[i].cols) != table[i].cols)
      throw ModelFormatError("corrupt dimension table: inconsistent shape for '" + table[i].name + "'");
    const std::string section = "tensor data (" + table[i].name + ")";
    for (Eigen::Index k = 0; k < views[i].size(); ++k) views[i].data[k] = in.get<double>(section);
  }

  const auto meta_len = in.get<std::uint64_t>("metadata (length)");
  const std::string text = in.text(meta_len, "metadata");
  try {
    const auto meta = nlohmann::json::parse(text);
    model.layout = score::OrchestraLayout::from_json(meta.at("layout"));
    model.quantization = meta.at("quantization").get<int>();
    model.horizon = meta.at("horizon").get<int>();
    model.training_config = meta.value("training_config", nlohmann::json::object());
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("corrupt metadata: ") + e.what());
  }
  if (in.remaining() != 0) throw ModelFormatError("trailing bytes after metadata");
  return model;
}

void save_model(const Model& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Model load_model(const std::string& path) {
  const auto bytes = score::read_bytes(path);
  return deserialize_model(bytes);
}

}  // namespace lop
