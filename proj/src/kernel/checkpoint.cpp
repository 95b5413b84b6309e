#include "rnntlid/kernel/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rnntlid {

namespace {

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffU) << 24) | ((v & 0xff00U) << 8) | ((v >> 8) & 0xff00U) | (v >> 24);
  }
  return v;
}

std::string read_line(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("truncated header in " + path.string());
  return line;
}

}  // namespace

const NamedTensor& Envelope::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("envelope has no tensor named " + name);
}

std::string content_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_envelope(const std::filesystem::path& path, const Envelope& envelope) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());

  std::vector<std::string> config_lines;
  std::istringstream cfg(envelope.config_text);
  for (std::string line; std::getline(cfg, line);) config_lines.push_back(line);

  out << "RNNTLID " << envelope.kind << ' ' << Envelope::kFormatVersion << '\n';
  out << "config_hash " << content_hash(envelope.config_text) << '\n';
  out << "config " << config_lines.size() << '\n';
  for (const auto& line : config_lines) out << line << '\n';
  out << "tensors " << envelope.tensors.size() << '\n';
  for (const auto& t : envelope.tensors) {
    require(t.name.find_first_of(" \t\n") == std::string::npos, "tensor names may not contain whitespace");
    out << t.name << ' ' << t.value.rows() << ' ' << t.value.cols() << '\n';
  }
  out << "end\n";

  for (const auto& t : envelope.tensors) {
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        const auto f = static_cast<float>(t.value(r, c));
        const auto word = to_little_endian(std::bit_cast<std::uint32_t>(f));
        out.write(reinterpret_cast<const char*>(&word), sizeof(word));
      }
    }
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Envelope load_envelope(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());

  Envelope env;
  {
    std::istringstream magic(read_line(in, path));
    std::string tag;
    int version = 0;
    magic >> tag >> env.kind >> version;
    if (tag != "RNNTLID" || version != Envelope::kFormatVersion)
      throw std::runtime_error(path.string() + " is not a version-1 RNNTLID file");
  }
  std::string hash_line = read_line(in, path);
  std::size_t n_config = 0;
  {
    std::istringstream header(read_line(in, path));
    std::string key;
    header >> key >> n_config;
    if (key != "config") throw std::runtime_error("malformed config header in " + path.string());
  }
  for (std::size_t i = 0; i < n_config; ++i) env.config_text += read_line(in, path) + '\n';
  if (hash_line != "config_hash " + content_hash(env.config_text))
    throw std::runtime_error("config hash mismatch in " + path.string());

  std::size_t n_tensors = 0;
  {
    std::istringstream header(read_line(in, path));
    std::string key;
    header >> key >> n_tensors;
    if (key != "tensors") throw std::runtime_error("malformed tensor header in " + path.string());
  }
  for (std::size_t i = 0; i < n_tensors; ++i) {
    std::istringstream line(read_line(in, path));
    NamedTensor t;
    Eigen::Index rows = -1, cols = -1;
    line >> t.name >> rows >> cols;
    if (!line || rows < 0 || cols < 0) throw std::runtime_error("malformed tensor entry in " + path.string());
    t.value.resize(rows, cols);
    env.tensors.push_back(std::move(t));
  }
  if (read_line(in, path) != "end") throw std::runtime_error("missing header terminator in " + path.string());

  for (auto& t : env.tensors) {
    for (Eigen::Index r = 0; r < t.value.rows(); ++r) {
      for (Eigen::Index c = 0; c < t.value.cols(); ++c) {
        std::uint32_t word = 0;
        if (!in.read(reinterpret_cast<char*>(&word), sizeof(word)))
          throw std::runtime_error("truncated tensor data in " + path.string());
        t.value(r, c) = static_cast<Real>(std::bit_cast<float>(to_little_endian(word)));
      }
    }
  }
  return env;
}

std::vector<NamedTensor> snapshot(const ParameterList& params) {
  std::vector<NamedTensor> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back({p->name, p->value});
  return out;
}

void restore(const ParameterList& params, const std::vector<NamedTensor>& tensors) {
  require(params.size() == tensors.size(), "checkpoint tensor count does not match the model");
  for (auto* p : params) {
    const NamedTensor* found = nullptr;
    for (const auto& t : tensors)
      if (t.name == p->name) found = &t;
    require(found != nullptr, "checkpoint is missing tensor " + p->name);
    require(found->value.rows() == p->value.rows() && found->value.cols() == p->value.cols(),
            "checkpoint shape mismatch for " + p->name);
    p->value = found->value;
  }
}

}  // namespace rnntlid
