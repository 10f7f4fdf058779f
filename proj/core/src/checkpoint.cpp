#include "trnews/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace trnews {

namespace {

constexpr const char* kHeader = "trnews-ckpt v1";

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffULL) << (8 * (7 - i));
    return r;
  }
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterSet& params) {
  out << kHeader << '\n';
  for (const auto& [name, t] : params) {
    if (name.find_first_of(" \t\n") != std::string::npos) {
      throw CheckpointError("parameter name contains whitespace: '" + name + "'");
    }
    out << name << ' ' << t.rank();
    for (std::size_t d : t.dims()) out << ' ' << d;
    out << '\n';
    for (double v : t.values()) {
      const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(v));
      char buf[8];
      std::memcpy(buf, &bits, 8);
      out.write(buf, 8);
    }
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

ParameterSet read_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) {
    throw CheckpointError("missing checkpoint header '" + std::string(kHeader) + "'");
  }
  ParameterSet params;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string name;
    std::size_t rank = 0;
    if (!(ls >> name >> rank)) throw CheckpointError("malformed tensor header: '" + line + "'");
    std::vector<std::size_t> dims(rank);
    for (auto& d : dims) {
      if (!(ls >> d)) throw CheckpointError("malformed dims for tensor " + name);
    }
    Tensor t(dims);
    for (double& v : t.values()) {
      char buf[8];
      if (!in.read(buf, 8)) throw CheckpointError("truncated values for tensor " + name);
      std::uint64_t bits = 0;
      std::memcpy(&bits, buf, 8);
      v = std::bit_cast<double>(to_little_endian(bits));
    }
    params.add(name, std::move(t));
  }
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

ParameterSet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

std::uint64_t checkpoint_hash(const ParameterSet& params) {
  std::ostringstream os(std::ios::binary);
  write_checkpoint(os, params);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace trnews
