#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "trnews/tensor.hpp"

namespace trnews {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Layout: the line "trnews-ckpt v1", then for each tensor in name order a
// text line "<name> <rank> <dim_0> ... <dim_{rank-1}>" followed by the
// values as little-endian IEEE-754 doubles.
void write_checkpoint(std::ostream& out, const ParameterSet& params);
ParameterSet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const ParameterSet& params);
ParameterSet load_checkpoint(const std::filesystem::path& path);

/// FNV-1a over the serialised checkpoint bytes.
std::uint64_t checkpoint_hash(const ParameterSet& params);

}  // namespace trnews
