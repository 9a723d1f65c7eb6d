#pragma once

#include <filesystem>
#include <iosfwd>

#include "pmsm/autodiff/dense_net.hpp"

namespace pmsm {

/// Text checkpoint of a DenseNet:
///
///   pmsm-densenet 1
///   activation tanh
///   layers <n> <size_0> ... <size_{n-1}>
///   params <count>
///   <one parameter per line, shortest round-trip decimal>
///
/// Parameters follow the flat ordering documented on DenseNet, so reading a
/// written file reproduces the network bit for bit.
void write_checkpoint(std::ostream& os, const DenseNet& net);
DenseNet read_checkpoint(std::istream& is);

void save_checkpoint(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_checkpoint(const std::filesystem::path& path);

}  // namespace pmsm
