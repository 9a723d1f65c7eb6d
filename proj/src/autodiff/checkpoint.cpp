#include "pmsm/autodiff/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "pmsm/error.hpp"

namespace pmsm {
namespace {

constexpr const char* kMagic = "pmsm-densenet";
constexpr int kVersion = 1;

void expect_token(std::istream& is, const std::string& want) {
  std::string got;
  if (!(is >> got) || got != want) {
    throw IoError("checkpoint: expected '" + want + "', found '" + got + "'");
  }
}

}  // namespace

void write_checkpoint(std::ostream& os, const DenseNet& net) {
  os << kMagic << ' ' << kVersion << '\n';
  os << "activation " << to_string(net.activation()) << '\n';
  os << "layers " << net.layer_sizes().size();
  for (int s : net.layer_sizes()) os << ' ' << s;
  os << '\n' << "params " << net.num_params() << '\n';
  char buf[64];
  for (double p : net.params()) {
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p);
    os.write(buf, end - buf);
    os.put('\n');
  }
}

DenseNet read_checkpoint(std::istream& is) {
  expect_token(is, kMagic);
  int version = 0;
  if (!(is >> version) || version != kVersion) {
    throw IoError("checkpoint: unsupported version " + std::to_string(version));
  }
  expect_token(is, "activation");
  std::string act;
  is >> act;
  expect_token(is, "layers");
  std::size_t n = 0;
  is >> n;
  std::vector<int> sizes(n);
  for (auto& s : sizes) is >> s;
  expect_token(is, "params");
  Eigen::Index count = 0;
  is >> count;
  if (!is) throw IoError("checkpoint: truncated header");
  DenseNet net(sizes, activation_from_string(act));
  if (count != net.num_params()) {
    throw IoError("checkpoint: parameter count " + std::to_string(count) + " does not match layer sizes");
  }
  std::string tok;
  for (Eigen::Index i = 0; i < count; ++i) {
    if (!(is >> tok)) throw IoError("checkpoint: truncated parameter list");
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw IoError("checkpoint: malformed parameter '" + tok + "'");
    }
    net.params()[i] = v;
  }
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const DenseNet& net) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path.string());
  write_checkpoint(os, net);
}

DenseNet load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read " + path.string());
  return read_checkpoint(is);
}

}  // namespace pmsm
