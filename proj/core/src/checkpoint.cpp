#include "hsac/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "hsac/errors.hpp"
#include "hsac/rng.hpp"

namespace hsac {

namespace {

constexpr const char* kVersionLine = "hsac-checkpoint v1";

void put_le64(std::ostream& out, std::uint64_t bits) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = (bits >> (8 * i)) & 0xff;
  out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t get_le64(std::istream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw CheckpointFormatError("checkpoint: truncated blob");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(buf[i]) << (8 * i);
  return bits;
}

std::string digest_hex(const std::string& config_json) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config_json)));
  return buf;
}

std::string expect_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line))
    throw CheckpointFormatError(std::string("checkpoint: missing ") + what);
  return line;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParameterSet& arrays,
                     const std::string& config_json) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path);
  out << kVersionLine << "\n";
  out << "digest " << digest_hex(config_json) << "\n";
  out << "config " << config_json.size() << "\n";
  out.write(config_json.data(),
            static_cast<std::streamsize>(config_json.size()));
  out << "\n";
  out << "arrays " << arrays.size() << "\n";
  std::int64_t total = 0;
  for (const auto& e : arrays.entries()) {
    if (e.name.find_first_of(" \n") != std::string::npos)
      throw CheckpointError("checkpoint: array name contains whitespace");
    out << e.name << " " << e.shape.size();
    for (int d : e.shape) out << " " << d;
    out << "\n";
    total += e.data.size();
  }
  out << "blob " << total << "\n";
  for (const auto& e : arrays.entries())
    for (Eigen::Index i = 0; i < e.data.size(); ++i)
      put_le64(out, std::bit_cast<std::uint64_t>(e.data(i)));
  if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

CheckpointContents read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointFormatError("checkpoint: cannot open " + path);

  if (expect_line(in, "version line") != kVersionLine)
    throw CheckpointVersionError("checkpoint: unsupported format version");

  std::istringstream digest_line(expect_line(in, "digest line"));
  std::string tag, stored_digest;
  digest_line >> tag >> stored_digest;
  if (tag != "digest" || stored_digest.size() != 16)
    throw CheckpointFormatError("checkpoint: bad digest line");

  std::istringstream config_line(expect_line(in, "config line"));
  std::size_t config_len = 0;
  config_line >> tag >> config_len;
  if (tag != "config")
    throw CheckpointFormatError("checkpoint: bad config line");
  std::string config_json(config_len, '\0');
  in.read(config_json.data(), static_cast<std::streamsize>(config_len));
  if (!in || in.get() != '\n')
    throw CheckpointFormatError("checkpoint: truncated config");
  if (digest_hex(config_json) != stored_digest)
    throw CheckpointFormatError(
        "checkpoint: stored digest does not match embedded config");

  std::istringstream arrays_line(expect_line(in, "arrays line"));
  std::size_t count = 0;
  arrays_line >> tag >> count;
  if (tag != "arrays")
    throw CheckpointFormatError("checkpoint: bad arrays line");

  CheckpointContents contents;
  contents.config_json = std::move(config_json);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream entry(expect_line(in, "array entry"));
    std::string name;
    std::size_t ndims = 0;
    entry >> name >> ndims;
    if (name.empty() || ndims < 1 || ndims > 2)
      throw CheckpointFormatError("checkpoint: bad array entry");
    std::vector<int> shape(ndims);
    for (auto& d : shape) {
      entry >> d;
      if (!entry || d < 1)
        throw CheckpointFormatError("checkpoint: bad array shape");
    }
    auto& e = contents.arrays.add(name, shape);
    total += e.data.size();
  }

  std::istringstream blob_line(expect_line(in, "blob line"));
  std::int64_t declared = -1;
  blob_line >> tag >> declared;
  if (tag != "blob" || declared != total)
    throw CheckpointFormatError("checkpoint: blob size disagrees with shapes");
  for (const auto& e : contents.arrays.entries()) {
    Eigen::VectorXd& data = contents.arrays.data(e.name);
    for (Eigen::Index i = 0; i < data.size(); ++i)
      data(i) = std::bit_cast<double>(get_le64(in));
  }
  if (in.get() != std::ifstream::traits_type::eof())
    throw CheckpointFormatError("checkpoint: trailing bytes");
  return contents;
}

CheckpointContents load_checkpoint(const std::string& path,
                                   const std::string& expected_config_json) {
  CheckpointContents contents = read_checkpoint(path);
  if (fnv1a64(contents.config_json) != fnv1a64(expected_config_json))
    throw CheckpointDigestError(
        "checkpoint: config digest mismatch (file was written under a "
        "different configuration)");
  return contents;
}

}  // namespace hsac
