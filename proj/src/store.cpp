#include "igno/store.hpp"

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "igno/error.hpp"
#include "igno/version.hpp"

namespace igno {

namespace {

constexpr char kMagic[4] = {'I', 'G', 'N', 'O'};

std::array<std::uint32_t, 256> make_crc_table() {
  std::array<std::uint32_t, 256> table{};
  for (std::uint32_t i = 0; i < 256; ++i) {
    std::uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
    table[i] = c;
  }
  return table;
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

// f64 payloads are written little-endian; this code asserts the host is too.
static_assert(std::endian::native == std::endian::little,
              "container payload writer assumes a little-endian host");

}  // namespace

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed) {
  static const auto table = make_crc_table();
  std::uint32_t c = seed ^ 0xFFFFFFFFu;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) c = table[(c ^ p[i]) & 0xff] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t config_hash(const Json& config) {
  // nlohmann::json::dump emits object keys in sorted order, which makes the
  // dump canonical for hashing purposes.
  return fnv1a64(config.dump());
}

ContainerWriter& ContainerWriter::add(const std::string& name, const std::string& role,
                                      const DenseArray& array,
                                      const std::string& provenance) {
  for (const auto& p : pending_)
    if (p.entry.name == name)
      throw IoError("container: duplicate entry name '" + name + "'");
  Pending p;
  p.entry.name = name;
  p.entry.role = role;
  p.entry.provenance = provenance;
  p.entry.shape = array.shape;
  p.entry.bytes = array.numel() * sizeof(double);
  p.entry.crc = crc32(array.data.data(), p.entry.bytes);
  p.data = array.data;
  pending_.push_back(std::move(p));
  return *this;
}

ContainerWriter& ContainerWriter::set_meta(const Json& meta) {
  meta_ = meta;
  return *this;
}

void ContainerWriter::write(const std::string& path) const {
  Json header;
  header["format"] = "igno-container";
  header["writer_version"] = kVersion;
  Json entries = Json::array();
  std::uint64_t offset = 0;
  for (const auto& p : pending_) {
    Json e;
    e["name"] = p.entry.name;
    e["role"] = p.entry.role;
    if (!p.entry.provenance.empty()) e["provenance"] = p.entry.provenance;
    e["dtype"] = "f64";
    e["shape"] = p.entry.shape;
    e["offset"] = offset;
    e["bytes"] = p.entry.bytes;
    e["crc32"] = p.entry.crc;
    entries.push_back(e);
    offset += p.entry.bytes;
  }
  header["entries"] = entries;
  header["meta"] = meta_;
  std::string header_str = header.dump();

  std::string prefix;
  prefix.append(kMagic, 4);
  put_u32(prefix, static_cast<std::uint32_t>(kContainerVersion));
  put_u64(prefix, header_str.size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("container: cannot open '" + path + "' for writing");
  out.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
  out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
  for (const auto& p : pending_)
    out.write(reinterpret_cast<const char*>(p.data.data()),
              static_cast<std::streamsize>(p.entry.bytes));
  out.flush();
  if (!out) throw IoError("container: write to '" + path + "' failed");
}

namespace {

struct RawHeader {
  Json header;
  std::uint64_t payload_start;
};

RawHeader read_header(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("container: cannot open '" + path + "'");
  char fixed[16];
  in.read(fixed, 16);
  if (in.gcount() != 16) throw IoError("container: '" + path + "' is too short");
  if (std::memcmp(fixed, kMagic, 4) != 0)
    throw IoError("container: '" + path + "' is not an IGNO container (bad magic)");
  std::uint32_t version = get_u32(fixed + 4);
  if (version != static_cast<std::uint32_t>(kContainerVersion))
    throw IoError("container: '" + path + "' has unsupported version " +
                  std::to_string(version));
  std::uint64_t header_len = get_u64(fixed + 8);
  std::string header_str(header_len, '\0');
  in.read(header_str.data(), static_cast<std::streamsize>(header_len));
  if (static_cast<std::uint64_t>(in.gcount()) != header_len)
    throw IoError("container: '" + path + "' header is truncated");
  Json header;
  try {
    header = Json::parse(header_str);
  } catch (const std::exception& e) {
    throw IoError("container: '" + path + "' header is not valid JSON: " + e.what());
  }
  return {std::move(header), 16 + header_len};
}

}  // namespace

ContainerReader::ContainerReader(const std::string& path) : path_(path) {
  RawHeader raw = read_header(path);
  payload_start_ = raw.payload_start;
  meta_ = raw.header.value("meta", Json::object());
  for (const auto& e : raw.header.value("entries", Json::array())) {
    ContainerEntry entry;
    entry.name = e.at("name").get<std::string>();
    entry.role = e.value("role", "");
    entry.provenance = e.value("provenance", "");
    entry.shape = e.at("shape").get<std::vector<std::size_t>>();
    entry.offset = e.at("offset").get<std::uint64_t>();
    entry.bytes = e.at("bytes").get<std::uint64_t>();
    entry.crc = e.at("crc32").get<std::uint32_t>();
    if (e.value("dtype", "f64") != "f64")
      throw IoError("container: entry '" + entry.name + "' has unsupported dtype");
    index_[entry.name] = entries_.size();
    entries_.push_back(std::move(entry));
  }
}

bool ContainerReader::has(const std::string& name) const {
  return index_.count(name) > 0;
}

const ContainerEntry& ContainerReader::entry(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    std::string names;
    for (const auto& e : entries_) names += (names.empty() ? "" : ", ") + e.name;
    throw IoError("container: no entry '" + name + "' in '" + path_ +
                  "' (available: " + names + ")");
  }
  return entries_[it->second];
}

DenseArray ContainerReader::read(const std::string& name) const {
  const ContainerEntry& e = entry(name);
  if (e.bytes != shape_numel(e.shape) * sizeof(double))
    throw IoError("container: entry '" + name + "' has inconsistent byte count");
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError("container: cannot open '" + path_ + "'");
  in.seekg(static_cast<std::streamoff>(payload_start_ + e.offset));
  Vector data(static_cast<Eigen::Index>(e.bytes / sizeof(double)));
  in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(e.bytes));
  if (static_cast<std::uint64_t>(in.gcount()) != e.bytes)
    throw IoError("container: payload of entry '" + name + "' is truncated");
  std::uint32_t crc = crc32(data.data(), e.bytes);
  if (crc != e.crc)
    throw IoError("container: checksum mismatch in entry '" + name + "' of '" +
                  path_ + "'");
  return DenseArray(e.shape, std::move(data));
}

Json container_manifest(const std::string& path) {
  RawHeader raw = read_header(path);
  return raw.header;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& value) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << value.dump(2) << "\n";
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < header.size(); ++i)
    out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw ShapeError("csv row width " + std::to_string(row.size()) +
                       " does not match header width " + std::to_string(header.size()));
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace igno
