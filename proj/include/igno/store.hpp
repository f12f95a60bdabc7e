#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "igno/array.hpp"

namespace igno {

using Json = nlohmann::json;

// CRC-32 (IEEE, reflected). Covers each payload block independently so a
// single flipped byte is attributable to one named entry.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

// FNV-1a 64-bit over a canonical JSON dump; used as the config fingerprint
// recorded in run manifests and containers.
std::uint64_t fnv1a64(const std::string& s);
std::uint64_t config_hash(const Json& config);

struct ContainerEntry {
  std::string name;
  std::string role;        // e.g. coefficient | solution | measurement | params | layout
  std::string provenance;  // free-form note on how the block was produced
  std::vector<std::size_t> shape;
  std::uint64_t offset = 0;  // bytes from payload start
  std::uint64_t bytes = 0;
  std::uint32_t crc = 0;
};

// Single-file container: "IGNO" magic, version, JSON header describing the
// named f64 blocks, then the raw little-endian payload. The header is fully
// self-describing, so manifests are readable without touching the payload.
class ContainerWriter {
 public:
  ContainerWriter& add(const std::string& name, const std::string& role,
                       const DenseArray& array, const std::string& provenance = "");
  ContainerWriter& set_meta(const Json& meta);
  void write(const std::string& path) const;

 private:
  struct Pending {
    ContainerEntry entry;
    Vector data;
  };
  std::vector<Pending> pending_;
  Json meta_ = Json::object();
};

class ContainerReader {
 public:
  explicit ContainerReader(const std::string& path);

  const Json& meta() const { return meta_; }
  const std::vector<ContainerEntry>& entries() const { return entries_; }
  bool has(const std::string& name) const;
  const ContainerEntry& entry(const std::string& name) const;

  // Reads one payload block and verifies its checksum.
  DenseArray read(const std::string& name) const;

 private:
  std::string path_;
  std::uint64_t payload_start_ = 0;
  Json meta_;
  std::vector<ContainerEntry> entries_;
  std::map<std::string, std::size_t> index_;
};

// Header-only view of a container (entries and meta, payload untouched).
Json container_manifest(const std::string& path);

// Small JSON file helpers with uniform error reporting.
Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& value);

// CSV writing; numbers are rendered with %.17g so round trips are lossless.
std::string csv_number(double v);
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace igno
