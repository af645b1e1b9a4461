#pragma once

#include "cyberinv/hjb_pide.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <string>

namespace cyberinv {

/// On-disk layout of a solved field named <stem> in a directory:
///   <stem>.json        metadata (grid, parameters, solver options, checksum)
///   <stem>.value.bin   V, little-endian float64, row-major (snapshot, lambda, h)
///   <stem>.policy.bin  z*, same layout
/// The checksum is FNV-1a 64 over the value bytes followed by the policy bytes.
struct FieldFiles {
    std::filesystem::path metadata;
    std::filesystem::path value;
    std::filesystem::path policy;

    static FieldFiles in(const std::filesystem::path& dir, const std::string& stem);
};

nlohmann::json to_json(const FieldMeta& meta);
FieldMeta field_meta_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const QualityReport& quality);

/// FNV-1a 64 running hash.
class Fnv1a {
public:
    void update(const unsigned char* data, std::size_t size);
    std::uint64_t digest() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 14695981039346656037ULL;
};

/// Writes the three files. Throws IoError on failure.
void write_field(const FieldFiles& files, const ValueField& value, const PolicyField& policy);

struct LoadedField {
    ValueField value;
    PolicyField policy;
};

/// Reads and checksum-verifies a field. Throws IoError on missing files,
/// size or checksum mismatch.
LoadedField read_field(const FieldFiles& files);

/// Snapshot-at-a-time writer for solves too large to hold in memory. Usable
/// as a SnapshotSink; snapshots may arrive in any order.
class StreamingFieldWriter {
public:
    StreamingFieldWriter(FieldFiles files, const FieldMeta& meta);

    void write(std::size_t k, std::span<const double> value, std::span<const double> policy);
    /// Flushes the data files and writes the metadata with its checksum.
    void finish();

private:
    FieldFiles files_;
    FieldMeta meta_;
    std::ofstream value_;
    std::ofstream policy_;
};

/// Plot export with columns t, lambda, h, V, z_star; one-dimensional fields
/// report their constant intensity in the lambda column.
void write_field_csv(std::ostream& out, const ValueField& value, const PolicyField& policy);

} // namespace cyberinv
