#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace redwatch {

enum class ProgramRole { workload, benign, attack };

std::string_view role_name(ProgramRole role);

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(std::span<const std::byte> bytes);
std::string sha256_hex(const std::string& bytes);

/// Program integrity manifest: maps program names to content digests.
/// Stands in for certificate checking; signature verification is not done.
struct ManifestEntry {
    std::string name;
    ProgramRole role;
    std::string digest_hex;  // lowercase
};

struct ProgramManifest {
    std::string algorithm = "sha256";
    std::vector<ManifestEntry> entries;

    const ManifestEntry* find(const std::string& name) const;
};

enum class VerifyResult { pass, digest_mismatch, unknown_program };

std::string_view verify_result_name(VerifyResult r);

VerifyResult verify_manifest(std::span<const std::byte> program_bytes,
                             const std::string& name,
                             const ProgramManifest& manifest);

ProgramManifest load_manifest(const std::string& path);
void save_manifest(const ProgramManifest& manifest, const std::string& path);

}  // namespace redwatch
