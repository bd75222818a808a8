#include "redwatch/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "redwatch/error.hpp"

namespace redwatch {
namespace {

constexpr std::size_t kSha256HexLen = 64;

std::optional<ProgramRole> role_from_name(const std::string& s) {
    if (s == "workload") return ProgramRole::workload;
    if (s == "benign") return ProgramRole::benign;
    if (s == "attack") return ProgramRole::attack;
    return std::nullopt;
}

bool is_lower_hex(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) || (c >= 'a' && c <= 'f');
    });
}

}  // namespace

std::string_view role_name(ProgramRole role) {
    switch (role) {
        case ProgramRole::workload: return "workload";
        case ProgramRole::benign: return "benign";
        case ProgramRole::attack: return "attack";
    }
    return "?";
}

std::string sha256_hex(std::span<const std::byte> bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int md_len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &md_len, EVP_sha256(),
                   nullptr) != 1) {
        throw NumericError("sha256 digest failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(md_len * 2);
    for (unsigned int i = 0; i < md_len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(const std::string& bytes) {
    return sha256_hex(std::as_bytes(std::span(bytes.data(), bytes.size())));
}

const ManifestEntry* ProgramManifest::find(const std::string& name) const {
    for (const auto& e : entries) {
        if (e.name == name) return &e;
    }
    return nullptr;
}

VerifyResult verify_manifest(std::span<const std::byte> program_bytes,
                             const std::string& name,
                             const ProgramManifest& manifest) {
    const ManifestEntry* entry = manifest.find(name);
    if (entry == nullptr) return VerifyResult::unknown_program;
    return sha256_hex(program_bytes) == entry->digest_hex
               ? VerifyResult::pass
               : VerifyResult::digest_mismatch;
}

std::string_view verify_result_name(VerifyResult r) {
    switch (r) {
        case VerifyResult::pass: return "pass";
        case VerifyResult::digest_mismatch: return "digest-mismatch";
        case VerifyResult::unknown_program: return "unknown-program";
    }
    return "?";
}

ProgramManifest load_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");

    ProgramManifest manifest;
    manifest.algorithm.clear();
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const std::string ctx = path + ":" + std::to_string(lineno);

        if (manifest.algorithm.empty()) {
            if (line.rfind("digest=", 0) != 0) {
                throw FormatError(ctx + ": first entry must be digest=<algorithm>");
            }
            manifest.algorithm = line.substr(7);
            if (manifest.algorithm != "sha256") {
                throw FormatError(ctx + ": unsupported digest algorithm '" +
                                  manifest.algorithm + "'");
            }
            continue;
        }

        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', t1 + 1);
        if (t1 == std::string::npos || t2 == std::string::npos) {
            throw FormatError(ctx + ": expected name<TAB>role<TAB>digest");
        }
        ManifestEntry entry;
        entry.name = line.substr(0, t1);
        const std::string role_str = line.substr(t1 + 1, t2 - t1 - 1);
        entry.digest_hex = line.substr(t2 + 1);

        const auto role = role_from_name(role_str);
        if (!role) throw FormatError(ctx + ": unknown role '" + role_str + "'");
        entry.role = *role;
        if (entry.name.empty()) throw FormatError(ctx + ": empty program name");
        if (entry.digest_hex.size() != kSha256HexLen ||
            !is_lower_hex(entry.digest_hex)) {
            throw FormatError(ctx + ": digest must be " +
                              std::to_string(kSha256HexLen) + " lowercase hex chars");
        }
        if (!seen.insert(entry.name).second) {
            throw FormatError(ctx + ": duplicate program '" + entry.name + "'");
        }
        manifest.entries.push_back(std::move(entry));
    }
    if (manifest.algorithm.empty()) {
        throw FormatError(path + ": missing digest=<algorithm> header");
    }
    return manifest;
}

void save_manifest(const ProgramManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "digest=" << manifest.algorithm << '\n';
    for (const auto& e : manifest.entries) {
        out << e.name << '\t' << role_name(e.role) << '\t' << e.digest_hex << '\n';
    }
}

}  // namespace redwatch
