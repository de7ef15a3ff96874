#pragma once

#include "fluctlab/campaigns.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fluctlab::cli {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_dir(const std::string& dir);
bool file_exists(const std::string& path);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);  // throws IoError if missing

/// Shortest round-trip decimal form (printf %.17g).
std::string format_double(double v);

struct PairingRow {
  double t = 0.0;
  int run = 0;
  std::string phi_name;
  double value = 0.0;
};

/// Pinned schema: "N,replica,t,alpha,norm_sq,residual_bound,source_tag".
std::string norms_csv(std::span<const statlab::NormSample> rows);
/// Pinned schema: "t,run,phi_name,pairing_value".
std::string pairings_csv(std::span<const PairingRow> rows);

/// FNV-1a 64-bit content hash.
std::uint64_t fnv1a(std::span<const unsigned char> bytes);
std::uint64_t fnv1a_text(const std::string& text);
std::string hash_hex(std::uint64_t h);
std::string hash_file(const std::string& path);  // hex FNV-1a of the bytes

/// Raw float64 dump: magic "FLB1", u32 rank, u64 dims, little-endian payload.
void write_binary_f64(const std::string& path, std::span<const double> data,
                      std::span<const long> shape);
std::vector<double> read_binary_f64(const std::string& path,
                                    std::vector<long>* shape);

}  // namespace fluctlab::cli
