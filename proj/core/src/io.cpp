#include "fluctlab/io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

namespace fluctlab::cli {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

bool file_exists(const std::string& path) { return fs::exists(path); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string norms_csv(std::span<const statlab::NormSample> rows) {
    std::string out = "N,replica,t,alpha,norm_sq,residual_bound,source_tag\n";
    for (const auto& r : rows) {
        out += std::to_string(r.N);
        out += ',';
        out += std::to_string(r.replica);
        out += ',';
        out += format_double(r.t);
        out += ',';
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.norm_sq);
        out += ',';
        out += format_double(r.residual_bound);
        out += ',';
        out += r.source_tag;
        out += '\n';
    }
    return out;
}

std::string pairings_csv(std::span<const PairingRow> rows) {
    std::string out = "t,run,phi_name,pairing_value\n";
    for (const auto& r : rows) {
        out += format_double(r.t);
        out += ',';
        out += std::to_string(r.run);
        out += ',';
        out += r.phi_name;
        out += ',';
        out += format_double(r.value);
        out += '\n';
    }
    return out;
}

std::uint64_t fnv1a(std::span<const unsigned char> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t fnv1a_text(const std::string& text) {
    return fnv1a({reinterpret_cast<const unsigned char*>(text.data()),
                  text.size()});
}

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

std::string hash_file(const std::string& path) {
    return hash_hex(fnv1a_text(read_text(path)));
}

void write_binary_f64(const std::string& path, std::span<const double> data,
                      std::span<const long> shape) {
    long expected = 1;
    for (long s : shape) expected *= s;
    if (expected != static_cast<long>(data.size()))
        throw IoError("write_binary_f64: shape does not match data size");

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write("FLB1", 4);
    const std::uint32_t rank = static_cast<std::uint32_t>(shape.size());
    out.write(reinterpret_cast<const char*>(&rank), sizeof rank);
    for (long s : shape) {
        const std::uint64_t dim = static_cast<std::uint64_t>(s);
        out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    }
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw IoError("short write to " + path);
}

std::vector<double> read_binary_f64(const std::string& path,
                                    std::vector<long>* shape) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "FLB1", 4) != 0)
        throw IoError(path + ": not a fluctlab binary dump");
    std::uint32_t rank = 0;
    in.read(reinterpret_cast<char*>(&rank), sizeof rank);
    long total = 1;
    std::vector<long> dims;
    for (std::uint32_t i = 0; i < rank; ++i) {
        std::uint64_t dim = 0;
        in.read(reinterpret_cast<char*>(&dim), sizeof dim);
        dims.push_back(static_cast<long>(dim));
        total *= dims.back();
    }
    std::vector<double> data(static_cast<std::size_t>(total));
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!in) throw IoError(path + ": truncated binary dump");
    if (shape) *shape = std::move(dims);
    return data;
}

}  // namespace fluctlab::cli
