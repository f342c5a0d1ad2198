#include "fbmdim/path_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fbmdim/errors.hpp"

namespace fbmdim {

namespace {

constexpr std::array<char, 4> kMagic = {'M', 'F', 'B', 'M'};

template <class T>
void put_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes{};
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& in, const char* field) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
    if (!in) {
        throw FormatError(std::string("path cache truncated while reading ") + field);
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

} // namespace

void write_path(std::ostream& out, const FbmPath& path) {
    out.write(kMagic.data(), kMagic.size());
    put_le<std::uint16_t>(out, kPathCacheVersion);
    put_le<double>(out, path.hurst().value());
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.horizon_exponent()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(path.resolution_exponent()));
    put_le<std::uint64_t>(out, path.seed());
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(path.generator()));
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(path.size()));
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(path.samples().data()),
                  static_cast<std::streamsize>(path.size() * sizeof(double)));
    } else {
        for (double v : path.samples()) {
            put_le<double>(out, v);
        }
    }
}

FbmPath read_path(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), magic.size());
    if (!in || magic != kMagic) {
        throw FormatError("not a path cache: bad magic bytes");
    }
    const auto version = get_le<std::uint16_t>(in, "version");
    if (version != kPathCacheVersion) {
        throw FormatError("unsupported path cache version " + std::to_string(version));
    }
    const auto h = get_le<double>(in, "H");
    const auto n = get_le<std::uint32_t>(in, "N");
    const auto r = get_le<std::uint32_t>(in, "r");
    const auto seed = get_le<std::uint64_t>(in, "seed");
    const auto gen = get_le<std::uint8_t>(in, "generator");
    const auto count = get_le<std::uint64_t>(in, "sample count");

    if (!(h > 0.0 && h < 1.0)) {
        throw FormatError("path cache carries an invalid Hurst index");
    }
    if (gen > static_cast<std::uint8_t>(GeneratorId::external)) {
        throw FormatError("path cache carries an unknown generator id");
    }
    if (n < 1 || n + r > 30 || count != (std::uint64_t{1} << (n + r)) + 1) {
        std::ostringstream msg;
        msg << "path cache header inconsistent: N=" << n << ", r=" << r << ", count=" << count;
        throw FormatError(msg.str());
    }
    std::vector<double> samples(count);
    for (auto& v : samples) {
        v = get_le<double>(in, "samples");
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("path cache has trailing bytes after the samples");
    }
    if (samples.front() != 0.0) {
        throw FormatError("path cache corrupted: first sample is not zero");
    }
    return FbmPath(HurstIndex(h), static_cast<int>(n), static_cast<int>(r), std::move(samples), seed,
                   static_cast<GeneratorId>(gen));
}

void save_path(const std::filesystem::path& file, const FbmPath& path) {
    std::ofstream out(file, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + file.string() + " for writing");
    }
    write_path(out, path);
    if (!out) {
        throw std::runtime_error("failed writing " + file.string());
    }
}

FbmPath load_path(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    return read_path(in);
}

} // namespace fbmdim
