#include "topo/npy.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

static_assert(std::endian::native == std::endian::little,
              "NPY I/O assumes a little-endian host");
static_assert(sizeof(float) == 4 && sizeof(double) == 8);

namespace topo {
namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

std::string shape_tuple(std::span<const std::size_t> shape) {
    // numpy spells rank-1 shapes "(n,)" and higher ranks "(a, b, ...)".
    if (shape.size() == 1) return fmt::format("({},)", shape[0]);
    std::string out = "(";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += fmt::format("{}{}", i ? ", " : "", shape[i]);
    }
    return out + ")";
}

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& what) {
    throw std::runtime_error(fmt::format("{}: {}", path.string(), what));
}

// Pulls the value following "'key':" out of a header dict, up to the next
// top-level ',' or '}'. The header grammar is a fixed python dict literal,
// so simple scanning is enough.
std::string dict_value(const std::string& dict, const std::string& key,
                       const std::filesystem::path& path) {
    const std::string needle = "'" + key + "'";
    std::size_t k = dict.find(needle);
    if (k == std::string::npos) fail(path, "NPY header missing key " + needle);
    std::size_t colon = dict.find(':', k + needle.size());
    if (colon == std::string::npos) fail(path, "malformed NPY header");
    std::size_t i = colon + 1;
    while (i < dict.size() && dict[i] == ' ') ++i;
    int depth = 0;
    std::size_t j = i;
    for (; j < dict.size(); ++j) {
        char c = dict[j];
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (depth == 0 && (c == ',' || c == '}')) break;
    }
    std::string v = dict.substr(i, j - i);
    while (!v.empty() && v.back() == ' ') v.pop_back();
    return v;
}

}  // namespace

void write_npy(const std::filesystem::path& path,
               std::span<const std::size_t> shape,
               std::span<const float> data) {
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    if (shape.empty() || count != data.size()) {
        throw std::invalid_argument(
            fmt::format("write_npy: shape {} does not match {} values",
                        shape_tuple(shape), data.size()));
    }

    std::string dict =
        fmt::format("{{'descr': '<f4', 'fortran_order': False, 'shape': {}, }}",
                    shape_tuple(shape));
    // magic(6) + version(2) + header length field(2) + dict + pad + '\n',
    // padded with spaces so the payload starts on a 64-byte boundary.
    std::size_t unpadded = 6 + 2 + 2 + dict.size() + 1;
    std::size_t padded = (unpadded + 63) / 64 * 64;
    dict.append(padded - unpadded, ' ');
    dict.push_back('\n');

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(path, "cannot open for writing");
    out.write(kMagic, 6);
    out.put('\x01');
    out.put('\x00');
    const auto hlen = static_cast<std::uint16_t>(dict.size());
    out.put(static_cast<char>(hlen & 0xff));
    out.put(static_cast<char>(hlen >> 8));
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(float)));
    if (!out) fail(path, "short write");
}

NpyArray read_npy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(path, "cannot open");
    std::string raw((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    if (raw.size() < 10 || std::memcmp(raw.data(), kMagic, 6) != 0) {
        fail(path, "not an NPY file");
    }
    const unsigned major = static_cast<unsigned char>(raw[6]);
    std::size_t header_len = 0, header_off = 0;
    if (major == 1) {
        header_len = static_cast<unsigned char>(raw[8]) |
                     static_cast<unsigned char>(raw[9]) << 8;
        header_off = 10;
    } else if (major == 2) {
        if (raw.size() < 12) fail(path, "truncated NPY header");
        header_len = 0;
        for (int i = 3; i >= 0; --i) {
            header_len = header_len << 8 | static_cast<unsigned char>(raw[8 + i]);
        }
        header_off = 12;
    } else {
        fail(path, fmt::format("unsupported NPY version {}", major));
    }
    if (raw.size() < header_off + header_len) fail(path, "truncated NPY header");
    const std::string dict = raw.substr(header_off, header_len);

    const std::string descr = dict_value(dict, "descr", path);
    const std::string order = dict_value(dict, "fortran_order", path);
    const std::string shape_s = dict_value(dict, "shape", path);
    if (order != "False") fail(path, "fortran-order NPY not supported");
    std::size_t elem = 0;
    if (descr == "'<f4'") elem = 4;
    else if (descr == "'<f8'") elem = 8;
    else fail(path, fmt::format("unsupported NPY dtype {}", descr));

    NpyArray arr;
    std::size_t count = 1;
    for (std::size_t i = 0; i < shape_s.size();) {
        if (shape_s[i] >= '0' && shape_s[i] <= '9') {
            std::size_t dim = 0, j = i;
            while (j < shape_s.size() && shape_s[j] >= '0' && shape_s[j] <= '9') {
                dim = dim * 10 + (shape_s[j++] - '0');
            }
            arr.shape.push_back(dim);
            count *= dim;
            i = j;
        } else {
            ++i;
        }
    }
    if (arr.shape.empty()) fail(path, "scalar NPY not supported");

    const char* payload = raw.data() + header_off + header_len;
    if (raw.size() - header_off - header_len < count * elem) {
        fail(path, "truncated NPY payload");
    }
    arr.data.resize(count);
    if (elem == 4) {
        std::memcpy(arr.data.data(), payload, count * 4);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            double v;
            std::memcpy(&v, payload + i * 8, 8);
            arr.data[i] = static_cast<float>(v);
        }
    }
    return arr;
}

}  // namespace topo
