#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgaze/model.hpp"

namespace sgaze {

// Weight-file errors carry a kind so callers can tell a stale format from a
// wrong model shape from a cut-off file.
struct SerializationError : std::runtime_error {
    enum class Kind { format, version, shape, truncation };
    Kind kind;
    SerializationError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

namespace detail {

inline constexpr char kMagic[4] = {'S', 'G', 'Z', '1'};
inline constexpr std::uint32_t kWeightFormatVersion = 1;

template <typename T>
inline void write_le(std::ostream& out, T v) {
    // little-endian host assumed; payloads are raw
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
inline T read_le(std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw SerializationError(SerializationError::Kind::truncation, "unexpected end of weight file");
    return v;
}

inline std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace detail

// Binary weight format, documented in the README:
//   "SGZ1" | u32 version | u32 header_len | header text | tensors
// The header is `key=value` lines describing the model config, dtype and
// tensor count. Each tensor: u16 name_len, name, u8 ndim, u32 dims[ndim],
// u64 payload_len, raw little-endian values. Fixed decays are stored too,
// so save -> load -> save is byte-identical.
template <typename T>
inline void save_model(Network<T>& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SerializationError(SerializationError::Kind::format, "cannot write " + path);
    auto tensors = net.all_tensors();

    std::ostringstream hdr;
    hdr << "n=" << net.cfg.n << '\n'
        << "use_dsc=" << (net.cfg.use_dsc ? 1 : 0) << '\n'
        << "seed=" << net.cfg.seed << '\n'
        << "theta=" << detail::format_double(net.cfg.theta) << '\n'
        << "surrogate_slope=" << detail::format_double(net.cfg.surrogate_slope) << '\n'
        << "output_spiking=" << (net.cfg.output_spiking ? 1 : 0) << '\n'
        << "membrane_uniform_init=" << (net.cfg.membrane_uniform_init ? 1 : 0) << '\n'
        << "dtype=" << (sizeof(T) == 4 ? "f32" : "f64") << '\n'
        << "tensors=" << tensors.size() << '\n';
    const std::string header = hdr.str();

    out.write(detail::kMagic, 4);
    detail::write_le<std::uint32_t>(out, detail::kWeightFormatVersion);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    for (auto& ref : tensors) {
        detail::write_le<std::uint16_t>(out, static_cast<std::uint16_t>(ref.name.size()));
        out.write(ref.name.data(), static_cast<std::streamsize>(ref.name.size()));
        detail::write_le<std::uint8_t>(out, static_cast<std::uint8_t>(ref.shape.size()));
        for (int d : ref.shape) detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
        detail::write_le<std::uint64_t>(out, ref.data->size() * sizeof(T));
        out.write(reinterpret_cast<const char*>(ref.data->data()),
                  static_cast<std::streamsize>(ref.data->size() * sizeof(T)));
    }
    if (!out) throw SerializationError(SerializationError::Kind::format, "write failed: " + path);
}

// Loads a model. When `expect` is given, its architecture fields must match
// the stored ones (shape error otherwise).
template <typename T>
inline Network<T> load_model(const std::string& path, const ModelConfig* expect = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SerializationError(SerializationError::Kind::format, "cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, detail::kMagic, 4) != 0)
        throw SerializationError(SerializationError::Kind::format, "not a SGZ1 weight file: " + path);
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != detail::kWeightFormatVersion)
        throw SerializationError(SerializationError::Kind::version,
                                 "unsupported weight format version " + std::to_string(version));
    const auto hlen = detail::read_le<std::uint32_t>(in);
    std::string header(hlen, '\0');
    in.read(header.data(), hlen);
    if (!in) throw SerializationError(SerializationError::Kind::truncation, "truncated header");

    std::map<std::string, std::string> kv;
    std::istringstream hs(header);
    std::string line;
    while (std::getline(hs, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    for (const char* key : {"n", "use_dsc", "seed", "theta", "surrogate_slope", "output_spiking",
                            "dtype", "tensors"})
        if (!kv.count(key))
            throw SerializationError(SerializationError::Kind::format,
                                     std::string("missing header key: ") + key);
    const std::string want_dtype = sizeof(T) == 4 ? "f32" : "f64";
    if (kv["dtype"] != want_dtype)
        throw SerializationError(SerializationError::Kind::shape,
                                 "dtype mismatch: file has " + kv["dtype"] + ", expected " + want_dtype);

    ModelConfig cfg;
    cfg.n = std::stoi(kv["n"]);
    cfg.use_dsc = kv["use_dsc"] != "0";
    cfg.seed = std::stoull(kv["seed"]);
    cfg.theta = std::stod(kv["theta"]);
    cfg.surrogate_slope = std::stod(kv["surrogate_slope"]);
    cfg.output_spiking = kv["output_spiking"] != "0";
    cfg.membrane_uniform_init = kv.count("membrane_uniform_init") && kv["membrane_uniform_init"] != "0";
    if (expect) {
        if (expect->n != cfg.n)
            throw SerializationError(SerializationError::Kind::shape,
                                     "stored n=" + std::to_string(cfg.n) + " differs from expected n=" +
                                         std::to_string(expect->n));
        if (expect->use_dsc != cfg.use_dsc)
            throw SerializationError(SerializationError::Kind::shape, "conv structure mismatch");
    }

    Network<T> net = Network<T>::build(cfg);
    auto tensors = net.all_tensors();
    const size_t count = std::stoul(kv["tensors"]);
    if (count != tensors.size())
        throw SerializationError(SerializationError::Kind::shape, "tensor count mismatch");
    for (auto& ref : tensors) {
        const auto nlen = detail::read_le<std::uint16_t>(in);
        std::string name(nlen, '\0');
        in.read(name.data(), nlen);
        if (!in) throw SerializationError(SerializationError::Kind::truncation, "truncated tensor name");
        if (name != ref.name)
            throw SerializationError(SerializationError::Kind::shape,
                                     "unexpected tensor " + name + ", wanted " + ref.name);
        const auto ndim = detail::read_le<std::uint8_t>(in);
        if (ndim != ref.shape.size())
            throw SerializationError(SerializationError::Kind::shape, "rank mismatch for " + name);
        size_t elems = 1;
        for (int d = 0; d < ndim; ++d) {
            const auto dim = detail::read_le<std::uint32_t>(in);
            if (dim != static_cast<std::uint32_t>(ref.shape[d]))
                throw SerializationError(SerializationError::Kind::shape, "dim mismatch for " + name);
            elems *= dim;
        }
        const auto bytes = detail::read_le<std::uint64_t>(in);
        if (bytes != elems * sizeof(T))
            throw SerializationError(SerializationError::Kind::truncation,
                                     "payload length mismatch for " + name);
        in.read(reinterpret_cast<char*>(ref.data->data()), static_cast<std::streamsize>(bytes));
        if (!in) throw SerializationError(SerializationError::Kind::truncation, "truncated payload of " + name);
    }
    return net;
}

}  // namespace sgaze
