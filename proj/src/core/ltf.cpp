#include "core/ltf.hpp"

#include <cstring>
#include <fstream>

namespace litetok {

namespace {
constexpr char kMagic[4] = {'L', 'T', 'F', '1'};
}

void ltf_write(const std::string& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + path);
    os.write(kMagic, 4);
    uint32_t ndim = static_cast<uint32_t>(t.shape.size());
    os.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (int64_t e : t.shape) {
        uint64_t u = static_cast<uint64_t>(e);
        os.write(reinterpret_cast<const char*>(&u), sizeof(u));
    }
    os.write(reinterpret_cast<const char*>(t.data.data()),
             static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!os) throw IoError("write failed: " + path);
}

Tensor ltf_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an LTF1 file: " + path);
    uint32_t ndim = 0;
    is.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    if (!is || ndim == 0 || ndim > 8) throw IoError("bad LTF1 rank in " + path);
    std::vector<int64_t> shape(ndim);
    for (uint32_t i = 0; i < ndim; ++i) {
        uint64_t u = 0;
        is.read(reinterpret_cast<char*>(&u), sizeof(u));
        if (!is || u == 0 || u > (1ull << 40)) throw IoError("bad LTF1 extent in " + path);
        shape[i] = static_cast<int64_t>(u);
    }
    Tensor t(shape);
    is.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!is || is.gcount() != static_cast<std::streamsize>(t.data.size() * sizeof(float)))
        throw IoError("truncated LTF1 data in " + path);
    is.peek();
    if (!is.eof()) throw IoError("trailing bytes in LTF1 file " + path);
    return t;
}

TensorPtr ltf_read_ptr(const std::string& path) {
    return std::make_shared<Tensor>(ltf_read(path));
}

}  // namespace litetok
