#include "pcgk/dataorg/cloud_io.hpp"

#include <bit>
#include <cmath>
#include <optional>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pcgk/common/error.hpp"

namespace pcgk::dataorg {

using geometry::PointCloud;
using geometry::Vec3;

namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

// Line reader that tracks line numbers and byte offsets for error messages.
class LineReader {
public:
    LineReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

    bool next(std::string& line) {
        offset_ = static_cast<std::size_t>(is_.tellg());
        if (!std::getline(is_, line)) return false;
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
    // Next line that is neither blank nor a '#' comment.
    bool next_content(std::string& line) {
        while (next(line)) {
            const auto p = line.find_first_not_of(" \t");
            if (p != std::string::npos && line[p] != '#') return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw DataError(name_ + ": line " + std::to_string(line_no_) + " (byte offset " + std::to_string(offset_) +
                        "): " + msg);
    }
    [[noreturn]] void fail_eof(const std::string& what) const {
        is_.clear();
        is_.seekg(0, std::ios::end);
        throw DataError(name_ + ": truncated file, expected " + what + " at byte offset " +
                        std::to_string(static_cast<std::size_t>(is_.tellg())) + " (after line " +
                        std::to_string(line_no_) + ")");
    }
    std::istream& stream() { return is_; }
    const std::string& name() const { return name_; }

private:
    std::istream& is_;
    std::string name_;
    std::size_t line_no_ = 0;
    std::size_t offset_ = 0;
};

std::size_t ply_type_size(const std::string& t) {
    if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
    if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
    if (t == "int" || t == "uint" || t == "float" || t == "int32" || t == "uint32" || t == "float32") return 4;
    if (t == "double" || t == "float64") return 8;
    return 0;
}

double decode_scalar(const std::string& t, const unsigned char* p) {
    auto get = [p]<typename T>(T) {
        T v;
        std::memcpy(&v, p, sizeof(T));
        return static_cast<double>(v);
    };
    if (t == "char" || t == "int8") return get(std::int8_t{});
    if (t == "uchar" || t == "uint8") return get(std::uint8_t{});
    if (t == "short" || t == "int16") return get(std::int16_t{});
    if (t == "ushort" || t == "uint16") return get(std::uint16_t{});
    if (t == "int" || t == "int32") return get(std::int32_t{});
    if (t == "uint" || t == "uint32") return get(std::uint32_t{});
    if (t == "float" || t == "float32") return get(float{});
    return get(double{});
}

struct PlyProperty {
    std::string name, type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

PointCloud read_ply(std::istream& is, const std::string& name) {
    LineReader rd(is, name);
    std::string line;
    if (!rd.next(line) || line != "ply") rd.fail("missing 'ply' magic");
    std::string format;
    std::vector<PlyElement> elements;
    std::optional<int> label;
    bool ended = false;
    while (rd.next(line)) {
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        if (kw.empty()) continue;
        if (kw == "format") {
            ls >> format;
            if (format != "ascii" && format != "binary_little_endian") rd.fail("unsupported format '" + format + "'");
        } else if (kw == "comment") {
            std::string tag;
            int value = 0;
            if (ls >> tag && tag == "label" && ls >> value) label = value;
        } else if (kw == "obj_info") {
        } else if (kw == "element") {
            PlyElement e;
            long long count = -1;
            if (!(ls >> e.name >> count) || count < 0) rd.fail("malformed element line");
            e.count = static_cast<std::size_t>(count);
            elements.push_back(e);
        } else if (kw == "property") {
            if (elements.empty()) rd.fail("property before any element");
            PlyProperty p;
            std::string t;
            ls >> t;
            if (t == "list") {
                p.is_list = true;
                ls >> p.count_type >> p.type >> p.name;
                if (ply_type_size(p.count_type) == 0) rd.fail("unknown list count type '" + p.count_type + "'");
            } else {
                p.type = t;
                ls >> p.name;
            }
            if (p.name.empty() || ply_type_size(p.type) == 0) rd.fail("malformed property line");
            elements.back().props.push_back(p);
        } else if (kw == "end_header") {
            ended = true;
            break;
        } else {
            rd.fail("unexpected header keyword '" + kw + "'");
        }
    }
    if (!ended) rd.fail_eof("end_header");
    if (format.empty()) rd.fail("missing format line");

    PointCloud cloud;
    cloud.label = label;
    bool have_vertices = false;
    for (const auto& e : elements) {
        int ix = -1, iy = -1, iz = -1;
        for (std::size_t i = 0; i < e.props.size(); ++i) {
            if (e.props[i].is_list) continue;
            if (e.props[i].name == "x") ix = static_cast<int>(i);
            if (e.props[i].name == "y") iy = static_cast<int>(i);
            if (e.props[i].name == "z") iz = static_cast<int>(i);
        }
        const bool is_vertex = e.name == "vertex";
        if (is_vertex) {
            if (ix < 0 || iy < 0 || iz < 0) rd.fail("vertex element lacks x, y or z");
            have_vertices = true;
            cloud.points.reserve(e.count);
        }
        for (std::size_t r = 0; r < e.count; ++r) {
            std::vector<double> vals(e.props.size(), 0.0);
            if (format == "ascii") {
                if (!rd.next_content(line)) rd.fail_eof(e.name + " " + std::to_string(r));
                std::istringstream ls(line);
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    double v = 0;
                    if (e.props[i].is_list) {
                        std::size_t n = 0;
                        if (!(ls >> n)) rd.fail("expected list count");
                        for (std::size_t j = 0; j < n; ++j)
                            if (!(ls >> v)) rd.fail("list shorter than its count");
                        continue;
                    }
                    if (!(ls >> v)) rd.fail("expected " + std::to_string(e.props.size()) + " values for " + e.name);
                    vals[i] = v;
                }
                std::string extra;
                if (ls >> extra) rd.fail("trailing data in " + e.name + " row");
            } else {
                for (std::size_t i = 0; i < e.props.size(); ++i) {
                    const auto& p = e.props[i];
                    unsigned char buf[8];
                    const auto at = static_cast<std::size_t>(is.tellg());
                    auto read_exact = [&](std::size_t n) {
                        if (!is.read(reinterpret_cast<char*>(buf), static_cast<std::streamsize>(n)))
                            throw DataError(name + ": truncated binary data at byte offset " + std::to_string(at) +
                                            " (" + e.name + " " + std::to_string(r) + ")");
                    };
                    if (p.is_list) {
                        read_exact(ply_type_size(p.count_type));
                        const auto n = static_cast<std::size_t>(decode_scalar(p.count_type, buf));
                        for (std::size_t j = 0; j < n; ++j) read_exact(ply_type_size(p.type));
                        continue;
                    }
                    read_exact(ply_type_size(p.type));
                    vals[i] = decode_scalar(p.type, buf);
                }
            }
            if (is_vertex) {
                const Vec3 v{vals[static_cast<std::size_t>(ix)], vals[static_cast<std::size_t>(iy)],
                             vals[static_cast<std::size_t>(iz)]};
                if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z))
                    throw DataError(name + ": non-finite coordinate in vertex " + std::to_string(r));
                cloud.points.push_back(v);
            }
        }
    }
    if (!have_vertices) throw DataError(name + ": no vertex element");
    return cloud;
}

PointCloud read_off(std::istream& is, const std::string& name) {
    LineReader rd(is, name);
    std::string line;
    if (!rd.next_content(line)) rd.fail_eof("OFF header");
    std::istringstream hs(line);
    std::string magic;
    hs >> magic;
    if (magic != "OFF") rd.fail("missing 'OFF' magic");
    long long nv = -1, nf = -1, ne = 0;
    if (!(hs >> nv)) {
        // Counts on the following line.
        if (!rd.next_content(line)) rd.fail_eof("vertex/face counts");
        hs = std::istringstream(line);
        hs >> nv;
    }
    if (!(hs >> nf) || nv < 0 || nf < 0) rd.fail("malformed vertex/face counts");
    hs >> ne;
    PointCloud cloud;
    cloud.points.reserve(static_cast<std::size_t>(nv));
    for (long long i = 0; i < nv; ++i) {
        if (!rd.next_content(line)) rd.fail_eof("vertex " + std::to_string(i));
        std::istringstream ls(line);
        Vec3 v;
        if (!(ls >> v.x >> v.y >> v.z)) rd.fail("expected 3 coordinates");
        if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.z)) rd.fail("non-finite coordinate");
        cloud.points.push_back(v);
    }
    for (long long i = 0; i < nf; ++i) {
        if (!rd.next_content(line)) rd.fail_eof("face " + std::to_string(i));
        std::istringstream ls(line);
        long long n = -1;
        if (!(ls >> n) || n < 0) rd.fail("malformed face");
        for (long long j = 0; j < n; ++j) {
            long long idx = -1;
            if (!(ls >> idx) || idx < 0 || idx >= nv) rd.fail("face index out of range");
        }
    }
    return cloud;
}

std::string lower_ext(const std::filesystem::path& p) {
    std::string e = p.extension().string();
    for (auto& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e;
}

}  // namespace

PointCloud load_cloud(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    const auto ext = lower_ext(path);
    if (ext == ".ply") return read_ply(is, path.string());
    if (ext == ".off") return read_off(is, path.string());
    throw DataError("unsupported cloud format '" + ext + "' for '" + path.string() + "'");
}

void save_cloud(const PointCloud& cloud, const std::filesystem::path& path, PlyEncoding encoding) {
    const auto ext = lower_ext(path);
    if (ext != ".ply" && ext != ".off") throw DataError("unsupported cloud format '" + ext + "'");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open '" + path.string() + "' for writing");
    // Shortest decimal that round-trips a float32.
    os << std::setprecision(9);
    if (ext == ".off") {
        os << "OFF\n" << cloud.size() << " 0 0\n";
        for (const auto& p : cloud.points)
            os << static_cast<float>(p.x) << ' ' << static_cast<float>(p.y) << ' ' << static_cast<float>(p.z) << '\n';
    } else {
        os << "ply\nformat " << (encoding == PlyEncoding::ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
        if (cloud.label) os << "comment label " << *cloud.label << '\n';
        os << "element vertex " << cloud.size() << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
        for (const auto& p : cloud.points) {
            const float f[3] = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
            if (encoding == PlyEncoding::ascii)
                os << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
            else
                os.write(reinterpret_cast<const char*>(f), sizeof f);
        }
    }
    if (!os) throw DataError("write failed for '" + path.string() + "'");
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& manifest) {
    std::ifstream is(manifest);
    if (!is) throw DataError("cannot open manifest '" + manifest.string() + "'");
    LineReader rd(is, manifest.string());
    std::string line;
    if (!rd.next(line) || line != "path,label") rd.fail("expected header 'path,label'");
    std::vector<ManifestEntry> out;
    while (rd.next(line)) {
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos) rd.fail("expected 'path,label'");
        ManifestEntry e;
        e.path = line.substr(0, comma);
        try {
            std::size_t used = 0;
            e.label = std::stoi(line.substr(comma + 1), &used);
            if (used != line.size() - comma - 1) throw std::invalid_argument("label");
        } catch (const std::exception&) {
            rd.fail("label is not an integer");
        }
        if (e.path.is_relative()) e.path = manifest.parent_path() / e.path;
        out.push_back(e);
    }
    return out;
}

void write_manifest(const std::filesystem::path& manifest, const std::vector<ManifestEntry>& entries) {
    std::ofstream os(manifest);
    if (!os) throw DataError("cannot open manifest '" + manifest.string() + "' for writing");
    os << "path,label\n";
    for (const auto& e : entries) os << e.path.generic_string() << ',' << e.label << '\n';
}

std::vector<PointCloud> load_dataset(const std::filesystem::path& manifest) {
    std::vector<PointCloud> out;
    for (const auto& e : read_manifest(manifest)) {
        auto c = load_cloud(e.path);
        c.label = e.label;
        out.push_back(std::move(c));
    }
    return out;
}

void save_dataset(const std::vector<PointCloud>& clouds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<ManifestEntry> entries;
    for (std::size_t i = 0; i < clouds.size(); ++i) {
        if (!clouds[i].label) throw DataError("save_dataset: cloud " + std::to_string(i) + " has no label");
        std::ostringstream name;
        name << "cloud_" << std::setw(4) << std::setfill('0') << i << ".ply";
        save_cloud(clouds[i], dir / name.str());
        entries.push_back({name.str(), *clouds[i].label});
    }
    write_manifest(dir / "manifest.csv", entries);
}

}  // namespace pcgk::dataorg
