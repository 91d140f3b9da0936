#include "pcgk/render/image_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "pcgk/common/error.hpp"

namespace pcgk::render {

namespace {

unsigned char quantize(double v) { return static_cast<unsigned char>(std::lround(v * 255.0)); }

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& is) {
    std::string tok;
    int c;
    while ((c = is.get()) != EOF) {
        if (c == '#') {
            while ((c = is.get()) != EOF && c != '\n') {
            }
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

}  // namespace

void write_pgm(const ImageGrid& img, const std::filesystem::path& path) {
    if (img.channels() != 1) throw DataError("write_pgm: only grayscale images are supported");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("write_pgm: cannot open '" + path.string() + "'");
    os << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    for (double v : img.data()) os.put(static_cast<char>(quantize(v)));
    if (!os) throw DataError("write_pgm: write failed for '" + path.string() + "'");
}

ImageGrid read_pgm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("read_pgm: cannot open '" + path.string() + "'");
    const std::string magic = header_token(is);
    if (magic != "P5" && magic != "P2") throw DataError("read_pgm: unsupported magic '" + magic + "'");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(header_token(is));
        h = std::stoul(header_token(is));
        maxval = std::stoul(header_token(is));
    } catch (const std::exception&) {
        throw DataError("read_pgm: malformed header in '" + path.string() + "'");
    }
    if (w == 0 || h == 0 || maxval == 0 || maxval > 65535) throw DataError("read_pgm: invalid header values");
    std::vector<double> data(w * h);
    const auto scale = static_cast<double>(maxval);
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::size_t v = 0;
        if (magic == "P2") {
            const std::string tok = header_token(is);
            if (tok.empty()) throw DataError("read_pgm: truncated pixel data at pixel " + std::to_string(i));
            v = std::stoul(tok);
        } else if (maxval < 256) {
            const int c = is.get();
            if (c == EOF)
                throw DataError("read_pgm: truncated pixel data at byte offset " + std::to_string(is.tellg()));
            v = static_cast<std::size_t>(c);
        } else {
            const int hi = is.get(), lo = is.get();
            if (hi == EOF || lo == EOF) throw DataError("read_pgm: truncated pixel data at pixel " + std::to_string(i));
            v = static_cast<std::size_t>(hi) << 8 | static_cast<std::size_t>(lo);
        }
        if (v > maxval) throw DataError("read_pgm: pixel value exceeds maxval");
        data[i] = static_cast<double>(v) / scale;
    }
    return ImageGrid(h, w, 1, std::move(data));
}

void write_png(const ImageGrid& img, const std::filesystem::path& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw DataError("write_png: cannot open '" + path.string() + "'");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("write_png: libpng initialization failed");
    }
    std::vector<unsigned char> bytes(img.size());
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = quantize(img.data()[i]);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("write_png: encoding failed for '" + path.string() + "'");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()), static_cast<png_uint_32>(img.height()), 8,
                 img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const std::size_t stride = img.width() * img.channels();
    for (std::size_t r = 0; r < img.height(); ++r) png_write_row(png, bytes.data() + r * stride);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

void write_image(const ImageGrid& img, const std::filesystem::path& path) {
    if (path.extension() == ".png")
        write_png(img, path);
    else
        write_pgm(img, path);
}

}  // namespace pcgk::render
