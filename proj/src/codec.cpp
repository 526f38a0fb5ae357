#include "adir/codec.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>

#include "adir/error.hpp"

namespace adir {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f)
            std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Reads the next PPM header token, skipping whitespace and '#' comments.
std::string next_token(std::FILE* f) {
    std::string tok;
    int c;
    while ((c = std::fgetc(f)) != EOF) {
        if (c == '#') {
            while ((c = std::fgetc(f)) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty())
                return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    return tok;
}

Image load_ppm(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f)
        throw MissingFile("cannot open " + path.string());

    char magic[2] = {0, 0};
    if (std::fread(magic, 1, 2, f.get()) != 2)
        throw CorruptData("short header in " + path.string());
    if (magic[0] != 'P' || magic[1] != '6')
        throw UnsupportedFormat("not a P6 PPM: " + path.string());

    auto parse_int = [&](const char* what) {
        std::string tok = next_token(f.get());
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw CorruptData(std::string("bad ") + what + " in " + path.string());
        return std::stol(tok);
    };
    long w = parse_int("width");
    long h = parse_int("height");
    long maxval = parse_int("maxval");
    if (w < 1 || h < 1)
        throw CorruptData("bad dimensions in " + path.string());
    if (maxval != 255)
        throw UnsupportedFormat("PPM maxval must be 255: " + path.string());

    size_t n = static_cast<size_t>(w) * h * 3;
    std::vector<uint8_t> raw(n);
    if (std::fread(raw.data(), 1, n, f.get()) != n)
        throw CorruptData("truncated pixel data in " + path.string());

    Image img(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < n; ++i)
        img.samples[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void save_ppm(const Image& image, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f)
        throw IoFailure("cannot write " + path.string());

    std::string header = "P6\n" + std::to_string(image.width) + " " +
                         std::to_string(image.height) + "\n255\n";
    if (std::fwrite(header.data(), 1, header.size(), f.get()) != header.size())
        throw IoFailure("write failed: " + path.string());

    std::vector<uint8_t> raw(image.samples.size());
    for (size_t i = 0; i < raw.size(); ++i)
        raw[i] = quantize8(image.samples[i]);
    if (std::fwrite(raw.data(), 1, raw.size(), f.get()) != raw.size())
        throw IoFailure("write failed: " + path.string());
}

Image load_png(const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "rb"));
    if (!f)
        throw MissingFile("cannot open " + path.string());

    uint8_t sig[8];
    if (std::fread(sig, 1, 8, f.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw UnsupportedFormat("not a PNG: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoFailure("libpng init failed");
    }

    std::vector<uint8_t> raw;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0, h = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw CorruptData("PNG decode failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    int bit_depth = 0, color_type = 0;
    png_get_IHDR(png, info, &w, &h, &bit_depth, &color_type, nullptr, nullptr, nullptr);
    if (color_type != PNG_COLOR_TYPE_RGB || bit_depth != 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw UnsupportedFormat("only 8-bit RGB PNG supported: " + path.string());
    }

    raw.resize(static_cast<size_t>(w) * h * 3);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = raw.data() + static_cast<size_t>(y) * w * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < raw.size(); ++i)
        img.samples[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void save_png(const Image& image, const std::filesystem::path& path) {
    FilePtr f(std::fopen(path.string().c_str(), "wb"));
    if (!f)
        throw IoFailure("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoFailure("libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoFailure("PNG encode failed: " + path.string());
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    std::vector<uint8_t> raw(image.samples.size());
    for (size_t i = 0; i < raw.size(); ++i)
        raw[i] = quantize8(image.samples[i]);
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = raw.data() + static_cast<size_t>(y) * image.width * 3;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
    std::string e = path.extension().string();
    for (auto& c : e)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return e == ext;
}

} // namespace

Image load_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw MissingFile("no such file: " + path.string());
    if (has_extension(path, ".png"))
        return load_png(path);
    return load_ppm(path); // rejects non-P6 magic with UnsupportedFormat
}

void save_image(const Image& image, const std::filesystem::path& path) {
    if (has_extension(path, ".png"))
        save_png(image, path);
    else if (has_extension(path, ".ppm"))
        save_ppm(image, path);
    else
        throw UnsupportedFormat("unknown output extension: " + path.string());
}

} // namespace adir
