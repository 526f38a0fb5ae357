#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "adir/codec.hpp"
#include "adir/error.hpp"
#include "adir/synth.hpp"

using namespace adir;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "adir_codec_tests";
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("ppm round trip is exact at 8-bit quantization") {
    Image img = make_clean_scene(37, 23, 5);
    auto path = temp_dir() / "roundtrip.ppm";
    save_image(img, path);
    Image back = load_image(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    double max_err = 0.0;
    for (size_t i = 0; i < img.samples.size(); ++i)
        max_err = std::max(max_err,
                           std::abs(static_cast<double>(img.samples[i]) - back.samples[i]));
    CHECK(max_err <= 1.0 / 510.0);

    // saving the decoded image again reproduces the file byte for byte
    auto path2 = temp_dir() / "roundtrip2.ppm";
    save_image(back, path2);
    std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    CHECK(b1 == b2);
}

TEST_CASE("2x2 all-255 P6 decodes to all-ones") {
    auto path = temp_dir() / "white.ppm";
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\n";
    for (int i = 0; i < 12; ++i)
        out.put(static_cast<char>(0xFF));
    out.close();
    Image img = load_image(path);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    for (float v : img.samples)
        CHECK(v == doctest::Approx(1.0f));
}

TEST_CASE("grayscale P5 is rejected") {
    auto path = temp_dir() / "gray.ppm";
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 2\n255\n";
    for (int i = 0; i < 4; ++i)
        out.put(static_cast<char>(0x80));
    out.close();
    CHECK_THROWS_AS(load_image(path), UnsupportedFormat);
}

TEST_CASE("missing and truncated files") {
    CHECK_THROWS_AS(load_image(temp_dir() / "nope.ppm"), MissingFile);

    auto path = temp_dir() / "short.ppm";
    std::ofstream out(path, std::ios::binary);
    out << "P6\n4 4\n255\n";
    out.put(static_cast<char>(1)); // 1 of 48 payload bytes
    out.close();
    CHECK_THROWS_AS(load_image(path), CorruptData);
}

TEST_CASE("quantization of flat images") {
    auto check_bytes = [&](float value, uint8_t expected) {
        Image img(3, 2, value);
        auto path = temp_dir() / "flat.ppm";
        save_image(img, path);
        std::ifstream in(path, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)), {});
        // payload after the 11-byte header "P6\n3 2\n255\n"
        REQUIRE(bytes.size() == 11 + 18);
        for (size_t i = 11; i < bytes.size(); ++i)
            CHECK(static_cast<uint8_t>(bytes[i]) == expected);
    };
    check_bytes(0.5f, 128); // round(0.5 * 255) = 128
    check_bytes(0.0f, 0);
    check_bytes(1.0f, 255);
}

TEST_CASE("png round trip") {
    Image img = make_clean_scene(31, 19, 8);
    auto path = temp_dir() / "roundtrip.png";
    save_image(img, path);
    Image back = load_image(path);
    REQUIRE(back.same_dims(img));
    for (size_t i = 0; i < img.samples.size(); ++i)
        CHECK(std::abs(img.samples[i] - back.samples[i]) <= 1.0f / 510.0f);
}

TEST_CASE("png magic mismatch and unknown extension") {
    auto path = temp_dir() / "fake.png";
    std::ofstream out(path, std::ios::binary);
    out << "not a png at all";
    out.close();
    CHECK_THROWS_AS(load_image(path), UnsupportedFormat);

    Image img(2, 2, 0.5f);
    CHECK_THROWS_AS(save_image(img, temp_dir() / "image.jpg"), UnsupportedFormat);
}

TEST_CASE("ppm header comments are skipped") {
    auto path = temp_dir() / "comments.ppm";
    std::ofstream out(path, std::ios::binary);
    out << "P6\n# a comment\n2 1\n# another\n255\n";
    const uint8_t px[6] = {255, 0, 0, 0, 255, 0};
    out.write(reinterpret_cast<const char*>(px), 6);
    out.close();
    Image img = load_image(path);
    CHECK(img.at(0, 0, 0) == doctest::Approx(1.0f));
    CHECK(img.at(1, 0, 1) == doctest::Approx(1.0f));
}
