#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "topo/image.hpp"
#include "topo/npy.hpp"

namespace fs = std::filesystem;
using namespace topo;
using namespace testsupport;

TEST_SUITE_BEGIN("image_io");

TEST_CASE("8-bit grayscale PNG decodes to v/255") {
    const auto dir = make_temp_dir("io");
    const std::vector<std::uint16_t> samples{0, 128, 255, 64};
    write_file(dir / "g.png", encode_png(2, 2, 1, 8, samples));

    const RasterImage img = load_image(dir / "g.png");
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.channels == 1);
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 128.0 / 255.0);
    CHECK(img.at(0, 1, 0) == 1.0);
    CHECK(img.at(0, 1, 1) == 64.0 / 255.0);
    fs::remove_all(dir);
}

TEST_CASE("16-bit grayscale PNG decodes to v/65535") {
    const auto dir = make_temp_dir("io");
    const std::vector<std::uint16_t> samples{0, 32768, 65535, 1};
    write_file(dir / "g16.png", encode_png(2, 2, 1, 16, samples));

    const RasterImage img = load_image(dir / "g16.png");
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 32768.0 / 65535.0);
    CHECK(img.at(0, 1, 0) == 1.0);
    CHECK(img.at(0, 1, 1) == 1.0 / 65535.0);
    fs::remove_all(dir);
}

TEST_CASE("RGB PNG decodes planar; alpha is stripped") {
    const auto dir = make_temp_dir("io");
    // one pixel per corner: R, G, B, gray
    const std::vector<std::uint16_t> rgb{255, 0, 0,  0, 255, 0,
                                         0,   0, 255, 9, 9,  9};
    write_file(dir / "rgb.png", encode_png(2, 2, 3, 8, rgb));
    const RasterImage img = load_image(dir / "rgb.png");
    CHECK(img.channels == 3);
    CHECK(img.at(0, 0, 0) == 1.0);
    CHECK(img.at(1, 0, 1) == 1.0);
    CHECK(img.at(2, 1, 0) == 1.0);
    CHECK(img.at(1, 1, 1) == 9.0 / 255.0);

    const std::vector<std::uint16_t> rgba{255, 0, 0, 7,  0, 255, 0, 7,
                                          0,   0, 255, 7, 9, 9,  9, 7};
    write_file(dir / "rgba.png", encode_png(2, 2, 4, 8, rgba));
    const RasterImage stripped = load_image(dir / "rgba.png");
    CHECK(stripped.channels == 3);
    CHECK(stripped.data == img.data);

    const std::vector<std::uint16_t> ga{10, 7, 20, 7, 30, 7, 40, 7};
    write_file(dir / "ga.png", encode_png(2, 2, 2, 8, ga));
    const RasterImage gray = load_image(dir / "ga.png");
    CHECK(gray.channels == 1);
    CHECK(gray.at(0, 1, 1) == 40.0 / 255.0);
    fs::remove_all(dir);
}

TEST_CASE("rejected inputs name the offending property") {
    const auto dir = make_temp_dir("io");

    write_file(dir / "pal.png", encode_palette_png(4, 4));
    CHECK_THROWS_WITH_AS(load_image(dir / "pal.png"),
                         doctest::Contains("palette"), std::runtime_error);

    const std::vector<unsigned char> junk{'h', 'e', 'l', 'l', 'o'};
    write_file(dir / "junk.png", junk);
    CHECK_THROWS_WITH_AS(load_image(dir / "junk.png"),
                         doctest::Contains("not a PNG"), std::runtime_error);

    auto truncated = encode_png(8, 8, 1, 8,
                                std::vector<std::uint16_t>(64, 128));
    truncated.resize(truncated.size() / 2);
    write_file(dir / "trunc.png", truncated);
    CHECK_THROWS_AS(load_image(dir / "trunc.png"), std::runtime_error);

    CHECK_THROWS_AS(load_image(dir / "missing.png"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("large random RGB image round-trips exactly") {
    const auto dir = make_temp_dir("io");
    Rng rng(321);
    std::vector<std::uint16_t> samples(224 * 224 * 3);
    for (auto& s : samples) s = static_cast<std::uint16_t>(rng.below(256));
    write_file(dir / "big.png", encode_png(224, 224, 3, 8, samples));

    const RasterImage img = load_image(dir / "big.png");
    REQUIRE(img.width == 224);
    REQUIRE(img.height == 224);
    REQUIRE(img.channels == 3);
    bool all_match = true;
    for (int y = 0; y < 224 && all_match; ++y) {
        for (int x = 0; x < 224 && all_match; ++x) {
            for (int c = 0; c < 3; ++c) {
                const double want =
                    samples[(static_cast<std::size_t>(y) * 224 + x) * 3 + c] /
                    255.0;
                if (img.at(c, y, x) != want) all_match = false;
            }
        }
    }
    CHECK(all_match);
    fs::remove_all(dir);
}

TEST_CASE("NPY header of a (1,1,1) tensor is exactly 128 bytes") {
    const auto dir = make_temp_dir("io");
    Tensor t(1, 1, 1);
    t.data[0] = 0.25f;
    export_tensor(t, dir / "t.npy");

    const auto bytes = read_file(dir / "t.npy");
    REQUIRE(bytes.size() == 132);  // 128-byte header + one float
    CHECK(bytes[0] == 0x93);
    CHECK(std::string(bytes.begin() + 1, bytes.begin() + 6) == "NUMPY");
    CHECK(bytes[6] == 1);  // version 1.0
    CHECK(bytes[7] == 0);
    const int hlen = bytes[8] | bytes[9] << 8;
    CHECK(hlen == 118);
    CHECK(bytes[127] == '\n');
    const std::string dict(bytes.begin() + 10, bytes.begin() + 10 + 62);
    CHECK(dict ==
          "{'descr': '<f4', 'fortran_order': False, 'shape': (1, 1, 1), }");
    fs::remove_all(dir);
}

TEST_CASE("tensor round-trip and validation") {
    const auto dir = make_temp_dir("io");
    Tensor t(3, 4, 5);
    Rng rng(17);
    for (float& v : t.data) v = static_cast<float>(rng.uniform());
    export_tensor(t, dir / "t.npy");

    const Tensor back = import_tensor(dir / "t.npy");
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);

    Tensor bad(1, 1, 2);
    bad.data[1] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(export_tensor(bad, dir / "bad.npy"),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_CASE("numpy reads exported tensors and our reader accepts <f8") {
    if (std::system("python3 -c 'import numpy' >/dev/null 2>&1") != 0) {
        return;  // no numpy in this environment; covered elsewhere
    }
    const auto dir = make_temp_dir("io");
    Tensor t(2, 3, 4);
    for (std::size_t i = 0; i < t.data.size(); ++i) {
        t.data[i] = static_cast<float>(i) * 0.5f - 3.0f;
    }
    export_tensor(t, dir / "t.npy");

    // numpy validates shape, dtype, order and every value, then writes the
    // same data as float64 for the reverse direction.
    std::ofstream script(dir / "check.py");
    script << "import numpy as np\n"
              "a = np.load(r'" << (dir / "t.npy").string() << "')\n"
              "assert a.dtype == np.float32, a.dtype\n"
              "assert a.shape == (2, 3, 4), a.shape\n"
              "assert a.flags['C_CONTIGUOUS']\n"
              "want = (np.arange(24, dtype=np.float32) * 0.5 - 3.0)\n"
              "assert np.array_equal(a.ravel(), want)\n"
              "np.save(r'" << (dir / "f8.npy").string()
           << "', a.astype(np.float64))\n";
    script.close();
    REQUIRE(std::system(("python3 " + (dir / "check.py").string() +
                         " >/dev/null 2>&1")
                            .c_str()) == 0);

    const Tensor back = import_tensor(dir / "f8.npy");
    CHECK(back.shape == t.shape);
    CHECK(back.data == t.data);
    fs::remove_all(dir);
}

TEST_CASE("read_npy rejects malformed input") {
    const auto dir = make_temp_dir("io");
    write_file(dir / "junk.npy", std::vector<unsigned char>{1, 2, 3});
    CHECK_THROWS_WITH_AS(read_npy(dir / "junk.npy"),
                         doctest::Contains("not an NPY"), std::runtime_error);

    Tensor t(1, 2, 2);
    export_tensor(t, dir / "short.npy");
    auto bytes = read_file(dir / "short.npy");
    bytes.resize(bytes.size() - 4);  // drop one float
    write_file(dir / "short.npy", bytes);
    CHECK_THROWS_WITH_AS(read_npy(dir / "short.npy"),
                         doctest::Contains("truncated"), std::runtime_error);
    fs::remove_all(dir);
}

TEST_CASE("PNG preview min-max scales with ties to even") {
    const auto dir = make_temp_dir("io");
    Tensor t(2, 2, 2);
    // channel 1 is the interesting one; channel 0 stays constant
    t.at(1, 0, 0) = 0.0f;
    t.at(1, 0, 1) = 0.5f;
    t.at(1, 1, 0) = 1.0f;
    t.at(1, 1, 1) = 0.25f;
    export_png_preview(t, 1, dir / "p.png");

    const RasterImage img = load_image(dir / "p.png");
    CHECK(img.at(0, 0, 0) == 0.0);
    CHECK(img.at(0, 0, 1) == 128.0 / 255.0);  // 127.5 rounds to even 128
    CHECK(img.at(0, 1, 0) == 1.0);
    CHECK(img.at(0, 1, 1) == 64.0 / 255.0);  // 63.75 rounds up

    export_png_preview(t, 0, dir / "flat.png");
    const RasterImage flat = load_image(dir / "flat.png");
    for (double v : flat.data) CHECK(v == 0.0);

    CHECK_THROWS_AS(export_png_preview(t, 2, dir / "oob.png"),
                    std::invalid_argument);
    fs::remove_all(dir);
}

TEST_SUITE_END();
