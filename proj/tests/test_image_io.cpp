#include <doctest.h>

#include <fstream>

#include "blurbench/image_io.hpp"
#include "blurbench/rng.hpp"
#include "test_support.hpp"

using namespace blurbench;
namespace fs = std::filesystem;

namespace {

void write_binary(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_SUITE("image_io") {
  TEST_CASE("png round trip preserves pixels") {
    testutil::TempDir dir;
    Lcg64 rng(5);
    for (int ch : {1, 3}) {
      const Image img = testutil::random_image(13, 7, ch, rng);
      const fs::path file = dir.path / ("img" + std::to_string(ch) + ".png");
      save_png(img, file);
      CHECK(load_image(file) == img);
    }
  }

  TEST_CASE("binary pgm and ppm load") {
    testutil::TempDir dir;

    const fs::path pgm = dir.path / "a.pgm";
    write_binary(pgm, std::string("P5\n2 2\n255\n") + std::string{'\x00', '\x40', '\x80', '\xff'});
    const Image gray = load_image(pgm);
    CHECK(gray.channels() == 1);
    CHECK(gray.at(0, 0) == 0);
    CHECK(gray.at(0, 1) == 0x40);
    CHECK(gray.at(1, 1) == 0xff);

    const fs::path ppm = dir.path / "a.ppm";
    write_binary(ppm, std::string("P6\n1 1\n255\n") + std::string{'\x01', '\x02', '\x03'});
    const Image rgb = load_image(ppm);
    CHECK(rgb.channels() == 3);
    CHECK(rgb.at(0, 0, 0) == 1);
    CHECK(rgb.at(0, 0, 1) == 2);
    CHECK(rgb.at(0, 0, 2) == 3);
  }

  TEST_CASE("load errors") {
    testutil::TempDir dir;
    try {
      load_image(dir.path / "none.png");
      FAIL("expected MissingImage");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::MissingImage);
    }

    const fs::path garbage = dir.path / "bad.png";
    write_binary(garbage, "this is not a png");
    try {
      load_image(garbage);
      FAIL("expected BadFormat");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BadFormat);
    }
  }

  TEST_CASE("frame sequences order by numeric stem, not creation order") {
    testutil::TempDir dir;
    Lcg64 rng(77);
    // deliberately create out of order
    save_png(Image::filled(4, 4, 1, 30), dir.path / "000003.png");
    save_png(Image::filled(4, 4, 1, 10), dir.path / "000001.png");
    save_png(Image::filled(4, 4, 1, 20), dir.path / "000002.png");
    std::ofstream(dir.path / "notes.txt") << "ignored";

    const FrameSequence seq = load_frame_sequence(dir.path, 240.0);
    CHECK(seq.size() == 3);
    CHECK(seq.fps() == 240.0);
    CHECK(seq.frame(0).at(0, 0) == 10);
    CHECK(seq.frame(1).at(0, 0) == 20);
    CHECK(seq.frame(2).at(0, 0) == 30);
  }

  TEST_CASE("frame stems may carry a shared non-digit prefix") {
    testutil::TempDir dir;
    save_png(Image::filled(2, 2, 1, 2), dir.path / "frame_02.png");
    save_png(Image::filled(2, 2, 1, 1), dir.path / "frame_01.png");
    const FrameSequence seq = load_frame_sequence(dir.path, 120.0);
    CHECK(seq.size() == 2);
    CHECK(seq.frame(0).at(0, 0) == 1);
  }

  TEST_CASE("frame sequence error paths") {
    testutil::TempDir empty;
    try {
      load_frame_sequence(empty.path, 240.0);
      FAIL("expected NoFrames");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::NoFrames);
    }

    testutil::TempDir mixed;
    save_png(Image::filled(4, 4, 1, 0), mixed.path / "000001.png");
    save_png(Image::filled(8, 8, 1, 0), mixed.path / "000002.png");
    try {
      load_frame_sequence(mixed.path, 240.0);
      FAIL("expected InconsistentFrames");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InconsistentFrames);
    }

    testutil::TempDir named;
    save_png(Image::filled(2, 2, 1, 0), named.path / "imgA.png");
    save_png(Image::filled(2, 2, 1, 0), named.path / "imgB.png");
    try {
      load_frame_sequence(named.path, 240.0);
      FAIL("expected BadFrameName");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::BadFrameName);
    }

    testutil::TempDir ok;
    save_png(Image::filled(2, 2, 1, 0), ok.path / "000001.png");
    CHECK_THROWS_AS(load_frame_sequence(ok.path, 0.0), Error);
  }
}
