#include "test_support.hpp"

#include "tcof/error.hpp"
#include "tcof/ingest.hpp"

#include <doctest.h>

#include <cmath>

using tcof::Tensor;
using tcof::VideoClip;

namespace {

std::string pgm(std::size_t w, std::size_t h, unsigned char value) {
  return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n" + std::string(w * h, static_cast<char>(value));
}

VideoClip constant_clip(std::size_t n, std::size_t h, std::size_t w, auto level) {
  VideoClip clip{"clip", "c", {}};
  for (std::size_t i = 0; i < n; ++i) clip.frames.emplace_back(Tensor::Dims{3, h, w}, static_cast<float>(level(i)));
  return clip;
}

bool all_equal(const Tensor& t, float value, float tol = 0.0f) {
  for (float x : t.data())
    if (std::abs(x - value) > tol) return false;
  return true;
}

}  // namespace

TEST_SUITE("ingest") {
  TEST_CASE("manifest parsing") {
    support::TempDir dir("manifest");
    for (const char* v : {"a/v1", "b/v2", "c/v3"}) support::write_file(dir / (std::string(v) + "/f0.pgm"), pgm(2, 2, 9));

    const auto m = tcof::parse_manifest("a/v1\tbird\nb/v2\tcat\n\nc/v3\tant\n", dir.path());
    CHECK(m.records.size() == 3);
    CHECK(m.classes == std::vector<std::string>{"ant", "bird", "cat"});
    CHECK(m.class_index("cat") == 2);
    CHECK(m.records[1].id == "b/v2");

    auto message = [&](const std::string& text) {
      try {
        tcof::parse_manifest(text, dir.path());
      } catch (const tcof::IngestError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("a/v1\tbird\nb/v2 cat\n").find("line 2") != std::string::npos);
    const auto dup = message("a/v1\tbird\na/v1\tcat\n");
    CHECK(dup.find("line 2") != std::string::npos);
    CHECK(dup.find("duplicate") != std::string::npos);
    CHECK(message("a/v1\tbird\nzz/v9\tcat\n").find("line 2") != std::string::npos);
    CHECK(message("\n\n").find("empty") != std::string::npos);

    support::write_file(dir / "list.tsv", "a/v1\tbird\nc/v3\tant\n");
    const auto loaded = tcof::load_manifest(dir / "list.tsv");
    CHECK(loaded.records[0].dir == dir / "a/v1");
  }

  TEST_CASE("gray P5 frame decodes to three channels of 1.0") {
    support::TempDir dir("p5");
    support::write_file(dir / "v/frame.pgm", pgm(2, 2, 255));
    const VideoClip clip = tcof::load_frames(dir / "v", "v", "x");
    REQUIRE(clip.frame_count() == 1);
    CHECK(clip.frames[0].dims() == Tensor::Dims{3, 2, 2});
    CHECK(all_equal(clip.frames[0], 1.0f));
  }

  TEST_CASE("mixed frame sizes are an ingest error") {
    support::TempDir dir("mixed");
    support::write_file(dir / "v/a.pgm", pgm(2, 2, 1));
    support::write_file(dir / "v/b.pgm", pgm(3, 2, 1));
    CHECK_THROWS_AS(tcof::load_frames(dir / "v"), tcof::IngestError);
    support::write_file(dir / "w/a.pgm", "P5\n2 2\n255\nx");
    CHECK_THROWS_AS(tcof::load_frames(dir / "w"), tcof::IngestError);
  }

  TEST_CASE("pnm encode/decode round-trip and frame order") {
    support::TempDir dir("order");
    for (int i = 9; i >= 0; --i) {
      Tensor frame({3, 2, 3}, static_cast<float>(i) / 255.0f);
      support::write_file(dir / ("v/frame_" + std::to_string(1000 + i) + ".ppm"), tcof::encode_pnm(frame));
    }
    support::write_file(dir / "v/notes.txt", "ignored");
    const VideoClip clip = tcof::load_frames(dir / "v");
    REQUIRE(clip.frame_count() == 10);
    for (std::size_t i = 0; i < 10; ++i) CHECK(clip.frames[i][0] == static_cast<float>(i) / 255.0f);
  }

  TEST_CASE("frame subsets") {
    using Mode = tcof::FrameSubset::Mode;
    const tcof::FrameSubset eighth(Mode::eighth);
    CHECK(eighth.count(16) == 2);
    CHECK(eighth.count(3) == 1);
    CHECK(tcof::FrameSubset(Mode::first).count(16) == 1);
    CHECK(tcof::FrameSubset(Mode::quarter).count(16) == 4);
    CHECK(tcof::FrameSubset(Mode::half).count(16) == 8);
    CHECK(tcof::FrameSubset(Mode::all).count(16) == 16);
    CHECK(tcof::FrameSubset::parse("1/4").mode() == Mode::quarter);
    CHECK(tcof::FrameSubset::parse("first").name() == "first");
    CHECK_THROWS_AS(tcof::FrameSubset::parse("1/3"), tcof::ConfigError);

    const VideoClip clip = constant_clip(16, 2, 2, [](std::size_t i) { return i * 0.01; });
    const VideoClip first_two = tcof::select_frames(clip, eighth);
    REQUIRE(first_two.frame_count() == 2);
    CHECK(first_two.frames[1] == clip.frames[1]);
    CHECK(tcof::select_frames(clip, tcof::FrameSubset()).frames == clip.frames);
    const VideoClip halved = tcof::select_frames(clip, tcof::FrameSubset(Mode::half));
    CHECK(tcof::select_frames(halved, tcof::FrameSubset()).frames == halved.frames);
  }

  TEST_CASE("spatial inputs") {
    const tcof::ImageShape shape{3, 8, 8};
    const VideoClip clip = constant_clip(3, 8, 8, [](std::size_t) { return 0.5; });
    for (const auto& x : tcof::spatial_inputs(clip, Tensor(shape.dims(), 0.2f))) {
      CHECK(x.dims() == shape.dims());
      CHECK(all_equal(x, 0.3f, 1e-6f));
    }
    for (const auto& x : tcof::spatial_inputs(clip, clip.frames[0])) CHECK(all_equal(x, 0.0f));

    const VideoClip small = constant_clip(2, 4, 5, [](std::size_t i) { return 0.1 * static_cast<double>(i + 1); });
    const auto resized = tcof::spatial_inputs(small, Tensor(shape.dims()));
    REQUIRE(resized.size() == 2);
    CHECK(resized[1] == tcof::prepare_frame(small.frames[1], shape));
  }

  TEST_CASE("temporal inputs") {
    const tcof::ImageShape shape{3, 6, 6};
    const VideoClip constant = constant_clip(10, 4, 4, [](std::size_t) { return 0.4; });
    for (std::size_t tau = 1; tau <= 5; ++tau) {
      const auto inputs = tcof::temporal_inputs(constant, {tau}, shape);
      CHECK(inputs.size() == 10 - tau);
      for (const auto& x : inputs) CHECK(all_equal(x, 0.0f));
    }
    CHECK(tcof::temporal_inputs(constant, {}, shape).size() == 7);

    const float c = 0.03125f;
    const VideoClip ramp = constant_clip(10, 4, 4, [&](std::size_t i) { return c * static_cast<float>(i); });
    for (const auto& x : tcof::temporal_inputs(ramp, {3}, shape)) CHECK(all_equal(x, 3 * c, 1e-6f));

    CHECK_THROWS_AS(tcof::temporal_inputs(constant, {10}, shape), tcof::ConfigError);
    CHECK_THROWS_AS(tcof::temporal_inputs(constant, {0}, shape), tcof::ConfigError);
  }

  TEST_CASE("temporal inputs ignore a constant brightness shift") {
    const tcof::ImageShape shape{1, 5, 5};
    VideoClip clip{"c", "x", {}};
    for (std::size_t i = 0; i < 6; ++i) {
      Tensor frame({3, 4, 4});
      for (std::size_t k = 0; k < frame.size(); ++k) frame[k] = static_cast<float>((k * 7 + i * 3) % 16) / 64.0f;
      clip.frames.push_back(frame);
    }
    VideoClip shifted = clip;
    for (auto& frame : shifted.frames)
      for (float& x : frame.data()) x += 0.25f;
    const auto a = tcof::temporal_inputs(clip, {2}, shape);
    const auto b = tcof::temporal_inputs(shifted, {2}, shape);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  }

  TEST_CASE("mean image") {
    const tcof::ImageShape shape{3, 4, 4};
    const VideoClip c1 = constant_clip(4, 4, 4, [](std::size_t) { return 0.7; });
    CHECK(all_equal(tcof::compute_mean_image({c1, c1}, shape), 0.7f, 1e-6f));

    const VideoClip zeros = constant_clip(5, 4, 4, [](std::size_t) { return 0.0; });
    const VideoClip ones = constant_clip(5, 4, 4, [](std::size_t) { return 1.0; });
    const Tensor half = tcof::compute_mean_image({zeros, ones}, shape);
    CHECK(half.dims() == shape.dims());
    CHECK(all_equal(half, 0.5f));

    support::TempDir dir("mean");
    std::string manifest;
    for (int v = 0; v < 2; ++v) {
      for (int f = 0; f < 3; ++f)
        support::write_file(dir / ("v" + std::to_string(v) + "/f" + std::to_string(f) + ".pgm"),
                            pgm(4, 4, v ? 255 : 0));
      manifest += "v" + std::to_string(v) + "\tc\n";
    }
    const auto m = tcof::parse_manifest(manifest, dir.path());
    const Tensor from_disk = tcof::compute_mean_image(m, shape, {}, 1);
    CHECK(all_equal(from_disk, 0.5f));
    CHECK(tcof::compute_mean_image(m, shape, {}, 4) == from_disk);

    VideoClip mixed{"m", "c", {}};
    for (int i = 0; i < 4; ++i) {
      Tensor frame({3, 3, 5});
      for (std::size_t k = 0; k < frame.size(); ++k) frame[k] = 0.2f + 0.5f * static_cast<float>((k * 5 + i) % 7) / 6.0f;
      mixed.frames.push_back(frame);
    }
    const Tensor mixed_mean = tcof::compute_mean_image({mixed}, shape);
    for (float x : mixed_mean.data()) {
      CHECK(x >= 0.2f - 1e-6f);
      CHECK(x <= 0.7f + 1e-6f);
    }
  }
}
