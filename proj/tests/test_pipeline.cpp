#include "test_support.hpp"

#include "tcof/container.hpp"
#include "tcof/error.hpp"
#include "tcof/ingest.hpp"
#include "tcof/pipeline.hpp"
#include "tcof/report.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sstream>

namespace fs = std::filesystem;

namespace {

tcof::SynthConfig small_synth(const fs::path& dir) {
  tcof::SynthConfig s;
  s.out_dir = dir;
  s.classes = 3;
  s.videos_per_class = 3;
  s.frames = 6;
  s.height = 12;
  s.width = 16;
  s.seed = 5;
  return s;
}

tcof::RunConfig run_config(const fs::path& manifest, const fs::path& cache, tcof::FeatureKind kind) {
  tcof::RunConfig cfg;
  cfg.manifest = manifest;
  cfg.network = "test";
  cfg.kind = kind;
  cfg.cache_dir = cache;
  cfg.seed = 1;
  return cfg;
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {
  TEST_CASE("synth writes the requested dataset deterministically") {
    support::TempDir a("synth_a"), b("synth_b");
    const auto manifest = tcof::cmd_synth(small_synth(a.path()));
    tcof::cmd_synth(small_synth(b.path()));
    const auto m = tcof::load_manifest(manifest);
    CHECK(m.records.size() == 9);
    CHECK(m.classes.size() == 3);
    for (const auto& rec : m.records) CHECK(tcof::load_frames(rec.dir).frame_count() == 6);

    const auto fa = files_under(a.path()), fb = files_under(b.path());
    REQUIRE(fa == fb);
    for (const auto& rel : fa) CHECK(support::read_file(a.path() / rel) == support::read_file(b.path() / rel));

    CHECK_THROWS_AS(tcof::cmd_synth(small_synth(a.path())), tcof::ConfigError);
    auto forced = small_synth(a.path());
    forced.force = true;
    CHECK_NOTHROW(tcof::cmd_synth(forced));
  }

  TEST_CASE("synth default layout has 30 videos and 300 frames") {
    support::TempDir dir("synth_counts");
    tcof::SynthConfig s;
    s.out_dir = dir.path();
    s.seed = 7;
    const auto m = tcof::load_manifest(tcof::cmd_synth(s));
    CHECK(m.records.size() == 30);
    std::size_t frames = 0;
    for (const auto& rec : m.records) frames += tcof::list_frame_files(rec.dir).size();
    CHECK(frames == 300);
    CHECK(support::read_file(dir / "manifest.tsv").find("class0/class0_v0\tclass0\n") == 0);
  }

  TEST_CASE("synthetic class means follow the generator arithmetic") {
    support::TempDir dir("synth_bound");
    tcof::SynthConfig s = small_synth(dir.path());
    s.frames = 10;
    const auto m = tcof::load_manifest(tcof::cmd_synth(s));
    const double k_total = static_cast<double>(s.classes);
    for (const auto& rec : m.records) {
      const double k = static_cast<double>(m.class_index(rec.label));
      const double base = (k + 1) / (k_total + 1);
      const double drift = (k - (k_total - 1) / 2) * s.drift_step;
      const auto clip = tcof::load_frames(rec.dir);
      double total = 0;
      std::size_t count = 0;
      for (const auto& f : clip.frames)
        for (float x : f.data()) total += x, ++count;
      const double mean = total / static_cast<double>(count);
      const double centre = base + drift * static_cast<double>(s.frames - 1) / 2;
      // Level jitter, plus 8-bit rounding and a generous allowance for the
      // average of roughly 5000 uniform noise samples.
      CHECK(std::abs(mean - centre) <= s.jitter + 0.5 / 255 + 0.01);
    }
    // Adjacent class centres are 1/(K+1) apart, well beyond twice that band.
    CHECK(1.0 / (k_total + 1) > 2 * (s.jitter + 0.5 / 255 + 0.01 + s.drift_step * (s.frames - 1) / 2));
  }

  TEST_CASE("extract is idempotent and records metadata") {
    support::TempDir dir("extract");
    const auto manifest = tcof::cmd_synth(small_synth(dir / "data"));
    std::ostringstream log;

    auto cfg = run_config(manifest, dir / "cache", tcof::FeatureKind::temporal);
    auto first = tcof::cmd_extract(cfg, log);
    CHECK(first.computed == 9);
    CHECK(first.skipped == 0);
    auto again = tcof::cmd_extract(cfg, log);
    CHECK(again.computed == 0);
    CHECK(again.skipped == 9);

    const auto m = tcof::load_manifest(manifest);
    const auto cached =
        tcof::read_feature_cache(tcof::cache_path(dir / "cache", m.records[0].id, tcof::FeatureKind::temporal),
                                 tcof::Variant::temporal);
    CHECK(cached.meta.frames == 6);
    CHECK(cached.meta.dim == 16);
    CHECK(cached.meta.tau == 3);
    CHECK(cached.tcof.f.size() == 32);
    CHECK(std::abs(cached.tcof.f.norm() - 1.0) <= 1e-6);

    cfg.tau = 2;
    CHECK(tcof::cmd_extract(cfg, log).computed == 9);

    // Changing a frame invalidates only that video's entry.
    const auto frame = tcof::list_frame_files(m.records[4].dir).front();
    tcof::Tensor image = tcof::load_frames(m.records[4].dir).frames[0];
    for (float& x : image.data()) x = 1.0f - x;
    support::write_file(frame, tcof::encode_pnm(image));
    const auto after = tcof::cmd_extract(cfg, log);
    CHECK(after.computed == 1);
    CHECK(after.skipped == 8);
  }

  TEST_CASE("eval lists every missing cache entry") {
    support::TempDir dir("missing");
    const auto manifest = tcof::cmd_synth(small_synth(dir / "data"));
    std::ostringstream log;
    auto cfg = run_config(manifest, dir / "cache", tcof::FeatureKind::spatial);
    tcof::cmd_extract(cfg, log);
    const auto m = tcof::load_manifest(manifest);
    fs::remove(tcof::cache_path(dir / "cache", m.records[1].id, tcof::FeatureKind::spatial));
    fs::remove(tcof::cache_path(dir / "cache", m.records[7].id, tcof::FeatureKind::spatial));
    try {
      tcof::cmd_eval(cfg, log);
      FAIL("expected an ingest error");
    } catch (const tcof::IngestError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(m.records[1].id) != std::string::npos);
      CHECK(msg.find(m.records[7].id) != std::string::npos);
    }
    CHECK_THROWS_AS(tcof::cmd_eval(run_config(manifest, dir / "cache", tcof::FeatureKind::temporal), log),
                    tcof::IngestError);
  }

  TEST_CASE("nn and svm write distinct reports") {
    support::TempDir dir("reports");
    const auto manifest = tcof::cmd_synth(small_synth(dir / "data"));
    std::ostringstream log;
    auto cfg = run_config(manifest, dir / "cache", tcof::FeatureKind::combined);
    tcof::cmd_extract(cfg, log);
    const auto svm = tcof::cmd_eval(cfg, log);
    cfg.classifier = "nn";
    const auto nn = tcof::cmd_eval(cfg, log);
    CHECK(svm.report_path != nn.report_path);
    CHECK(fs::exists(svm.report_path));
    CHECK(fs::exists(nn.report_path));
    CHECK(fs::exists(tcof::confusion_path(nn.report_path)));
    CHECK(svm.report_path.filename() == "report_combined_svm.csv");
    CHECK(tcof::read_accuracy_csv(svm.report_path).overall == doctest::Approx(svm.report.overall_accuracy).epsilon(1e-4));

    auto lbp = run_config(manifest, dir / "cache", tcof::FeatureKind::lbptop);
    lbp.classifier = "nn";
    lbp.metric = tcof::Metric::chi2;
    CHECK(tcof::cmd_lbptop(lbp, log).computed == 9);
    const auto lbp_result = tcof::cmd_eval(lbp, log);
    CHECK(lbp_result.report_path.filename() == "report_lbptop_nn-chi2.csv");

    const auto m = tcof::load_manifest(manifest);
    const auto entry = tcof::load_container(tcof::cache_path(dir / "cache", m.records[0].id, tcof::FeatureKind::lbptop));
    const tcof::Tensor& hist = entry.at("lbptop");
    REQUIRE(hist.size() == 768);
    for (std::size_t plane = 0; plane < 3; ++plane) {
      double total = 0;
      for (std::size_t i = 0; i < 256; ++i) total += hist[plane * 256 + i];
      CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    }
  }

  TEST_CASE("cache files are bit-identical across runs and worker counts") {
    support::TempDir dir("bitwise");
    const auto manifest = tcof::cmd_synth(small_synth(dir / "data"));
    std::ostringstream log;
    auto one = run_config(manifest, dir / "one", tcof::FeatureKind::combined);
    auto many = run_config(manifest, dir / "many", tcof::FeatureKind::combined);
    one.workers = 1;
    many.workers = 6;
    tcof::cmd_extract(one, log);
    tcof::cmd_extract(many, log);
    const auto files = files_under(dir / "one");
    REQUIRE(files == files_under(dir / "many"));
    CHECK(files.size() == 19);  // 9 spatial + 9 temporal + mean image
    for (const auto& rel : files) CHECK(support::read_file(dir / "one" / rel) == support::read_file(dir / "many" / rel));
  }

  TEST_CASE("configuration checks") {
    tcof::RunConfig cfg;
    cfg.manifest = "m.tsv";
    cfg.tau = 2;
    CHECK_THROWS_AS(tcof::validate(cfg, "extract"), tcof::ConfigError);
    cfg.kind = tcof::FeatureKind::temporal;
    CHECK_NOTHROW(tcof::validate(cfg, "extract"));
    cfg.tau.reset();
    cfg.mean_source = tcof::MeanSource::file;
    CHECK_THROWS_AS(tcof::validate(cfg, "extract"), tcof::ConfigError);
    cfg.mean_source = tcof::MeanSource::dataset;
    cfg.classifier = "forest";
    CHECK_THROWS_AS(tcof::validate(cfg, "eval"), tcof::ConfigError);

    CHECK(tcof::cache_path("c", "class0/class0_v1", tcof::FeatureKind::spatial) == fs::path("c/class0_class0_v1.spatial.tnsr"));
    CHECK(tcof::parse_feature_kind("lbptop") == tcof::FeatureKind::lbptop);
    CHECK(tcof::load_network("test").feature_dim == 16);
    CHECK(tcof::load_network("default").feature_dim == 4096);

    CHECK(tcof::resolve_cache_dir(fs::path("x")) == fs::path("x"));
    ::setenv(tcof::kCacheDirEnv, "/tmp/from_env", 1);
    CHECK(tcof::resolve_cache_dir(std::nullopt) == fs::path("/tmp/from_env"));
    ::unsetenv(tcof::kCacheDirEnv);
    CHECK(tcof::resolve_cache_dir(std::nullopt) == fs::path("tcof_cache"));
  }
}
