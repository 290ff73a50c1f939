#include "tcof/pipeline.hpp"

#include "tcof/error.hpp"
#include "tcof/hash.hpp"
#include "tcof/lbptop.hpp"
#include "tcof/parallel.hpp"
#include "tcof/report.hpp"
#include "tcof/topologies.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>

namespace tcof {

namespace fs = std::filesystem;

std::uint64_t hash_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Fnv1a h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof(buf));
    h.update({reinterpret_cast<const unsigned char*>(buf), static_cast<std::size_t>(in.gcount())});
  }
  return h.digest();
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::spatial: return "spatial";
    case FeatureKind::temporal: return "temporal";
    case FeatureKind::combined: return "combined";
    case FeatureKind::lbptop: return "lbptop";
  }
  return "spatial";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "spatial") return FeatureKind::spatial;
  if (text == "temporal") return FeatureKind::temporal;
  if (text == "combined") return FeatureKind::combined;
  if (text == "lbptop") return FeatureKind::lbptop;
  throw ConfigError("unknown variant '" + std::string(text) + "' (expected spatial, temporal, combined, lbptop)");
}

fs::path resolve_cache_dir(const std::optional<fs::path>& explicit_dir) {
  if (explicit_dir && !explicit_dir->empty()) return *explicit_dir;
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
  return "tcof_cache";
}

void validate(const RunConfig& cfg, std::string_view command) {
  const bool uses_temporal = cfg.kind == FeatureKind::temporal || cfg.kind == FeatureKind::combined;
  if (cfg.tau && !uses_temporal) throw ConfigError("--tau applies only to the temporal and combined variants");
  if (cfg.tau && *cfg.tau < 1) throw ConfigError("--tau must be >= 1");
  if (cfg.manifest.empty()) throw ConfigError(std::string(command) + ": --manifest is required");
  if (cfg.workers < 1) throw ConfigError("--workers must be >= 1");
  if (command == "extract") {
    if (cfg.kind == FeatureKind::lbptop) throw ConfigError("extract: use the lbptop command for LBP-TOP descriptors");
    if (cfg.mean_source == MeanSource::file && !cfg.mean_file) {
      throw ConfigError("--mean-source file requires --mean-file");
    }
    if (cfg.mean_source == MeanSource::dataset && cfg.mean_file) {
      throw ConfigError("--mean-file requires --mean-source file");
    }
  }
  if (command == "lbptop" && cfg.kind != FeatureKind::lbptop) {
    throw ConfigError("lbptop: --variant must be lbptop (or omitted)");
  }
  if (command == "eval") {
    if (cfg.classifier != "svm" && cfg.classifier != "nn") {
      throw ConfigError("--classifier must be svm or nn, got '" + cfg.classifier + "'");
    }
    if (cfg.classifier == "svm" && !(cfg.c > 0.0)) throw ConfigError("--C must be positive");
  }
}

NetworkSpec load_network(const std::string& network) {
  if (network == "default") return parse_network_spec(topologies::default_network());
  if (network == "test") return parse_network_spec(topologies::test_network());
  std::ifstream in(network);
  if (!in) throw IoError("cannot open network spec " + network);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_network_spec(text);
}

fs::path cache_path(const fs::path& cache_dir, const std::string& video_id, FeatureKind kind) {
  return cache_dir / (cache_stem(video_id) + "." + to_string(kind) + ".tnsr");
}

std::uint64_t hash_video_dir(const fs::path& dir) {
  Fnv1a h;
  for (const auto& file : list_frame_files(dir)) {
    h.update(file.filename().string());
    h.update(hash_file(file));
  }
  return h.digest();
}

namespace {

std::uint64_t hash_tensor(const Tensor& t) {
  TensorContainer c;
  c.add("t", t);
  const std::string bytes = serialize_container(c);
  return Fnv1a().update(bytes).digest();
}

// Runs `body` for one manifest record, prefixing failures with the video id.
template <typename Body>
void with_video_context(const ManifestRecord& rec, Body&& body) {
  try {
    body();
  } catch (const NumericError& e) {
    throw NumericError("video '" + rec.id + "': " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("video '" + rec.id + "': " + e.what());
  } catch (const Error& e) {
    throw IngestError("video '" + rec.id + "': " + e.what());
  }
}

bool cache_is_current(const fs::path& path, std::uint64_t key) {
  if (!fs::exists(path)) return false;
  try {
    const TensorContainer c = load_container(path);
    const Tensor* stored = c.find("key");
    return stored && decode_key(*stored) == key;
  } catch (const Error&) {
    return false;
  }
}

struct Network {
  NetworkSpec spec;
  WeightSet weights;
  std::uint64_t identity = 0;
};

Network prepare_network(const RunConfig& cfg, std::ostream& log) {
  Network net;
  net.spec = load_network(cfg.network);
  Fnv1a h;
  h.update(format_network_spec(net.spec));
  if (cfg.weights) {
    net.weights = load_weights(net.spec, load_container(*cfg.weights));
    h.update("file").update(hash_file(*cfg.weights));
  } else {
    log << "no --weights given; using random weights with seed " << cfg.seed << '\n';
    net.weights = random_weights(net.spec, cfg.seed);
    h.update("random").update(cfg.seed);
  }
  net.identity = h.digest();
  return net;
}

Tensor obtain_mean_image(const RunConfig& cfg, const DatasetManifest& manifest, const ImageShape& shape,
                         const std::vector<std::uint64_t>& video_hashes, const fs::path& cache_dir,
                         std::ostream& log) {
  if (cfg.mean_source == MeanSource::file) {
    const TensorContainer c = load_container(*cfg.mean_file);
    const Tensor* mean = c.find("mean");
    if (!mean && c.size() == 1) mean = &c.entries().front().second;
    if (!mean) throw LoadError(cfg.mean_file->string() + ": no 'mean' entry");
    Tensor image = mean->rank() == 3 ? *mean : mean->reshaped(shape.dims());
    if (image.dims() != shape.dims()) {
      // A full-resolution mean from another source is brought to the network input.
      image = prepare_frame(image, shape);
    }
    if (!image.all_finite()) throw NumericError("mean image contains non-finite values");
    return image;
  }

  Fnv1a h;
  h.update("mean").update(to_string(shape.dims())).update(cfg.subset.name());
  for (auto vh : video_hashes) h.update(vh);
  const std::uint64_t key = h.digest();
  const fs::path path = cache_dir / ("mean_image." + cache_stem(cfg.subset.name()) + ".tnsr");
  if (cache_is_current(path, key)) return load_container(path).at("mean");

  log << "computing dataset mean image over " << manifest.records.size() << " videos\n";
  Tensor mean = compute_mean_image(manifest, shape, cfg.subset, cfg.workers);
  TensorContainer c;
  c.add("mean", mean);
  c.add("key", encode_key(key));
  save_container(path, c);
  return mean;
}

Tensor checked_forward(const Network& net, const Tensor& input) {
  Tensor feature = forward(net.spec, net.weights, input);
  if (!feature.all_finite()) throw NumericError("network produced non-finite features");
  return feature;
}

}  // namespace

ExtractSummary cmd_extract(const RunConfig& cfg, std::ostream& log) {
  validate(cfg, "extract");
  const DatasetManifest manifest = load_manifest(cfg.manifest);
  const fs::path cache_dir = resolve_cache_dir(cfg.cache_dir);
  fs::create_directories(cache_dir);
  const Network net = prepare_network(cfg, log);
  const ImageShape shape = net.spec.input;

  const bool want_spatial = cfg.kind != FeatureKind::temporal;
  const bool want_temporal = cfg.kind != FeatureKind::spatial;
  const std::size_t tau = cfg.effective_tau();

  std::vector<std::uint64_t> video_hashes(manifest.records.size());
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    with_video_context(manifest.records[i], [&] { video_hashes[i] = hash_video_dir(manifest.records[i].dir); });
  });

  Tensor mean;
  std::uint64_t mean_identity = 0;
  if (want_spatial) {
    mean = obtain_mean_image(cfg, manifest, shape, video_hashes, cache_dir, log);
    mean_identity = hash_tensor(mean);
  }

  auto key_for = [&](FeatureKind kind, std::uint64_t video_hash) {
    Fnv1a h;
    h.update(to_string(kind)).update(cfg.subset.name()).update(net.identity).update(video_hash);
    if (kind == FeatureKind::spatial) h.update(mean_identity);
    if (kind == FeatureKind::temporal) h.update(static_cast<std::uint64_t>(tau));
    return h.digest();
  };

  std::vector<ExtractSummary> per_video(manifest.records.size());
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    const ManifestRecord& rec = manifest.records[i];
    with_video_context(rec, [&] {
      const std::uint64_t spatial_key = key_for(FeatureKind::spatial, video_hashes[i]);
      const std::uint64_t temporal_key = key_for(FeatureKind::temporal, video_hashes[i]);
      const fs::path spatial_path = cache_path(cache_dir, rec.id, FeatureKind::spatial);
      const fs::path temporal_path = cache_path(cache_dir, rec.id, FeatureKind::temporal);
      const bool do_spatial = want_spatial && !cache_is_current(spatial_path, spatial_key);
      const bool do_temporal = want_temporal && !cache_is_current(temporal_path, temporal_key);
      per_video[i].skipped = (want_spatial && !do_spatial) + (want_temporal && !do_temporal);
      if (!do_spatial && !do_temporal) return;

      const VideoClip clip = select_frames(load_frames(rec.dir, rec.id, rec.label), cfg.subset);
      const std::size_t n = clip.frame_count();
      const auto dim = static_cast<Eigen::Index>(net.spec.feature_dim);
      if (do_spatial) {
        StatsAccumulator<double> stats(dim);
        for (const auto& frame : clip.frames) stats.accumulate(checked_forward(net, spatial_input(frame, mean)).vector());
        write_feature_cache(spatial_path, tcof_from_stats(stats, Variant::spatial), {n, net.spec.feature_dim, 0},
                            spatial_key);
        ++per_video[i].computed;
      }
      if (do_temporal) {
        if (tau >= n) {
          throw ConfigError("tau=" + std::to_string(tau) + " needs more than " + std::to_string(n) + " frames");
        }
        StatsAccumulator<double> stats(dim);
        for (std::size_t f = 0; f + tau < n; ++f) {
          stats.accumulate(checked_forward(net, temporal_input(clip.frames[f + tau], clip.frames[f], shape)).vector());
        }
        write_feature_cache(temporal_path, tcof_from_stats(stats, Variant::temporal), {n, net.spec.feature_dim, tau},
                            temporal_key);
        ++per_video[i].computed;
      }
    });
  });

  ExtractSummary total;
  for (const auto& s : per_video) {
    total.computed += s.computed;
    total.skipped += s.skipped;
  }
  log << "extract: " << total.computed << " computed, " << total.skipped << " up to date in " << cache_dir.string()
      << '\n';
  return total;
}

ExtractSummary cmd_lbptop(const RunConfig& cfg, std::ostream& log) {
  RunConfig local = cfg;
  local.kind = FeatureKind::lbptop;
  validate(local, "lbptop");
  const DatasetManifest manifest = load_manifest(cfg.manifest);
  const fs::path cache_dir = resolve_cache_dir(cfg.cache_dir);
  fs::create_directories(cache_dir);

  std::vector<ExtractSummary> per_video(manifest.records.size());
  parallel_for(manifest.records.size(), cfg.workers, [&](std::size_t i) {
    const ManifestRecord& rec = manifest.records[i];
    with_video_context(rec, [&] {
      const std::uint64_t key =
          Fnv1a().update("lbptop").update(cfg.subset.name()).update(hash_video_dir(rec.dir)).digest();
      const fs::path path = cache_path(cache_dir, rec.id, FeatureKind::lbptop);
      if (cache_is_current(path, key)) {
        per_video[i].skipped = 1;
        return;
      }
      const VideoClip clip = select_frames(load_frames(rec.dir, rec.id, rec.label), cfg.subset);
      const LbpTopDescriptor d = lbp_top(gray_volume(clip));
      TensorContainer c;
      c.add("lbptop", from_vector(d.concatenated()));
      c.add("meta", Tensor({3}, {static_cast<float>(clip.frame_count()), static_cast<float>(3 * kLbpBins), 0.0f}));
      c.add("key", encode_key(key));
      save_container(path, c);
      per_video[i].computed = 1;
    });
  });

  ExtractSummary total;
  for (const auto& s : per_video) {
    total.computed += s.computed;
    total.skipped += s.skipped;
  }
  log << "lbptop: " << total.computed << " computed, " << total.skipped << " up to date in " << cache_dir.string()
      << '\n';
  return total;
}

LabeledFeatureSet load_feature_set(const DatasetManifest& manifest, const fs::path& cache_dir, FeatureKind kind) {
  std::vector<FeatureKind> parts;
  if (kind == FeatureKind::combined) {
    parts = {FeatureKind::spatial, FeatureKind::temporal};
  } else {
    parts = {kind};
  }

  std::vector<std::string> missing;
  for (const auto& rec : manifest.records) {
    for (auto part : parts) {
      if (!fs::exists(cache_path(cache_dir, rec.id, part))) missing.push_back(rec.id + " (" + to_string(part) + ")");
    }
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << missing.size() << " cache entries missing in " << cache_dir.string() << ':';
    for (const auto& m : missing) os << "\n  " << m;
    throw IngestError(os.str());
  }

  LabeledFeatureSet data;
  data.class_names = manifest.classes;
  std::vector<Eigen::VectorXd> rows;
  for (const auto& rec : manifest.records) {
    Eigen::VectorXd row;
    if (kind == FeatureKind::lbptop) {
      row = load_container(cache_path(cache_dir, rec.id, kind)).at("lbptop").vector().cast<double>();
    } else if (kind == FeatureKind::combined) {
      const auto s = read_feature_cache(cache_path(cache_dir, rec.id, FeatureKind::spatial), Variant::spatial);
      const auto t = read_feature_cache(cache_path(cache_dir, rec.id, FeatureKind::temporal), Variant::temporal);
      row = combine(s.tcof, t.tcof).f;
    } else {
      const Variant v = kind == FeatureKind::spatial ? Variant::spatial : Variant::temporal;
      row = read_feature_cache(cache_path(cache_dir, rec.id, kind), v).tcof.f;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw IngestError("cache entry for '" + rec.id + "' has length " + std::to_string(row.size()) + ", expected " +
                        std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
    data.labels.push_back(static_cast<int>(manifest.class_index(rec.label)));
    data.ids.push_back(rec.id);
  }
  data.features.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) data.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return data;
}

EvalResult cmd_eval(const RunConfig& cfg, std::ostream& log) {
  validate(cfg, "eval");
  const DatasetManifest manifest = load_manifest(cfg.manifest);
  const fs::path cache_dir = resolve_cache_dir(cfg.cache_dir);
  const LabeledFeatureSet data = load_feature_set(manifest, cache_dir, cfg.kind);

  Classifier classifier;
  if (cfg.classifier == "svm") {
    classifier = LinearSvm{SvmConfig{cfg.c}};
  } else {
    classifier = NearestNeighbor{cfg.metric};
  }

  EvalResult result;
  result.report = loo_evaluate(data, classifier, cfg.workers);
  result.report_path =
      cfg.output ? *cfg.output
                 : cache_dir / ("report_" + to_string(cfg.kind) + "_" + classifier_name(classifier) + ".csv");
  write_report(result.report, result.report_path);
  log << "eval: " << to_string(cfg.kind) << " / " << classifier_name(classifier) << " LOO accuracy " << std::fixed
      << std::setprecision(2) << result.report.overall_accuracy << "% over " << data.size() << " videos -> "
      << result.report_path.string() << '\n';
  return result;
}

fs::path cmd_synth(const SynthConfig& cfg) {
  if (cfg.classes < 1 || cfg.videos_per_class < 1 || cfg.frames < 1 || cfg.height < 1 || cfg.width < 1) {
    throw ConfigError("synth: all counts must be >= 1");
  }
  if (cfg.out_dir.empty()) throw ConfigError("synth: output directory required");
  if (fs::exists(cfg.out_dir) && !fs::is_empty(cfg.out_dir) && !cfg.force) {
    throw ConfigError("synth: " + cfg.out_dir.string() + " exists and is not empty (use --force)");
  }
  fs::create_directories(cfg.out_dir);

  const std::size_t k_total = cfg.classes;
  const int label_digits = static_cast<int>(std::to_string(std::max<std::size_t>(k_total - 1, 1)).size());
  const int video_digits = static_cast<int>(std::to_string(std::max<std::size_t>(cfg.videos_per_class - 1, 1)).size());
  auto padded = [](std::size_t v, int width) {
    std::ostringstream os;
    os << std::setw(width) << std::setfill('0') << v;
    return os.str();
  };

  std::ostringstream manifest;
  for (std::size_t k = 0; k < k_total; ++k) {
    const std::string label = "class" + padded(k, label_digits);
    const double base = static_cast<double>(k + 1) / static_cast<double>(k_total + 1);
    const double drift = (static_cast<double>(k) - static_cast<double>(k_total - 1) / 2.0) * cfg.drift_step;
    for (std::size_t j = 0; j < cfg.videos_per_class; ++j) {
      const std::string rel = label + "/" + label + "_v" + padded(j, video_digits);
      const fs::path dir = cfg.out_dir / rel;
      fs::create_directories(dir);

      std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                        static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(j)};
      std::mt19937_64 rng(seq);
      auto uniform = [&rng] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };
      const double level = base + cfg.jitter * uniform();

      for (std::size_t t = 0; t < cfg.frames; ++t) {
        Tensor frame({3, cfg.height, cfg.width});
        const double mean = level + drift * static_cast<double>(t);
        for (float& px : frame.data()) px = static_cast<float>(std::clamp(mean + cfg.noise * uniform(), 0.0, 1.0));
        std::ofstream out(dir / ("frame_" + padded(t, 4) + ".ppm"), std::ios::binary | std::ios::trunc);
        const std::string bytes = encode_pnm(frame);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("cannot write frames under " + dir.string());
      }
      manifest << rel << '\t' << label << '\n';
    }
  }

  const fs::path manifest_path = cfg.out_dir / "manifest.tsv";
  std::ofstream out(manifest_path, std::ios::trunc);
  out << manifest.str();
  if (!out) throw IoError("cannot write " + manifest_path.string());
  return manifest_path;
}

}  // namespace tcof
