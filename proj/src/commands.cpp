#include "sdsp/commands.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <unordered_map>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdsp/config.hpp"
#include "sdsp/dataset.hpp"
#include "sdsp/errors.hpp"
#include "sdsp/eval.hpp"
#include "sdsp/parallel.hpp"
#include "sdsp/pipeline.hpp"
#include "sdsp/random.hpp"
#include "sdsp/tensor.hpp"
#include "sdsp/wav.hpp"

namespace sdsp {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSplitStream = 0x5911;

RunConfig load_config(const CommonArgs& common) {
  RunConfig cfg = common.config.empty() ? RunConfig{} : read_run_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (cfg.threads > 0) set_worker_limit(cfg.threads);
  return cfg;
}

int guarded(const char* name, std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << name << ": error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << name << ": unexpected error: " << e.what() << "\n";
    return 1;
  }
}

fs::path pick(const fs::path& given, const std::string& from_config, const char* what) {
  if (!given.empty()) return given;
  if (!from_config.empty()) return from_config;
  throw ArgumentError(std::string("no ") + what + " given (flag or [paths] entry)");
}

// Path of `target` relative to directory `base`.
std::string relative_to(const fs::path& target, const fs::path& base) {
  return fs::absolute(target).lexically_normal().lexically_relative(fs::absolute(base).lexically_normal()).generic_string();
}

struct SceneAudio {
  AudioBuffer mixed, clean, noise;
};

SceneAudio load_scene(const fs::path& base, const FrameRecord& r, double fs_rate, bool with_components) {
  const WavReadOptions opts{fs_rate, false};
  SceneAudio a;
  a.mixed = read_wav(base / r.mixed, opts);
  if (with_components) {
    a.clean = read_wav(base / r.clean, opts);
    a.noise = read_wav(base / r.noise, opts);
  }
  return a;
}

std::map<std::size_t, std::vector<std::size_t>> group_by_scene(const Manifest& m) {
  std::map<std::size_t, std::vector<std::size_t>> g;
  for (std::size_t i = 0; i < m.records.size(); ++i) g[m.records[i].scene].push_back(i);
  return g;
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.index(i)]);
}

void check_rate(const Manifest& m, const RunConfig& cfg) {
  if (m.sample_rate != cfg.filterbank.sample_rate)
    throw ConfigError("manifest sample rate " + std::to_string(m.sample_rate) +
                      " differs from filterbank.sample_rate");
}

}  // namespace

int cmd_make_specs(const MakeSpecsArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("make-specs", err, [&] {
    const RunConfig cfg = load_config(args.common);
    if (args.out.empty()) throw ArgumentError("--out is required");
    SpecGenOptions opts;
    opts.count = args.count;
    opts.duration = args.duration;
    opts.seed = cfg.seed;
    opts.snr_min_db = args.snr_min_db.value_or(cfg.snr_min_db);
    opts.snr_max_db = args.snr_max_db.value_or(cfg.snr_max_db);
    opts.static_sources = args.static_sources;
    opts.drive_by = args.drive_by;
    opts.with_other = !args.no_other;
    const auto specs = make_balanced_specs(opts);
    write_spec_file(args.out, specs);
    out << "make-specs: wrote " << specs.size() << " specs to " << args.out.string() << "\n";
    return 0;
  });
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("synth", err, [&] {
    const RunConfig cfg = load_config(args.common);
    const fs::path specs_path = pick(args.specs, cfg.paths.specs, "spec file");
    const fs::path out_dir = pick(args.out, cfg.paths.data, "output directory");
    const SpecFile specs = read_spec_file(specs_path);
    check_spec_sources(specs);

    DatasetOptions opts;
    opts.out_dir = out_dir;
    opts.scene.geometry = cfg.geometry;
    opts.scene.frame_length = cfg.gammatonegram.frame_length;
    opts.scene.snr_min_db = cfg.snr_min_db;
    opts.scene.snr_max_db = cfg.snr_max_db;
    opts.peak_level = cfg.peak_level;
    const auto seed = args.common.seed;
    const double rate = cfg.filterbank.sample_rate;
    Manifest m = generate_dataset(
        specs.entries.size(),
        [&](std::size_t i) {
          const std::optional<std::uint64_t> s = seed ? std::optional(mix_seed(*seed, i)) : std::nullopt;
          return materialize_spec(specs.entries[i], specs.base_dir, rate, s);
        },
        opts);
    if (seed) m.attributes["seed"] = std::to_string(*seed);
    m.attributes["geometry.spacing"] = std::to_string(cfg.geometry.spacing);
    write_manifest(out_dir / "manifest.json", m);

    std::array<std::size_t, kNumClasses> per_class{};
    for (const auto& r : m.records) ++per_class[static_cast<std::size_t>(r.cls)];
    out << "synth: " << specs.entries.size() << " scenes, " << m.records.size() << " frame records (siren "
        << per_class[0] << ", horn " << per_class[1] << ", other " << per_class[2] << ") in " << out_dir.string()
        << "\n";
    return 0;
  });
}

int cmd_features(const FeaturesArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("features", err, [&] {
    const RunConfig cfg = load_config(args.common);
    const fs::path manifest_path = args.manifest.empty() ? fs::path(cfg.paths.data) / "manifest.json" : args.manifest;
    Manifest m = read_manifest(manifest_path);
    check_rate(m, cfg);
    const fs::path base = manifest_path.parent_path();
    const fs::path out_dir =
        !args.out.empty() ? args.out : !cfg.paths.features.empty() ? fs::path(cfg.paths.features) : base / "features";
    fs::create_directories(out_dir);

    const FramePipeline pipe(cfg);
    const std::string hash = cfg.feature_hash();
    const auto scenes = group_by_scene(m);
    std::vector<const std::vector<std::size_t>*> scene_list;
    for (const auto& [k, v] : scenes) scene_list.push_back(&v);

    const std::size_t n = m.records.size();
    std::vector<std::map<std::string, std::string>> feats(n);
    std::vector<std::string> failures(n);
    std::vector<char> empty_mask(n, 0);

    const long n_scenes = static_cast<long>(scene_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long s = 0; s < n_scenes; ++s) {
      const auto& idx = *scene_list[static_cast<std::size_t>(s)];
      SceneAudio audio;
      try {
        audio = load_scene(base, m.records[idx.front()], m.sample_rate, args.oracle_masks);
      } catch (const std::exception& e) {
        for (auto i : idx) failures[i] = e.what();
        continue;
      }
      for (auto i : idx) {
        const FrameRecord& r = m.records[i];
        try {
          const AudioBuffer mixed = audio.mixed.slice(r.offset, r.length);
          AudioBuffer clean, noise;
          if (args.oracle_masks) {
            clean = audio.clean.slice(r.offset, r.length);
            noise = audio.noise.slice(r.offset, r.length);
          }
          const FrameFeatures f = pipe.features(mixed, args.oracle_masks ? &clean : nullptr,
                                                args.oracle_masks ? &noise : nullptr, r.cls);
          std::map<std::string, std::string> paths;
          const auto emit = [&](const std::string& key, const Tensor& t, TensorKind kind, std::optional<int> ch) {
            const fs::path p = out_dir / (r.id + "." + key + ".sdt");
            write_tensor_with_meta(p, t, {r.id, kind, t.shape, hash, ch});
            paths[key] = relative_to(p, base);
          };
          for (int c = 0; c < 2; ++c) {
            emit("gammatonegram" + std::to_string(c + 1), tensor_from_matrix(f.mixed[c].energies),
                 TensorKind::Gammatonegram, c + 1);
            if (f.masks) emit("mask" + std::to_string(c + 1), mask_to_tensor((*f.masks)[c]), TensorKind::Mask, c + 1);
            if (f.masked)
              emit("masked" + std::to_string(c + 1), tensor_from_matrix((*f.masked)[c].values),
                   TensorKind::Gammatonegram, c + 1);
          }
          if (f.cross) emit("crossgram", tensor_from_matrix(f.cross->values), TensorKind::Crossgram, std::nullopt);
          if (f.masks && is_alerting(r.cls) && !f.masked) empty_mask[i] = 1;
          feats[i] = std::move(paths);
        } catch (const std::exception& e) {
          failures[i] = e.what();
        }
      }
    }

    // Split over the records that produced features.
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < n; ++i) {
      m.records[i].features = feats[i];
      m.records[i].split.clear();
      if (failures[i].empty()) ok.push_back(i);
    }
    const std::uint64_t split_seed = mix_seed(cfg.seed, kSplitStream);
    if (args.split_by_clip) {
      std::vector<std::size_t> scene_ids;
      for (auto i : ok)
        if (scene_ids.empty() || scene_ids.back() != m.records[i].scene) scene_ids.push_back(m.records[i].scene);
      scene_ids.erase(std::unique(scene_ids.begin(), scene_ids.end()), scene_ids.end());
      seeded_shuffle(scene_ids, split_seed);
      const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(scene_ids.size())));
      std::map<std::size_t, bool> train;
      for (std::size_t k = 0; k < scene_ids.size(); ++k) train[scene_ids[k]] = k < n_train;
      for (auto i : ok) m.records[i].split = train[m.records[i].scene] ? "train" : "test";
    } else {
      std::vector<std::size_t> order = ok;
      seeded_shuffle(order, split_seed);
      const auto n_train = static_cast<std::size_t>(std::lround(cfg.train_fraction * static_cast<double>(order.size())));
      for (std::size_t k = 0; k < order.size(); ++k) m.records[order[k]].split = k < n_train ? "train" : "test";
    }
    m.attributes["feature_config_hash"] = hash;
    m.attributes["split_seed"] = std::to_string(cfg.seed);
    m.attributes["split_mode"] = args.split_by_clip ? "clip" : "frame";
    m.attributes["oracle_masks"] = args.oracle_masks ? "true" : "false";
    write_manifest(manifest_path, m);

    std::size_t containers = 0, n_train = 0, n_empty = 0;
    for (const auto& r : m.records) {
      containers += r.features.size();
      n_train += r.split == "train";
    }
    for (char e : empty_mask) n_empty += e != 0;
    out << "features: " << ok.size() << "/" << n << " frames, " << containers << " containers in "
        << out_dir.string() << ", split " << n_train << " train / " << ok.size() - n_train << " test";
    if (args.oracle_masks) out << ", " << n_empty << " empty masks";
    out << "\n";
    const std::size_t n_failed = n - ok.size();
    if (n_failed > 0) {
      out << "features: " << n_failed << " failed records:\n";
      for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty()) out << "  " << m.records[i].id << ": " << failures[i] << "\n";
    }
    return ok.empty() && n > 0 ? 2 : 0;
  });
}

int cmd_doa_baseline(const DoaBaselineArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("doa-baseline", err, [&] {
    const RunConfig cfg = load_config(args.common);
    const fs::path manifest_path = args.manifest.empty() ? fs::path(cfg.paths.data) / "manifest.json" : args.manifest;
    const Manifest m = read_manifest(manifest_path);
    check_rate(m, cfg);
    const fs::path base = manifest_path.parent_path();
    const int order = args.median_order.value_or(cfg.median_order);
    if (order < 1 || order % 2 == 0) throw ArgumentError("--median-order must be odd and positive");
    const fs::path out_path = !args.out.empty() ? args.out
                              : !cfg.paths.predictions.empty() ? fs::path(cfg.paths.predictions)
                                                               : base / "predictions.jsonl";

    std::unordered_map<std::string, SoundClass> classes;
    if (!args.classes.empty())
      for (const auto& p : read_predictions(args.classes)) classes[p.id] = p.cls;

    const std::size_t n = m.records.size();
    std::vector<SoundClass> cls(n);
    std::vector<std::array<fs::path, 2>> mask_paths(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = m.records[i];
      if (args.classes.empty()) {
        cls[i] = r.cls;
      } else {
        const auto it = classes.find(r.id);
        if (it == classes.end()) throw ValidationError("class file has no entry for '" + r.id + "'");
        cls[i] = it->second;
      }
      if (!is_alerting(cls[i])) continue;
      for (int c = 0; c < 2; ++c) {
        const std::string key = "mask" + std::to_string(c + 1);
        fs::path p;
        if (!args.mask_dir.empty()) {
          p = args.mask_dir / (r.id + "." + key + ".sdt");
        } else if (const auto it = r.features.find(key); it != r.features.end()) {
          p = base / it->second;
        }
        if (p.empty() || !fs::exists(p))
          throw ValidationError("no " + key + " for record '" + r.id +
                                "'; run `sdsp features --oracle-masks` or pass --mask-dir with predicted masks");
        mask_paths[i][static_cast<std::size_t>(c)] = p;
      }
    }

    const FramePipeline pipe(cfg);
    const auto scenes = group_by_scene(m);
    std::vector<const std::vector<std::size_t>*> scene_list;
    for (const auto& [k, v] : scenes) scene_list.push_back(&v);
    std::vector<Prediction> preds(n);
    std::vector<std::string> reasons(n);
    std::vector<char> low_conf(n, 0);
    std::vector<std::exception_ptr> errors(scene_list.size());

    const long n_scenes = static_cast<long>(scene_list.size());
#pragma omp parallel for schedule(dynamic) num_threads(worker_count())
    for (long s = 0; s < n_scenes; ++s) {
      const auto& idx = *scene_list[static_cast<std::size_t>(s)];
      try {
        const bool any_alerting = std::any_of(idx.begin(), idx.end(), [&](std::size_t i) { return is_alerting(cls[i]); });
        SceneAudio audio;
        if (any_alerting) audio = load_scene(base, m.records[idx.front()], m.sample_rate, false);
        for (auto i : idx) {
          const FrameRecord& r = m.records[i];
          preds[i] = {r.id, cls[i], 0.0, false};
          if (!is_alerting(cls[i])) continue;
          const StereoMasks masks{mask_from_tensor(read_tensor(mask_paths[i][0]), cls[i]),
                                  mask_from_tensor(read_tensor(mask_paths[i][1]), cls[i])};
          const Localisation loc = pipe.localise(audio.mixed.slice(r.offset, r.length), masks);
          preds[i].valid = loc.valid;
          preds[i].alpha_deg = loc.valid ? loc.alpha_deg : 0.0;
          reasons[i] = loc.reason;
          low_conf[i] = loc.low_confidence;
        }
      } catch (...) {
        errors[static_cast<std::size_t>(s)] = std::current_exception();
      }
    }
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);

    if (order > 1) preds = median_filter_predictions(preds, m, order);
    write_predictions(out_path, preds);

    std::size_t alerting = 0, valid = 0, empty = 0, low = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_alerting(cls[i])) continue;
      ++alerting;
      valid += preds[i].valid;
      empty += reasons[i] == "empty mask";
      low += preds[i].valid && low_conf[i];
    }
    out << "doa-baseline: " << n << " frames, " << alerting << " alerting, " << valid << " localised, "
        << alerting - valid << " invalid (" << empty << " empty masks), " << low << " low-confidence";
    if (order > 1) out << ", median order " << order;
    out << " -> " << out_path.string() << "\n";
    return 0;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("eval", err, [&] {
    const RunConfig cfg = load_config(args.common);
    const fs::path pred_path = pick(args.predictions, cfg.paths.predictions, "prediction file");
    const fs::path manifest_path = args.manifest.empty() ? fs::path(cfg.paths.data) / "manifest.json" : args.manifest;
    const auto preds = read_predictions(pred_path);
    const Manifest m = read_manifest(manifest_path);
    const EvalReport rep = evaluate(preds, m);
    const auto orders = error_vs_median_order(preds, m, args.orders);

    const fs::path out_dir = args.out.empty() ? pred_path.parent_path() / "report" : args.out;
    fs::create_directories(out_dir);
    const auto write = [&](const char* name, const std::string& text) {
      std::ofstream f(out_dir / name, std::ios::binary | std::ios::trunc);
      if (!f) throw IoError("cannot write '" + (out_dir / name).string() + "'");
      f << text;
    };
    write("report.json", report_to_json(rep));
    write("accuracy_vs_snr.csv", accuracy_vs_snr_csv(rep));
    write("error_histogram.csv", error_histogram_csv(rep));
    write("error_vs_median_order.csv", order_errors_csv(orders));

    const auto num = [](double v) { return std::isfinite(v) ? std::to_string(v) : std::string("n/a"); };
    out << "eval: " << rep.n_records << " records, accuracy " << num(rep.accuracy) << ", median |err| siren "
        << num(rep.median_error_siren) << " horn " << num(rep.median_error_horn) << " all "
        << num(rep.median_error_all) << " deg, " << rep.n_invalid << " invalid -> " << out_dir.string() << "\n";
    return 0;
  });
}

int cmd_export_split(const ExportSplitArgs& args, std::ostream& out, std::ostream& err) {
  return guarded("export-split", err, [&] {
    const RunConfig cfg = load_config(args.common);
    const fs::path manifest_path = args.manifest.empty() ? fs::path(cfg.paths.data) / "manifest.json" : args.manifest;
    const Manifest m = read_manifest(manifest_path);
    if (args.out.empty()) throw ArgumentError("--out is required");
    const fs::path base = manifest_path.parent_path();
    fs::create_directories(args.out);

    std::string train, test;
    std::size_t n_train = 0, n_test = 0;
    for (const auto& r : m.records) {
      if (r.split.empty()) continue;
      if (r.split != "train" && r.split != "test") throw ValidationError("record '" + r.id + "' has split '" + r.split + "'");
      nlohmann::json f = nlohmann::json::object();
      for (const auto& [k, p] : r.features) f[k] = relative_to(base / p, args.out);
      const nlohmann::json j = {{"id", r.id},         {"class", to_string(r.cls)}, {"alpha_deg", r.alpha_deg},
                                {"snr_db", r.snr_db}, {"scene", r.scene},          {"frame", r.frame},
                                {"features", f}};
      (r.split == "train" ? train : test) += j.dump() + "\n";
      ++(r.split == "train" ? n_train : n_test);
    }
    if (n_train + n_test == 0) throw ValidationError("manifest has no split; run `sdsp features` first");
    for (const auto& [name, text] : {std::pair{"train.jsonl", &train}, std::pair{"test.jsonl", &test}}) {
      std::ofstream f(args.out / name, std::ios::binary | std::ios::trunc);
      if (!f) throw IoError("cannot write '" + (args.out / name).string() + "'");
      f << *text;
    }
    out << "export-split: " << n_train << " train, " << n_test << " test -> " << args.out.string() << "\n";
    return 0;
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Alerting-sound scene synthesis, features and direction-of-arrival tools", "sdsp"};
  app.require_subcommand(1);

  CommonArgs common;
  std::uint64_t seed = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "Run configuration file");
    sub->add_option("--seed", seed, "Override the run seed");
  };

  MakeSpecsArgs ms;
  auto* make_specs = app.add_subcommand("make-specs", "Write a class-balanced random scene spec file");
  add_common(make_specs);
  make_specs->add_option("--out", ms.out, "Spec file to write")->required();
  make_specs->add_option("--count", ms.count, "Number of scenes");
  make_specs->add_option("--duration", ms.duration, "Scene length, s");
  make_specs->add_flag("--static", ms.static_sources, "Stationary sources only");
  make_specs->add_flag("--drive-by", ms.drive_by, "Sources approach along a straight lane");
  make_specs->add_flag("--no-other", ms.no_other, "Only alerting classes");
  double snr_min = 0.0, snr_max = 0.0;
  auto* snr_min_opt = make_specs->add_option("--snr-min", snr_min, "Lowest SNR, dB");
  auto* snr_max_opt = make_specs->add_option("--snr-max", snr_max, "Highest SNR, dB");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "Synthesise scenes from a spec file");
  add_common(synth);
  synth->add_option("--specs", sy.specs, "Scene spec file (JSON)");
  synth->add_option("--out", sy.out, "Dataset directory");

  FeaturesArgs fe;
  auto* features = app.add_subcommand("features", "Compute gammatonegram features for a dataset");
  add_common(features);
  features->add_option("--manifest", fe.manifest, "Dataset manifest");
  features->add_option("--out", fe.out, "Feature directory");
  features->add_flag("--oracle-masks", fe.oracle_masks, "Also write ideal masks, masked gammatonegrams, crossgrams");
  features->add_flag("--split-by-clip", fe.split_by_clip, "Split train/test by scene instead of by frame");

  DoaBaselineArgs db;
  int order = 0;
  auto* doa = app.add_subcommand("doa-baseline", "Mask-gated GCC-PHAT direction of arrival per frame");
  add_common(doa);
  doa->add_option("--manifest", db.manifest, "Dataset manifest");
  doa->add_option("--out", db.out, "Prediction file (JSON lines)");
  auto* order_opt = doa->add_option("--median-order", order, "Median filter order over each scene");
  doa->add_option("--classes", db.classes, "Prediction file supplying frame classes");
  doa->add_option("--mask-dir", db.mask_dir, "Directory of predicted mask containers");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "Evaluate predictions against a manifest");
  add_common(eval);
  eval->add_option("--predictions", ev.predictions, "Prediction file (JSON lines)");
  eval->add_option("--manifest", ev.manifest, "Dataset manifest");
  eval->add_option("--out", ev.out, "Report directory");
  eval->add_option("--orders", ev.orders, "Median filter orders for the order sweep")->delimiter(',');

  ExportSplitArgs ex;
  auto* exp = app.add_subcommand("export-split", "Write train/test record lists with feature paths");
  add_common(exp);
  exp->add_option("--manifest", ex.manifest, "Dataset manifest");
  exp->add_option("--out", ex.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  for (auto* sub : app.get_subcommands()) {
    if (sub->get_option("--seed")->count() > 0) common.seed = seed;
  }
  if (make_specs->parsed()) {
    ms.common = common;
    if (snr_min_opt->count() > 0) ms.snr_min_db = snr_min;
    if (snr_max_opt->count() > 0) ms.snr_max_db = snr_max;
    return cmd_make_specs(ms, out, err);
  }
  if (synth->parsed()) {
    sy.common = common;
    return cmd_synth(sy, out, err);
  }
  if (features->parsed()) {
    fe.common = common;
    return cmd_features(fe, out, err);
  }
  if (doa->parsed()) {
    db.common = common;
    if (order_opt->count() > 0) db.median_order = order;
    return cmd_doa_baseline(db, out, err);
  }
  if (eval->parsed()) {
    ev.common = common;
    return cmd_eval(ev, out, err);
  }
  if (exp->parsed()) {
    ex.common = common;
    return cmd_export_split(ex, out, err);
  }
  return 2;
}

}  // namespace sdsp
