// --------------------------------------------------------------------------------------------
// Copyright 2026 The adaptive_sci Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// sci_sim: command-line front end for the adaptive SCI simulator.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "adaptive_sci/config.hpp"
#include "adaptive_sci/fixtures.hpp"

namespace fs = std::filesystem;
using namespace adaptive_sci;

namespace
{
struct Globals
{
  std::optional<std::uint64_t> seed;
  std::string config;
};

/// Everything read from --config, with --seed applied on top.
struct Settings
{
  ConfigFile file;
  RunConfig run;
  TrainSettings train;
  PathConfig paths;
  std::optional<std::uint64_t> seed;

  MaskConfig masks() const
  {
    auto m = masks_from_config(file, run.space);
    if (seed) apply_global_seed(*seed, nullptr, nullptr, nullptr, &m);
    return m;
  }

  SceneSpec scene() const
  {
    auto s = scene_from_config(file);
    if (seed) apply_global_seed(*seed, &s, nullptr, nullptr, nullptr);
    return s;
  }
};

Settings load_settings(const Globals & g)
{
  Settings s;
  if (!g.config.empty()) {
    s.file = load_config(g.config);
  }
  check_sections(s.file);
  s.run = run_from_config(s.file);
  s.train = train_from_config(s.file);
  s.paths = paths_from_config(s.file);
  s.seed = g.seed;
  if (g.seed) apply_global_seed(*g.seed, nullptr, &s.run, &s.train.train, nullptr);
  return s;
}

/// Command-line value first, then the [paths] entry.
std::string path_or(const std::string & cli, const Settings & s, const std::string & key)
{
  if (!cli.empty()) return cli;
  if (auto v = s.paths.get(key)) return *v;
  throw ValidationError("missing --" + key + " (or " + key + " in [paths])");
}

LabeledVideo load_labeled(const fs::path & manifest)
{
  auto [video, track] = load_frames(manifest);
  if (!track) {
    throw ValidationError(manifest.string() + " has no ground-truth track");
  }
  return {std::move(video), std::move(*track)};
}

MaskStack masks_for(const std::string & path, const Settings & s, const FrameSequence & video)
{
  if (!path.empty()) {
    auto m = load_masks(path);
    require(m.width() == video.width() && m.height() == video.height(),
            "mask file " + path + " does not match the video dimensions");
    return m;
  }
  const auto mc = s.masks();
  return generate_masks(video.width(), video.height(), static_cast<std::size_t>(mc.bmax), mc.seed,
                        s.run.space.values);
}

std::size_t pick_B(int cli, const Settings & s)
{
  const int B = cli > 0 ? cli : s.run.initial_B.value_or(s.run.space.bmin());
  require(B >= 1, "B must be >= 1");
  return static_cast<std::size_t>(B);
}

struct Window
{
  std::size_t first = 0;
  Cube truth;
  Measurement m;
};

/// Every complete window of B frames, sensed with the run's noise level.
std::vector<Window> sense_all(const FrameSequence & video, const MaskStack & masks, std::size_t B, double sigma,
                              std::uint64_t seed)
{
  video.validate();
  require(B <= video.size(), "video is shorter than one window of B frames");
  Rng rng(seed);
  std::vector<Window> out;
  for (std::size_t first = 0; first + B <= video.size(); first += B) {
    Window w;
    w.first = first;
    w.truth = Cube::from_frames(std::span<const Image>(video.frames).subspan(first, B));
    w.m = sense(w.truth, masks, B, sigma, rng, first);
    out.push_back(std::move(w));
  }
  return out;
}

LabeledVideo named_fixture(const std::string & name, std::uint64_t seed)
{
  if (name == "static") return static_fixture(seed);
  if (name == "moving") return moving_fixture(seed);
  if (name == "fast") return fast_fixture(seed);
  if (name == "three_segment") return three_segment_fixture(seed);
  throw ValidationError("unknown fixture '" + name + "'");
}

EpisodeLog log_from_csv(const fs::path & path)
{
  EpisodeLog log;
  log.source = "csv";
  log.steps = read_log_csv(path);
  log.summary = summarize(log.steps, 0);
  return log;
}

// Logs read back from CSV do not record dropped frames.
void print_summary(const std::string & label, const LogSummary & s, bool with_dropped = true)
{
  std::printf("%-10s mean_B %6.2f  mean_psnr %s  detection_rate %.4f  frames %zu", label.c_str(), s.mean_B,
              s.mean_psnr ? std::to_string(*s.mean_psnr).c_str() : "-", s.mean_detection_rate, s.total_frames);
  if (with_dropped) std::printf("  dropped %zu", s.dropped_frames);
  std::printf("\n");
}
}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Adaptive snapshot compressive imaging simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Global seed; overrides every seed in the config");
  app.add_option("--config", g.config, "INI-style configuration file");

  // generate
  std::string gen_out, gen_fixture;
  auto * gen = app.add_subcommand("generate", "Render a synthetic scene to PGM frames plus a track");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--fixture", gen_fixture, "Built-in scene: static, moving, fast, three_segment");
  gen->callback([&] {
    const auto s = load_settings(g);
    const fs::path dir = path_or(gen_out, s, "output");
    LabeledVideo lv;
    if (!gen_fixture.empty()) {
      lv = named_fixture(gen_fixture, s.seed.value_or(0));
    } else {
      lv = render(s.scene());
      if (auto plan = retime_from_config(s.file)) {
        auto [v, t] = retime(lv.video, lv.track, *plan);
        lv = {std::move(v), std::move(t)};
      }
    }
    const auto manifest = save_frames(lv.video, dir, &lv.track);
    std::printf("wrote %zu frames (%zux%zu) to %s\n", lv.video.size(), lv.video.width(), lv.video.height(),
                manifest.string().c_str());
  });

  // masks
  std::string masks_out;
  std::size_t masks_w = 0, masks_h = 0;
  auto * msk = app.add_subcommand("masks", "Generate a binary mask stack");
  msk->add_option("--out", masks_out, "Mask file");
  msk->add_option("--width", masks_w, "Frame width (default: [scene] width)");
  msk->add_option("--height", masks_h, "Frame height (default: [scene] height)");
  msk->callback([&] {
    const auto s = load_settings(g);
    const auto scene = scene_from_config(s.file);
    const auto mc = s.masks();
    const std::size_t w = masks_w > 0 ? masks_w : static_cast<std::size_t>(scene.width);
    const std::size_t h = masks_h > 0 ? masks_h : static_cast<std::size_t>(scene.height);
    const auto m = generate_masks(w, h, static_cast<std::size_t>(mc.bmax), mc.seed, s.run.space.values);
    const fs::path out = path_or(masks_out, s, "masks");
    save_masks(m, out);
    std::printf("wrote %zux%zux%zu masks (seed %llu) to %s\n", w, h, m.bmax(),
                static_cast<unsigned long long>(mc.seed), out.string().c_str());
  });

  // sense / reconstruct / detect share their inputs
  std::string io_video, io_masks, io_out;
  int io_B = 0;
  std::optional<double> io_sigma;
  const auto add_io = [&](CLI::App * sub) {
    sub->add_option("--video", io_video, "Frame manifest");
    sub->add_option("--masks", io_masks, "Mask file (default: generated from [masks])");
    sub->add_option("-B,--ratio", io_B, "Compression ratio (default: run.initial_B or the smallest state)");
    sub->add_option("--sigma", io_sigma, "Measurement noise std (default: run.sigma)");
    sub->add_option("--out", io_out, "Output location");
  };

  auto * sns = app.add_subcommand("sense", "Write the normalized measurement of every window");
  add_io(sns);
  sns->callback([&] {
    const auto s = load_settings(g);
    auto [video, track] = load_frames(path_or(io_video, s, "video"));
    const auto masks = masks_for(io_masks, s, video);
    const auto B = pick_B(io_B, s);
    const fs::path dir = path_or(io_out, s, "measurements");
    fs::create_directories(dir);
    const auto windows = sense_all(video, masks, B, io_sigma.value_or(s.run.sigma), s.run.noise_seed());
    for (std::size_t k = 0; k < windows.size(); ++k) {
      char name[40];
      std::snprintf(name, sizeof(name), "measurement_%06zu.pgm", k);
      write_pgm(normalize(windows[k].m, masks).ybar, dir / name);
    }
    std::printf("wrote %zu measurements (B = %zu) to %s\n", windows.size(), B, dir.string().c_str());
  });

  auto * rec = app.add_subcommand("reconstruct", "GAP-TV reconstruction of every window");
  add_io(rec);
  rec->callback([&] {
    const auto s = load_settings(g);
    auto [video, track] = load_frames(path_or(io_video, s, "video"));
    const auto masks = masks_for(io_masks, s, video);
    const auto B = pick_B(io_B, s);
    const auto windows = sense_all(video, masks, B, io_sigma.value_or(s.run.sigma), s.run.noise_seed());
    FrameSequence out;
    out.fps = video.fps;
    out.name = video.name + "_reconstructed";
    std::vector<Cube> est, truth;
    for (const auto & w : windows) {
      est.push_back(gap_tv(w.m, masks, s.run.reconstruction));
      truth.push_back(w.truth);
      for (std::size_t b = 0; b < B; ++b) {
        Image f(video.width(), video.height());
        std::copy(est.back().frame(b).begin(), est.back().frame(b).end(), f.pixels().begin());
        out.frames.push_back(std::move(f));
      }
    }
    const auto q = psnr(est, truth);
    std::printf("B = %zu  windows %zu  psnr %.4f dB\n", B, windows.size(), q.psnr_db);
    if (!io_out.empty() || s.paths.get("output")) {
      const auto manifest = save_frames(out, path_or(io_out, s, "output"));
      std::printf("wrote %zu frames to %s\n", out.size(), manifest.string().c_str());
    }
  });

  auto * det = app.add_subcommand("detect", "Blob detection on normalized measurements");
  add_io(det);
  det->callback([&] {
    const auto s = load_settings(g);
    const auto lv = load_labeled(path_or(io_video, s, "video"));
    const auto masks = masks_for(io_masks, s, lv.video);
    const auto B = pick_B(io_B, s);
    const auto windows = sense_all(lv.video, masks, B, io_sigma.value_or(s.run.sigma), s.run.noise_seed());
    std::ofstream file;
    if (!io_out.empty()) {
      file.open(io_out);
      if (!file) throw IoError("cannot open " + io_out + " for writing");
    }
    std::ostream & out = io_out.empty() ? std::cout : file;
    std::vector<NormalizedMeasurement> normalized;
    std::vector<std::vector<BoundingBox>> gts;
    for (std::size_t k = 0; k < windows.size(); ++k) {
      normalized.push_back(normalize(windows[k].m, masks));
      gts.push_back(window_hulls(lv.track, windows[k].first, B));
      for (const auto & d : blob_detect(normalized.back(), s.run.detector.threshold, s.run.detector.min_area)) {
        char conf[32];
        std::snprintf(conf, sizeof(conf), "%.6f", d.confidence);
        out << k << ' ' << conf << ' ' << d.box.x << ' ' << d.box.y << ' ' << d.box.w << ' ' << d.box.h << '\n';
      }
    }
    if (!out) throw IoError("failed writing detections");
    std::fprintf(stderr, "B = %zu  windows %zu  detection_rate %.4f\n", B, windows.size(),
                 detection_rate(normalized, gts, s.run.detector));
  });

  // train
  std::string train_out, train_returns, train_masks;
  auto * trn = app.add_subcommand("train", "Q-learning on the static/fast two-regime environment");
  trn->add_option("--out", train_out, "Q-table file");
  trn->add_option("--returns", train_returns, "Per-episode return CSV");
  trn->add_option("--masks", train_masks, "Mask file (default: generated from [masks])");
  trn->callback([&] {
    const auto s = load_settings(g);
    std::vector<LabeledVideo> regimes;
    const auto st = s.paths.get("regime_static");
    const auto fa = s.paths.get("regime_fast");
    require(st.has_value() == fa.has_value(), "give both regime_static and regime_fast, or neither");
    if (st) {
      regimes.push_back(load_labeled(*st));
      regimes.push_back(load_labeled(*fa));
    } else {
      regimes = training_regimes(s.train.train.seed);
    }
    auto masks = masks_for(train_masks, s, regimes.front().video);
    // PSNR only reaches rewards and observations through shaping.
    RunConfig run = s.run;
    run.with_reconstruction = s.run.with_psnr_shaping;
    RegimeEnvironment env(std::move(regimes), std::move(masks), run, s.train.switch_probability);
    const auto res = train(env, s.train.train);
    const fs::path out = path_or(train_out, s, "qtable");
    save_qtable(res.table, out);
    if (!train_returns.empty()) {
      auto csv = std::ofstream(train_returns);
      if (!csv) throw IoError("cannot open " + train_returns + " for writing");
      csv << "episode,return\n";
      for (std::size_t e = 0; e < res.episode_returns.size(); ++e) {
        csv << e << ',' << detail::fmt6(res.episode_returns[e]) << '\n';
      }
      if (!csv) throw IoError("failed writing " + train_returns);
    }
    std::printf("trained %zu episodes, %zu observations, max |Q| %.4f -> %s\n", res.episode_returns.size(),
                res.table.observations(), res.max_abs_q, out.string().c_str());
  });

  // run / baseline
  std::string run_video, run_masks, run_qtable, run_out;
  bool run_timing = false;
  auto * rn = app.add_subcommand("run", "Adaptive capture with a trained Q-table");
  rn->add_option("--video", run_video, "Frame manifest with a track");
  rn->add_option("--masks", run_masks, "Mask file (default: generated from [masks])");
  rn->add_option("--qtable", run_qtable, "Q-table file");
  rn->add_option("--out", run_out, "Episode log CSV");
  rn->add_flag("--timing", run_timing, "Add a wall-clock column to the log");
  rn->callback([&] {
    const auto s = load_settings(g);
    const auto lv = load_labeled(path_or(run_video, s, "video"));
    const auto masks = masks_for(run_masks, s, lv.video);
    const auto policy = greedy_policy(load_qtable(path_or(run_qtable, s, "qtable")));
    const auto log = run_adaptive(lv.video, lv.track, masks, policy, s.run);
    emit_csv(log, path_or(run_out, s, "output"), run_timing);
    print_summary("adaptive", log.summary);
  });

  std::string base_video, base_masks, base_out;
  std::vector<int> base_B;
  auto * bl = app.add_subcommand("baseline", "Fixed-B runs, one log per compression ratio");
  bl->add_option("--video", base_video, "Frame manifest with a track");
  bl->add_option("--masks", base_masks, "Mask file (default: generated from [masks])");
  bl->add_option("-B,--ratio", base_B, "Ratios to run (default: every state)");
  bl->add_option("--out", base_out, "Output directory for fixed_B<B>.csv");
  bl->callback([&] {
    const auto s = load_settings(g);
    const auto lv = load_labeled(path_or(base_video, s, "video"));
    const auto masks = masks_for(base_masks, s, lv.video);
    const fs::path dir = path_or(base_out, s, "output");
    fs::create_directories(dir);
    for (int B : base_B.empty() ? s.run.space.values : base_B) {
      const auto log = run_fixed(lv.video, lv.track, masks, B, s.run);
      emit_csv(log, dir / ("fixed_B" + std::to_string(B) + ".csv"));
      print_summary("B=" + std::to_string(B), log.summary);
    }
  });

  // compare
  std::string cmp_adaptive, cmp_out;
  std::vector<std::string> cmp_fixed;
  auto * cmp = app.add_subcommand("compare", "Adaptive log against fixed-B logs");
  cmp->add_option("--adaptive", cmp_adaptive, "Adaptive episode log")->required();
  cmp->add_option("--fixed", cmp_fixed, "Fixed-B episode logs")->required();
  cmp->add_option("--out", cmp_out, "Comparison report CSV");
  cmp->callback([&] {
    const auto s = load_settings(g);
    const auto adaptive = log_from_csv(cmp_adaptive);
    std::vector<EpisodeLog> fixed;
    for (const auto & f : cmp_fixed) fixed.push_back(log_from_csv(f));
    const auto report = compare(adaptive, fixed);
    print_summary("adaptive", report.adaptive, false);
    for (std::size_t i = 0; i < report.baselines.size(); ++i) {
      const auto & b = report.baselines[i];
      std::printf("fixed B=%-3d delta_psnr %s  delta_detection_rate %+.4f%s\n", b.B,
                  b.delta_psnr ? std::to_string(*b.delta_psnr).c_str() : "-", b.delta_detection_rate,
                  i == report.nearest ? "  (nearest)" : "");
    }
    if (!cmp_out.empty()) emit_csv(report, cmp_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ValidationError & e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError & e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  } catch (const fs::filesystem_error & e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 2;
  }
  return 0;
}
