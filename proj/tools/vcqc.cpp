// vcqc command-line front end.
//
//   vcqc render|segment|merge|profile|backproject|run --config FILE [--set section.key=value]...
//   vcqc synth --out wall.ply [--seed N] [geometry flags]
//
// Exit codes: 0 success, 2 configuration error, 3 input data error,
// 4 internal failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcqc/pipeline/commands.hpp"
#include "vcqc/synth/printed_wall.hpp"

namespace {

struct PipelineArgs {
  std::string config;
  std::vector<std::string> overrides;
};

void add_pipeline_options(CLI::App* sub, PipelineArgs& a) {
  sub->add_option("-c,--config", a.config, "INI configuration file");
  sub->add_option("--set", a.overrides, "override a key: section.key=value (repeatable)");
}

std::string encode_truth(const vcqc::SynthSpec& spec, std::uint64_t seed, const vcqc::SynthCloud& s) {
  nlohmann::ordered_json j;
  j["format"] = "vcqc-synth/1";
  j["seed"] = seed;
  j["spec"] = {{"n_layers", spec.n_layers},
               {"filament_height_mm", spec.filament_height_mm},
               {"filament_width_mm", spec.filament_width_mm},
               {"path", spec.path == vcqc::PathKind::Straight ? "straight" : "helical"},
               {"length_m", spec.length_m},
               {"radius_m", spec.radius_m},
               {"pitch_mm", spec.pitch_mm},
               {"turns", spec.turns},
               {"cross_section", spec.cross_section == vcqc::CrossSection::Stadium ? "stadium" : "elliptical"},
               {"surface_noise_sigma_mm", spec.surface_noise_sigma_mm},
               {"point_spacing_mm", spec.point_spacing_mm},
               {"groove_depth_mm", spec.groove_depth_mm}};
  j["points"] = s.cloud.size();
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& l : s.layers) {
    j["layers"].push_back({{"label", l.label},
                           {"z_min_m", l.z_min_m},
                           {"z_max_m", l.z_max_m},
                           {"thickness_mm", l.thickness_mm}});
  }
  return j.dump(2) + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual-camera quality control for 3D printed concrete"};
  app.require_subcommand(1);

  PipelineArgs pargs;
  struct Sub {
    const char* name;
    const char* help;
    vcqc::Command cmd;
  };
  const Sub subs[] = {
      {"render", "render the cloud, write rasters, tiles and the tile manifest", vcqc::Command::Render},
      {"segment", "segment tiles (baseline) or validate external masks", vcqc::Command::Segment},
      {"merge", "merge tile masks into global instances", vcqc::Command::Merge},
      {"profile", "thickness profiles, plan deviations and plots", vcqc::Command::Profile},
      {"backproject", "label cloud points with instance ids", vcqc::Command::Backproject},
      {"run", "all stages plus a timing report", vcqc::Command::Run},
  };
  std::vector<std::pair<CLI::App*, vcqc::Command>> pipeline_cmds;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_pipeline_options(sub, pargs);
    pipeline_cmds.emplace_back(sub, s.cmd);
  }

  vcqc::SynthSpec spec;
  std::uint64_t seed = 42;
  std::string out_path, truth_path, path_kind = "straight", section = "stadium", encoding = "binary";
  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic printed wall with ground truth");
  synth->add_option("-o,--out", out_path, "output PLY")->required();
  synth->add_option("--truth", truth_path, "ground-truth JSON (default: <out>.truth.json)");
  synth->add_option("--seed", seed, "RNG seed")->capture_default_str();
  synth->add_option("--layers", spec.n_layers)->capture_default_str();
  synth->add_option("--height-mm", spec.filament_height_mm)->capture_default_str();
  synth->add_option("--width-mm", spec.filament_width_mm)->capture_default_str();
  synth->add_option("--path", path_kind, "straight|helical")->capture_default_str();
  synth->add_option("--length-m", spec.length_m)->capture_default_str();
  synth->add_option("--radius-m", spec.radius_m)->capture_default_str();
  synth->add_option("--pitch-mm", spec.pitch_mm)->capture_default_str();
  synth->add_option("--turns", spec.turns)->capture_default_str();
  synth->add_option("--cross-section", section, "stadium|elliptical")->capture_default_str();
  synth->add_option("--noise-mm", spec.surface_noise_sigma_mm)->capture_default_str();
  synth->add_option("--spacing-mm", spec.point_spacing_mm)->capture_default_str();
  synth->add_option("--groove-mm", spec.groove_depth_mm)->capture_default_str();
  synth->add_option("--encoding", encoding, "binary|ascii")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (synth->parsed()) {
      try {
        spec.path = vcqc::parse_path_kind(path_kind);
        spec.cross_section = vcqc::parse_cross_section(section);
        spec.validate();
      } catch (const vcqc::InvalidArgument& e) {
        throw vcqc::ConfigError(e.what());
      }
      if (encoding != "binary" && encoding != "ascii") throw vcqc::ConfigError("--encoding: expected binary or ascii");
      if (truth_path.empty()) truth_path = out_path + ".truth.json";
      const auto s = vcqc::generate(spec, seed);
      vcqc::save_ply(out_path, s.cloud, encoding == "ascii" ? vcqc::PlyEncoding::Ascii : vcqc::PlyEncoding::BinaryLE,
                     &s.labels);
      vcqc::write_file(truth_path, encode_truth(spec, seed, s));
      std::cout << "wrote " << s.cloud.size() << " points to " << out_path << "\n";
      return 0;
    }
    for (const auto& [sub, cmd] : pipeline_cmds) {
      if (!sub->parsed()) continue;
      const vcqc::PipelineConfig cfg = vcqc::load_config(pargs.config, pargs.overrides);
      switch (cmd) {
        case vcqc::Command::Render: vcqc::cmd_render(cfg); break;
        case vcqc::Command::Segment: vcqc::cmd_segment(cfg); break;
        case vcqc::Command::Merge: vcqc::cmd_merge(cfg); break;
        case vcqc::Command::Profile: vcqc::cmd_profile(cfg); break;
        case vcqc::Command::Backproject: vcqc::cmd_backproject(cfg); break;
        case vcqc::Command::Run: {
          const auto t = vcqc::run_pipeline(cfg);
          std::printf("pre %.2f ms  segmentation %.2f ms  post %.2f ms  total %.2f ms  (%.1f FPS, %zu tiles)\n",
                      t.pre_ms, t.segmentation_ms, t.post_ms, t.total_ms(), t.fps(), t.tiles);
          break;
        }
      }
    }
    return 0;
  } catch (const vcqc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const vcqc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const vcqc::InvalidArgument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
