#pragma once

// Command-line entry points. Each command returns a process exit code:
// 0 on success, 2 on validation, format or I/O failures, 1 otherwise.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sdsp {

struct CommonArgs {
  std::filesystem::path config;  // empty: built-in defaults
  std::optional<std::uint64_t> seed;
};

struct SynthArgs {
  CommonArgs common;
  std::filesystem::path specs;
  std::filesystem::path out;
};

struct MakeSpecsArgs {
  CommonArgs common;
  std::filesystem::path out;
  std::size_t count = 30;
  double duration = 5.0;
  bool static_sources = false;
  bool drive_by = false;
  bool no_other = false;
  std::optional<double> snr_min_db;
  std::optional<double> snr_max_db;
};

struct FeaturesArgs {
  CommonArgs common;
  std::filesystem::path manifest;
  std::filesystem::path out;  // default: <manifest dir>/features
  bool oracle_masks = false;
  bool split_by_clip = false;
};

struct DoaBaselineArgs {
  CommonArgs common;
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::optional<int> median_order;
  std::filesystem::path classes;   // prediction file supplying classes; empty: ground truth
  std::filesystem::path mask_dir;  // <id>.mask1.sdt / <id>.mask2.sdt; empty: manifest features
};

struct EvalArgs {
  CommonArgs common;
  std::filesystem::path predictions;
  std::filesystem::path manifest;
  std::filesystem::path out;
  std::vector<int> orders{1, 3, 5, 7, 9};
};

struct ExportSplitArgs {
  CommonArgs common;
  std::filesystem::path manifest;
  std::filesystem::path out;
};

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_make_specs(const MakeSpecsArgs& args, std::ostream& out, std::ostream& err);
int cmd_features(const FeaturesArgs& args, std::ostream& out, std::ostream& err);
int cmd_doa_baseline(const DoaBaselineArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_export_split(const ExportSplitArgs& args, std::ostream& out, std::ostream& err);

/// Parses argv (argv[0] is the program name) and dispatches to a command.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sdsp
